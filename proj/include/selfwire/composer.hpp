#pragma once

// Pipeline search over the refinement DAG.
//
// A node is a multiset of module ids together with the class expression
// its modules accumulate on top of the question class. Starting from the
// start modules, the best-scored incomplete node is expanded by every
// module that connects to its type; children with an already known
// multiset are merged into the existing node. Complete nodes (type
// subsumed by the answer class) are pipelines and are not expanded
// further. The search runs until the frontier is empty.

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "selfwire/hierarchy.hpp"
#include "selfwire/registry.hpp"

namespace selfwire {

struct ComposeRequest {
  ClassExpr question_class = ClassExpr::named(std::string(vocab::kQaQuestion));
  std::string answer_class = std::string(vocab::kQaAnswer);
  std::size_t max_len = 6;
  std::size_t max_multiplicity = 1;

  void validate() const {
    if (max_len < 1) throw Error("max_len must be at least 1");
    if (max_multiplicity < 1) throw Error("max_multiplicity must be at least 1");
    if (!Iri::valid(answer_class)) throw InvalidIri("invalid answer class IRI '" + answer_class + "'");
  }
};

using ModuleKey = std::vector<std::string>;  // sorted module ids, repeats allowed

struct PipelineNode {
  ModuleKey key;
  std::vector<std::string> witness;
  ClassExpr acc_type;
  bool complete = false;
  Distance distance;
  double score = 0.0;
};

struct RefinementDag {
  std::vector<PipelineNode> nodes;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // parent, child
  std::size_t expanded = 0;
  std::size_t frontier_peak = 0;
};

struct ComposeResult {
  std::vector<PipelineNode> pipelines;
  std::size_t expanded = 0;
  std::size_t frontier_peak = 0;
};

inline double score_of(const Distance& d) { return d ? 1.0 / (1.0 + static_cast<double>(*d)) : 0.0; }

// Start modules connect anywhere; otherwise some input disjunct must
// subsume the accumulated type.
inline bool connects(const Description& acc, const ModuleDescriptor& next) {
  return next.is_start() ||
         std::any_of(next.input.begin(), next.input.end(), [&](const ClassExpr& d) { return acc.entails(d); });
}

inline bool connects(const Ontology& onto, const ClassExpr& acc_type, const ModuleDescriptor& next) {
  if (next.is_start()) return true;
  return connects(onto.reasoner().describe(acc_type), next);
}

inline ClassExpr accumulate(const ClassExpr& acc_type, const ModuleDescriptor& next) {
  return ClassExpr::conjunction(acc_type, next.output_delta);
}

inline double score(const Ontology& onto, const Hierarchy& h, const ClassExpr& acc_type, const std::string& answer) {
  return score_of(distance(h, onto, acc_type, answer));
}

namespace detail {

inline ModuleKey key_plus(const ModuleKey& key, const std::string& id) {
  ModuleKey out = key;
  out.insert(std::upper_bound(out.begin(), out.end(), id), id);
  return out;
}

inline std::size_t multiplicity(const ModuleKey& key, const std::string& id) {
  auto [lo, hi] = std::equal_range(key.begin(), key.end(), id);
  return static_cast<std::size_t>(hi - lo);
}

// Frontier order: closest to the answer first (infinite distance last),
// then the lexicographically smallest key.
struct FrontierEntry {
  Distance distance;
  ModuleKey key;
  std::size_t node;

  friend bool operator<(const FrontierEntry& a, const FrontierEntry& b) {
    if (a.distance != b.distance) {
      if (!a.distance) return false;
      if (!b.distance) return true;
      return *a.distance < *b.distance;
    }
    return a.key < b.key;
  }
};

}  // namespace detail

inline RefinementDag build_refinement_dag(const Registry& registry, const ComposeRequest& req) {
  req.validate();
  const Ontology& onto = registry.ontology();
  const Reasoner& reasoner = onto.reasoner();
  const Hierarchy h = classify(onto);
  const ClassExpr answer = ClassExpr::named(req.answer_class);

  RefinementDag dag;
  std::map<ModuleKey, std::size_t> by_key;
  std::set<detail::FrontierEntry> frontier;
  std::vector<std::optional<Description>> descriptions;

  // Returns the node index and whether it was created.
  auto add_node = [&](ModuleKey key, std::vector<std::string> witness, ClassExpr acc) -> std::pair<std::size_t, bool> {
    if (auto it = by_key.find(key); it != by_key.end()) {
      if (dag.nodes[it->second].acc_type != acc) {
        throw std::logic_error("accumulated type depends on witness order for " + acc.str());
      }
      return {it->second, false};
    }
    Description desc = reasoner.describe(acc);
    PipelineNode n;
    n.key = std::move(key);
    n.witness = std::move(witness);
    n.acc_type = std::move(acc);
    n.complete = desc.entails(answer);
    n.distance = n.complete ? Distance(0) : distance(h, desc, req.answer_class);
    n.score = score_of(n.distance);
    std::size_t idx = dag.nodes.size();
    by_key.emplace(n.key, idx);
    if (!n.complete && n.key.size() < req.max_len) {
      frontier.insert({n.distance, n.key, idx});
      dag.frontier_peak = std::max(dag.frontier_peak, frontier.size());
      descriptions.emplace_back(std::move(desc));
    } else {
      descriptions.emplace_back(std::nullopt);
    }
    dag.nodes.push_back(std::move(n));
    return {idx, true};
  };

  for (const auto& m : find_start_modules(registry, req.question_class)) {
    add_node({m.id}, {m.id}, accumulate(req.question_class, m));
  }

  while (!frontier.empty()) {
    detail::FrontierEntry top = *frontier.begin();
    frontier.erase(frontier.begin());
    ++dag.expanded;
    const std::size_t parent = top.node;
    Description desc = std::move(*descriptions[parent]);
    descriptions[parent].reset();
    for (const auto& [id, m] : registry.modules()) {
      const PipelineNode& p = dag.nodes[parent];
      if (detail::multiplicity(p.key, id) >= req.max_multiplicity) continue;
      if (!connects(desc, m)) continue;
      std::vector<std::string> witness = p.witness;
      witness.push_back(id);
      std::size_t child = add_node(detail::key_plus(p.key, id), std::move(witness), accumulate(p.acc_type, m)).first;
      dag.edges.emplace_back(parent, child);
    }
  }
  return dag;
}

inline ComposeResult compose(const Registry& registry, const ComposeRequest& req = {}) {
  RefinementDag dag = build_refinement_dag(registry, req);
  ComposeResult out;
  out.expanded = dag.expanded;
  out.frontier_peak = dag.frontier_peak;
  for (auto& n : dag.nodes) {
    if (n.complete) out.pipelines.push_back(std::move(n));
  }
  std::sort(out.pipelines.begin(), out.pipelines.end(), [](const PipelineNode& a, const PipelineNode& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.key < b.key;
  });
  return out;
}

inline nlohmann::ordered_json to_json(const ComposeResult& r) {
  nlohmann::ordered_json j;
  j["pipelines"] = nlohmann::ordered_json::array();
  for (const auto& p : r.pipelines) {
    nlohmann::ordered_json e;
    e["modules"] = p.witness;
    e["multiset"] = p.key;
    e["acc_type"] = p.acc_type.str();
    e["score"] = p.score;
    j["pipelines"].push_back(std::move(e));
  }
  j["expanded"] = r.expanded;
  j["frontier_peak"] = r.frontier_peak;
  return j;
}

// Exhaustive depth-first enumeration of module sequences. A sequence ends
// at its first complete prefix, as a pipeline ends once it has produced
// the answer. Returns the multisets of all complete sequences.
inline std::set<ModuleKey> compose_oracle(const Registry& registry, const ComposeRequest& req = {}) {
  req.validate();
  const Ontology& onto = registry.ontology();
  const ClassExpr answer = ClassExpr::named(req.answer_class);
  std::set<ModuleKey> out;
  std::vector<std::string> seq;

  auto dfs = [&](auto&& self, const ClassExpr& acc) -> void {
    Description desc = onto.reasoner().describe(acc);
    if (!seq.empty() && desc.entails(answer)) {
      ModuleKey key = seq;
      std::sort(key.begin(), key.end());
      out.insert(std::move(key));
      return;
    }
    if (seq.size() >= req.max_len) return;
    for (const auto& [id, m] : registry.modules()) {
      if (static_cast<std::size_t>(std::count(seq.begin(), seq.end(), id)) >= req.max_multiplicity) continue;
      // The first module must accept the question; later ones the
      // accumulated output.
      if (!connects(desc, m)) continue;
      seq.push_back(id);
      self(self, accumulate(acc, m));
      seq.pop_back();
    }
  };
  dfs(dfs, req.question_class);
  return out;
}

}  // namespace selfwire
