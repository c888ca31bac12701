#pragma once

// Messages exchanged between modules: an RDF graph, the focus resource the
// pipeline is answering about, and the class expression it is known to
// satisfy.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfwire/class_expr.hpp"
#include "selfwire/ontology.hpp"
#include "selfwire/rdf.hpp"

namespace selfwire {

class Message {
 public:
  Message(Graph graph, Iri focus, ClassExpr conforms_to = ClassExpr::top())
      : graph_(std::move(graph)), focus_(std::move(focus)), conforms_to_(std::move(conforms_to)) {
    Term f = Term::iri(focus_);
    bool found = std::any_of(graph_.begin(), graph_.end(), [&](const Triple& t) { return t.s == f; });
    if (!found) throw Error("message graph has no triple about focus <" + focus_.str() + ">");
  }

  const Graph& graph() const noexcept { return graph_; }
  const Iri& focus() const noexcept { return focus_; }
  Term focus_term() const { return Term::iri(focus_); }
  const ClassExpr& conforms_to() const noexcept { return conforms_to_; }

  Message with_type(ClassExpr c) const& {
    Message out = *this;
    out.conforms_to_ = std::move(c);
    return out;
  }

  friend bool operator==(const Message&, const Message&) = default;

 private:
  Graph graph_;
  Iri focus_;
  ClassExpr conforms_to_;
};

struct Delta {
  Graph graph;
};

inline bool valid_invocation_id(std::string_view id) {
  return !id.empty() && std::all_of(id.begin(), id.end(), detail::is_alnum);
}

namespace detail {

inline Term standardize(const Term& t, const std::string& suffix) {
  return t.is_blank() ? Term::blank(t.value() + suffix) : t;
}

}  // namespace detail

// Union of msg and delta, with every delta blank label b renamed to b_<id>.
inline Message merge(const Message& msg, const Delta& delta, std::string_view invocation_id) {
  if (!valid_invocation_id(invocation_id)) {
    throw Error("invalid invocation id '" + std::string(invocation_id) + "'");
  }
  const std::string suffix = "_" + std::string(invocation_id);
  Graph g = msg.graph();
  for (const auto& t : delta.graph) {
    g.emplace(detail::standardize(t.s, suffix), t.p, detail::standardize(t.o, suffix));
  }
  return Message(std::move(g), msg.focus(), msg.conforms_to());
}

using TypeMap = std::map<Term, std::set<std::string>>;

namespace detail {

// Forward-chaining over the graph's nodes. Types are TBox concept ids
// (including normalization names) plus asserted classes the TBox does not
// know. Each added concept brings its base closure S(A) with it, which
// already accounts for told subsumption and for existentials the TBox
// itself introduces. The graph contributes CR2 over concepts at one node and
// CR4 over its real edges. `rng` picks worklist entries in random order when
// given; the result must not depend on it.
class TypeSaturation {
 public:
  TypeSaturation(const Graph& graph, const Ontology& onto, std::mt19937_64* rng)
      : reasoner_(onto.reasoner()), index_(reasoner_.index()), rng_(rng) {
    for (const auto& t : graph) {
      int s = node(t.s);
      if (t.o.is_literal()) continue;
      if (t.p.value() == vocab::kRdfType && t.o.is_iri()) {
        asserted_.emplace_back(s, t.o.value());
        continue;
      }
      int o = node(t.o);
      if (auto r = index_.find_role(t.p.value())) {
        preds_[o].emplace_back(*r, s);
      }
    }
  }

  TypeMap run() {
    for (std::size_t x = 0; x < terms_.size(); ++x) add(static_cast<int>(x), kTopId);
    for (const auto& [x, iri] : asserted_) {
      if (auto id = index_.find_concept(ClassExpr::named(iri))) {
        add(x, *id);
      } else {
        unknown_[x].insert(iri);
      }
    }
    while (!queue_.empty()) {
      std::size_t pick = queue_.size() - 1;
      if (rng_) pick = std::uniform_int_distribution<std::size_t>(0, queue_.size() - 1)(*rng_);
      std::swap(queue_[pick], queue_.back());
      auto [x, c] = queue_.back();
      queue_.pop_back();
      process(x, c);
    }
    TypeMap out;
    for (std::size_t x = 0; x < terms_.size(); ++x) {
      std::set<std::string> names = unknown_[x];
      for (int c : types_[x]) {
        if (reasoner_.is_user_name(c)) names.insert(index_.concept_iris[c]);
      }
      if (!names.empty()) out.emplace(terms_[x], std::move(names));
    }
    return out;
  }

 private:
  int node(const Term& t) {
    auto [it, fresh] = ids_.emplace(t, static_cast<int>(terms_.size()));
    if (fresh) {
      terms_.push_back(t);
      types_.emplace_back();
      unknown_.emplace_back();
      preds_.emplace_back();
    }
    return it->second;
  }

  void add(int x, int c) {
    if (types_[x].count(c)) return;
    for (int d : reasoner_.base().node(c).concepts) {
      if (types_[x].insert(d).second) queue_.push_back({x, d});
    }
  }

  void process(int x, int c) {
    if (static_cast<std::size_t>(c) >= index_.size()) return;
    for (auto [other, b] : index_.conj[c]) {
      if (types_[x].count(other)) add(x, b);
    }
    for (auto [r, p] : preds_[x]) {
      for (auto [r2, b] : index_.exists_lhs[c]) {
        if (r2 == r) add(p, b);
      }
    }
  }

  const Reasoner& reasoner_;
  const TBoxIndex& index_;
  std::mt19937_64* rng_;
  std::map<Term, int> ids_;
  std::vector<Term> terms_;
  std::vector<std::set<int>> types_;
  std::vector<std::set<std::string>> unknown_;
  std::vector<std::vector<std::pair<int, int>>> preds_;  // (role, subject)
  std::vector<std::pair<int, std::string>> asserted_;
  std::vector<std::pair<int, int>> queue_;
};

}  // namespace detail

// Named classes derivable for each node of the graph. Nodes without any
// type are absent.
inline TypeMap saturate_types(const Graph& graph, const Ontology& onto) {
  return detail::TypeSaturation(graph, onto, nullptr).run();
}

namespace detail {

class ConformanceCheck {
 public:
  ConformanceCheck(const Graph& graph, const Ontology& onto)
      : graph_(graph), onto_(onto), types_(saturate_types(graph, onto)) {}

  bool holds(const Term& x, const ClassExpr& c) {
    switch (c.kind()) {
      case ClassExpr::Kind::top:
        return true;
      case ClassExpr::Kind::bottom:
        return false;
      case ClassExpr::Kind::named: {
        auto it = types_.find(x);
        return it != types_.end() && it->second.count(c.iri()) > 0;
      }
      case ClassExpr::Kind::conjunction:
        return std::all_of(c.conjuncts().begin(), c.conjuncts().end(),
                           [&](const ClassExpr& part) { return holds(x, part); });
      case ClassExpr::Kind::existential: {
        for (const auto& t : graph_) {
          if (t.s == x && t.p.value() == c.iri() && !t.o.is_literal() && holds(t.o, c.filler())) {
            return true;
          }
        }
        return entailed_by_types(x, c);
      }
    }
    return false;
  }

 private:
  bool entailed_by_types(const Term& x, const ClassExpr& c) {
    auto it = types_.find(x);
    if (it == types_.end()) return false;
    std::vector<ClassExpr> parts;
    for (const auto& name : it->second) parts.push_back(ClassExpr::named(name));
    return onto_.reasoner().subsumes(ClassExpr::conjunction(std::move(parts)), c);
  }

  const Graph& graph_;
  const Ontology& onto_;
  TypeMap types_;
};

}  // namespace detail

// Closed-world structural check of c at the message's focus.
inline bool conforms(const Message& msg, const ClassExpr& c, const Ontology& onto) {
  return detail::ConformanceCheck(msg.graph(), onto).holds(msg.focus_term(), c);
}

}  // namespace selfwire
