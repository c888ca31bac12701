#pragma once

// Completion-rule saturation for EL with Bottom.
//
// Every basic concept is a node of a canonical model. S(X) holds the basic
// concepts entailed for X and R holds role edges between nodes:
//   CR1  A ∈ S(X), A ⊑ B            ⇒ B ∈ S(X)
//   CR2  A1, A2 ∈ S(X), A1⊓A2 ⊑ B   ⇒ B ∈ S(X)
//   CR3  A ∈ S(X), A ⊑ ∃r.B         ⇒ (X, B) ∈ R(r)
//   CR4  (X, Y) ∈ R(r), A ∈ S(Y), ∃r.A ⊑ B ⇒ B ∈ S(X)
//   CR5  (X, Y) ∈ R(r), ⊥ ∈ S(Y)    ⇒ ⊥ ∈ S(X)
// A query expression C gets its own overlay of nodes on top of the saturated
// TBox. Overlay nodes only ever point into the base, never the reverse, so
// the base stays read-only and queries can run concurrently.

#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "selfwire/class_expr.hpp"
#include "selfwire/normalize.hpp"

namespace selfwire {

namespace detail {

inline constexpr int kTopId = 0;
inline constexpr int kBottomId = 1;

struct TBoxIndex {
  std::unordered_map<std::string, int> concept_ids;
  std::vector<std::string> concept_iris;  // "" for Top and Bottom
  std::unordered_map<std::string, int> role_ids;
  std::vector<std::string> role_iris;

  std::vector<std::vector<int>> told;                        // A ⊑ B
  std::vector<std::vector<std::pair<int, int>>> conj;        // A ⊓ other ⊑ B as (other, B)
  std::vector<std::vector<std::pair<int, int>>> exists_rhs;  // A ⊑ ∃r.B as (r, B)
  std::vector<std::vector<std::pair<int, int>>> exists_lhs;  // ∃r.A ⊑ B as (r, B)

  TBoxIndex() {
    concept_iris = {"", ""};
    resize();
  }

  std::size_t size() const { return concept_iris.size(); }

  int intern_concept(const ClassExpr& e) {
    if (e.is_top()) return kTopId;
    if (e.is_bottom()) return kBottomId;
    auto [it, fresh] = concept_ids.emplace(e.iri(), static_cast<int>(concept_iris.size()));
    if (fresh) {
      concept_iris.push_back(e.iri());
      resize();
    }
    return it->second;
  }

  int intern_role(const std::string& iri) {
    auto [it, fresh] = role_ids.emplace(iri, static_cast<int>(role_iris.size()));
    if (fresh) role_iris.push_back(iri);
    return it->second;
  }

  std::optional<int> find_concept(const ClassExpr& e) const {
    if (e.is_top()) return kTopId;
    if (e.is_bottom()) return kBottomId;
    auto it = concept_ids.find(e.iri());
    if (it == concept_ids.end()) return std::nullopt;
    return it->second;
  }

  std::optional<int> find_role(const std::string& iri) const {
    auto it = role_ids.find(iri);
    if (it == role_ids.end()) return std::nullopt;
    return it->second;
  }

  void add(const Axiom& ax) {
    const ClassExpr& sub = ax.sub;
    const ClassExpr& sup = ax.sup;
    if (sup.is_existential()) {
      int a = intern_concept(sub);
      int r = intern_role(sup.iri());
      int b = intern_concept(sup.filler());
      exists_rhs[a].emplace_back(r, b);
      return;
    }
    int b = intern_concept(sup);
    if (sub.is_conjunction()) {
      int a1 = intern_concept(sub.conjuncts()[0]);
      int a2 = intern_concept(sub.conjuncts()[1]);
      conj[a1].emplace_back(a2, b);
      conj[a2].emplace_back(a1, b);
    } else if (sub.is_existential()) {
      int r = intern_role(sub.iri());
      int a = intern_concept(sub.filler());
      exists_lhs[a].emplace_back(r, b);
    } else {
      told[intern_concept(sub)].push_back(b);
    }
  }

 private:
  void resize() {
    told.resize(concept_iris.size());
    conj.resize(concept_iris.size());
    exists_rhs.resize(concept_iris.size());
    exists_lhs.resize(concept_iris.size());
  }
};

struct CompletionNode {
  std::vector<char> member;
  std::vector<int> concepts;
  std::vector<std::pair<int, int>> succ;  // (role, node)
  std::vector<std::pair<int, int>> pred;  // (role, node)

  bool has(int c) const {
    return c >= 0 && static_cast<std::size_t>(c) < member.size() && member[c];
  }
};

class Completion {
 public:
  Completion(const TBoxIndex& index, const Completion* base)
      : index_(&index), base_(base), offset_(base ? base->end_id() : 0) {}

  int end_id() const { return offset_ + static_cast<int>(nodes_.size()); }
  bool is_local(int id) const { return id >= offset_; }

  const CompletionNode& node(int id) const {
    return is_local(id) ? nodes_[id - offset_] : base_->node(id);
  }

  // New node whose S starts as {itself, Top}.
  int add_node() {
    int id = end_id();
    nodes_.emplace_back();
    add_concept(id, id);
    add_concept(id, kTopId);
    return id;
  }

  void add_concept(int x, int c) {
    CompletionNode& n = local(x);
    if (n.has(c)) return;
    if (static_cast<std::size_t>(c) >= n.member.size()) n.member.resize(c + 1, 0);
    n.member[c] = 1;
    n.concepts.push_back(c);
    concept_queue_.emplace_back(x, c);
  }

  void add_edge(int x, int r, int y) {
    CompletionNode& n = local(x);
    for (const auto& e : n.succ) {
      if (e.first == r && e.second == y) return;
    }
    n.succ.emplace_back(r, y);
    if (is_local(y)) local(y).pred.emplace_back(r, x);
    edge_queue_.push_back({x, r, y});
  }

  void saturate() {
    while (!concept_queue_.empty() || !edge_queue_.empty()) {
      while (!concept_queue_.empty()) {
        auto [x, c] = concept_queue_.front();
        concept_queue_.pop_front();
        process_concept(x, c);
      }
      if (!edge_queue_.empty()) {
        Edge e = edge_queue_.front();
        edge_queue_.pop_front();
        process_edge(e);
      }
    }
  }

 private:
  struct Edge {
    int from, role, to;
  };

  CompletionNode& local(int id) { return nodes_[id - offset_]; }

  bool indexed(int c) const { return static_cast<std::size_t>(c) < index_->size(); }

  void process_concept(int x, int c) {
    if (indexed(c)) {
      for (int b : index_->told[c]) add_concept(x, b);
      for (auto [other, b] : index_->conj[c]) {
        if (node(x).has(other)) add_concept(x, b);
      }
      for (auto [r, b] : index_->exists_rhs[c]) add_edge(x, r, b);
    }
    // Predecessors of x see the new concept through CR4/CR5.
    const auto preds = local(x).pred;
    for (auto [r, p] : preds) {
      if (c == kBottomId) add_concept(p, kBottomId);
      if (!indexed(c)) continue;
      for (auto [r2, b] : index_->exists_lhs[c]) {
        if (r2 == r) add_concept(p, b);
      }
    }
  }

  void process_edge(const Edge& e) {
    for (std::size_t i = 0; i < node(e.to).concepts.size(); ++i) {
      int c = node(e.to).concepts[i];
      if (c == kBottomId) add_concept(e.from, kBottomId);
      if (!indexed(c)) continue;
      for (auto [r2, b] : index_->exists_lhs[c]) {
        if (r2 == e.role) add_concept(e.from, b);
      }
    }
  }

  const TBoxIndex* index_;
  const Completion* base_;
  int offset_;
  std::vector<CompletionNode> nodes_;
  std::deque<std::pair<int, int>> concept_queue_;
  std::deque<Edge> edge_queue_;
};

}  // namespace detail

class Reasoner;

// Saturated canonical-model node for one class expression. Answers "does the
// expression entail D" for arbitrary D by evaluating D at the node.
class Description {
 public:
  bool satisfiable() const { return !overlay_->node(root_).has(detail::kBottomId); }

  bool entails(const ClassExpr& d) const {
    if (!satisfiable()) return true;
    return holds_at(root_, d);
  }

  // Named classes of the TBox (excluding normalization names) entailed by
  // the described expression. All TBox names when unsatisfiable.
  std::vector<std::string> named_supers() const;

 private:
  friend class Reasoner;

  Description(std::shared_ptr<const Reasoner> owner, std::unique_ptr<detail::Completion> overlay,
              std::unordered_map<std::string, int> local_names, int root)
      : owner_(std::move(owner)), overlay_(std::move(overlay)),
        local_names_(std::move(local_names)), root_(root) {}

  bool holds_at(int node, const ClassExpr& d) const;

  std::shared_ptr<const Reasoner> owner_;
  std::shared_ptr<const detail::Completion> overlay_;
  std::unordered_map<std::string, int> local_names_;
  int root_;
};

// Immutable after construction; safe to query from several threads.
class Reasoner : public std::enable_shared_from_this<Reasoner> {
 public:
  // Takes axioms already in normal form.
  // `names` are interned even when no axiom mentions them.
  static std::shared_ptr<const Reasoner> build(std::span<const Axiom> normalized,
                                               std::span<const std::string> names = {}) {
    return std::shared_ptr<const Reasoner>(new Reasoner(normalized, names));
  }

  bool consistent() const { return !base_->node(detail::kTopId).has(detail::kBottomId); }

  Description describe(const ClassExpr& c) const {
    auto overlay = std::make_unique<detail::Completion>(index_, base_.get());
    std::unordered_map<std::string, int> local_names;
    std::unordered_map<std::string, int> memo;
    int root = build_node(*overlay, local_names, memo, c);
    overlay->saturate();
    return Description(shared_from_this(), std::move(overlay), std::move(local_names), root);
  }

  bool subsumes(const ClassExpr& sub, const ClassExpr& sup) const {
    return describe(sub).entails(sup);
  }

  // Subsumption between two TBox concepts, read straight off the base.
  bool base_subsumes(int sub, int sup) const {
    const auto& n = base_->node(sub);
    return n.has(sup) || n.has(detail::kBottomId);
  }

  const detail::TBoxIndex& index() const { return index_; }
  const detail::Completion& base() const { return *base_; }

  bool is_user_name(int id) const {
    if (id < 2 || static_cast<std::size_t>(id) >= index_.size()) return false;
    return !detail::starts_with(index_.concept_iris[id], vocab::kNormPrefix);
  }

 private:
  Reasoner(std::span<const Axiom> normalized, std::span<const std::string> names) {
    for (const auto& n : names) index_.intern_concept(ClassExpr::named(n));
    for (const auto& ax : normalized) index_.add(ax);
    base_ = std::make_unique<detail::Completion>(index_, nullptr);
    for (std::size_t i = 0; i < index_.size(); ++i) base_->add_node();
    base_->saturate();
  }

  int concept_node(detail::Completion& overlay, std::unordered_map<std::string, int>& local_names,
                   const ClassExpr& e) const {
    if (auto id = index_.find_concept(e)) return *id;
    auto it = local_names.find(e.iri());
    if (it != local_names.end()) return it->second;
    int id = overlay.add_node();
    local_names.emplace(e.iri(), id);
    return id;
  }

  int role_id(std::unordered_map<std::string, int>& local_names, const std::string& iri) const {
    if (auto id = index_.find_role(iri)) return *id;
    // Unknown roles get ids past the TBox range so they never match an axiom.
    std::string key = "role:" + iri;
    auto it = local_names.find(key);
    if (it != local_names.end()) return it->second;
    int id = static_cast<int>(index_.role_iris.size() + local_names.size());
    local_names.emplace(key, id);
    return id;
  }

  int build_node(detail::Completion& overlay, std::unordered_map<std::string, int>& local_names,
                 std::unordered_map<std::string, int>& memo, const ClassExpr& e) const {
    if (detail::is_basic(e)) return concept_node(overlay, local_names, e);
    if (auto it = memo.find(e.str()); it != memo.end()) return it->second;
    int x = overlay.add_node();
    memo.emplace(e.str(), x);
    for (const auto& part : top_level_conjuncts(e)) {
      if (part.is_existential()) {
        int r = role_id(local_names, part.iri());
        int y = build_node(overlay, local_names, memo, part.filler());
        overlay.add_edge(x, r, y);
      } else {
        overlay.add_concept(x, concept_node(overlay, local_names, part));
      }
    }
    return x;
  }

  friend class Description;

  detail::TBoxIndex index_;
  std::unique_ptr<detail::Completion> base_;
};

inline bool Description::holds_at(int node, const ClassExpr& d) const {
  const auto& n = overlay_->node(node);
  if (n.has(detail::kBottomId)) return true;
  switch (d.kind()) {
    case ClassExpr::Kind::top:
      return true;
    case ClassExpr::Kind::bottom:
      return false;
    case ClassExpr::Kind::named: {
      if (auto id = owner_->index_.find_concept(d)) return n.has(*id);
      auto it = local_names_.find(d.iri());
      return it != local_names_.end() && n.has(it->second);
    }
    case ClassExpr::Kind::conjunction:
      for (const auto& part : d.conjuncts()) {
        if (!holds_at(node, part)) return false;
      }
      return true;
    case ClassExpr::Kind::existential: {
      std::optional<int> role = owner_->index_.find_role(d.iri());
      if (!role) {
        auto it = local_names_.find("role:" + d.iri());
        if (it == local_names_.end()) return false;
        role = it->second;
      }
      for (auto [r, y] : n.succ) {
        if (r == *role && holds_at(y, d.filler())) return true;
      }
      return false;
    }
  }
  return false;
}

inline std::vector<std::string> Description::named_supers() const {
  std::vector<std::string> out;
  const auto& n = overlay_->node(root_);
  bool unsat = n.has(detail::kBottomId);
  for (std::size_t id = 2; id < owner_->index_.size(); ++id) {
    if (!owner_->is_user_name(static_cast<int>(id))) continue;
    if (unsat || n.has(static_cast<int>(id))) out.push_back(owner_->index_.concept_iris[id]);
  }
  return out;
}

}  // namespace selfwire
