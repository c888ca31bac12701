#pragma once

// Classified named-class hierarchy and the ontology distance used to rank
// partial pipelines.

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "selfwire/ontology.hpp"

namespace selfwire {

class Hierarchy {
 public:
  // Equivalence groups, each sorted, ordered by first member.
  const std::vector<std::vector<std::string>>& groups() const noexcept { return groups_; }

  std::optional<std::size_t> group_of(const std::string& iri) const {
    auto it = group_index_.find(iri);
    if (it == group_index_.end()) return std::nullopt;
    return it->second;
  }

  // Direct super-groups of a group (transitive reduction).
  const std::set<std::size_t>& direct_super_groups(std::size_t g) const { return direct_super_[g]; }

  // Members of all direct super-groups of the class' group.
  std::set<std::string> direct_supers(const std::string& iri) const {
    std::set<std::string> out;
    if (auto g = group_of(iri)) {
      for (std::size_t s : direct_super_[*g]) out.insert(groups_[s].begin(), groups_[s].end());
    }
    return out;
  }

  // Undirected neighbours of a group in the direct-super graph.
  const std::vector<std::size_t>& neighbours(std::size_t g) const { return adjacent_[g]; }

  // Reflexive-transitive closure over the direct-super graph.
  bool reaches(const std::string& sub, const std::string& sup) const {
    auto from = group_of(sub);
    auto to = group_of(sup);
    if (!from || !to) return sub == sup;
    std::vector<char> seen(groups_.size(), 0);
    std::vector<std::size_t> stack{*from};
    while (!stack.empty()) {
      std::size_t g = stack.back();
      stack.pop_back();
      if (g == *to) return true;
      if (seen[g]) continue;
      seen[g] = 1;
      for (std::size_t s : direct_super_[g]) stack.push_back(s);
    }
    return false;
  }

 private:
  friend Hierarchy classify(const Ontology& onto);

  std::vector<std::vector<std::string>> groups_;
  std::map<std::string, std::size_t> group_index_;
  std::vector<std::set<std::size_t>> direct_super_;
  std::vector<std::vector<std::size_t>> adjacent_;
};

inline Hierarchy classify(const Ontology& onto) {
  const Reasoner& reasoner = onto.reasoner();
  std::vector<std::string> names(onto.named_classes().begin(), onto.named_classes().end());
  std::vector<int> ids;
  ids.reserve(names.size());
  for (const auto& n : names) ids.push_back(*reasoner.index().find_concept(ClassExpr::named(n)));

  const std::size_t n = names.size();
  auto sub = [&](std::size_t a, std::size_t b) { return reasoner.base_subsumes(ids[a], ids[b]); };

  Hierarchy h;
  std::vector<std::size_t> group(n, SIZE_MAX);
  for (std::size_t a = 0; a < n; ++a) {
    if (group[a] != SIZE_MAX) continue;
    group[a] = h.groups_.size();
    h.groups_.push_back({names[a]});
    for (std::size_t b = a + 1; b < n; ++b) {
      if (group[b] == SIZE_MAX && sub(a, b) && sub(b, a)) {
        group[b] = group[a];
        h.groups_.back().push_back(names[b]);
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) h.group_index_.emplace(names[a], group[a]);

  // Strict order between groups, read off representatives.
  const std::size_t g = h.groups_.size();
  std::vector<std::size_t> rep(g);
  for (std::size_t a = n; a-- > 0;) rep[group[a]] = a;
  std::vector<std::vector<char>> below(g, std::vector<char>(g, 0));
  for (std::size_t x = 0; x < g; ++x) {
    for (std::size_t y = 0; y < g; ++y) {
      if (x != y && sub(rep[x], rep[y])) below[x][y] = 1;
    }
  }
  h.direct_super_.assign(g, {});
  for (std::size_t x = 0; x < g; ++x) {
    for (std::size_t y = 0; y < g; ++y) {
      if (!below[x][y]) continue;
      bool direct = true;
      for (std::size_t z = 0; z < g && direct; ++z) {
        if (below[x][z] && below[z][y]) direct = false;
      }
      if (direct) h.direct_super_[x].insert(y);
    }
  }
  h.adjacent_.assign(g, {});
  for (std::size_t x = 0; x < g; ++x) {
    for (std::size_t y : h.direct_super_[x]) {
      h.adjacent_[x].push_back(y);
      h.adjacent_[y].push_back(x);
    }
  }
  return h;
}

// nullopt stands for an infinite distance.
using Distance = std::optional<std::size_t>;

// 0 when `from` ⊑ `to`; otherwise the shortest undirected path in the
// contracted hierarchy from any named superclass of `from` to `to`.
inline Distance distance(const Hierarchy& h, const Description& desc, const std::string& to) {
  if (desc.entails(ClassExpr::named(to))) return 0;
  auto target = h.group_of(to);
  if (!target) return std::nullopt;

  const std::size_t g = h.groups().size();
  std::vector<std::size_t> dist(g, SIZE_MAX);
  std::deque<std::size_t> queue;
  for (const auto& name : desc.named_supers()) {
    if (auto s = h.group_of(name); s && dist[*s] == SIZE_MAX) {
      dist[*s] = 0;
      queue.push_back(*s);
    }
  }
  while (!queue.empty()) {
    std::size_t x = queue.front();
    queue.pop_front();
    if (x == *target) return dist[x];
    for (std::size_t y : h.neighbours(x)) {
      if (dist[y] == SIZE_MAX) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
    }
  }
  return std::nullopt;
}

inline Distance distance(const Hierarchy& h, const Ontology& onto, const ClassExpr& from,
                         const std::string& to) {
  return distance(h, onto.reasoner().describe(from), to);
}

}  // namespace selfwire
