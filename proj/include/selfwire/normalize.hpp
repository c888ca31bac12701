#pragma once

// EL normalization. Every produced axiom has one of the shapes
//   A ⊑ B,  A1 ⊓ A2 ⊑ B,  A ⊑ ∃r.B,  ∃r.A ⊑ B
// where A, B are named classes, Top or Bottom. Complex subexpressions are
// replaced by fresh names F with F ≡ subexpression, which keeps the result a
// conservative extension of the input.

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "selfwire/class_expr.hpp"

namespace selfwire::detail {

inline bool is_basic(const ClassExpr& e) {
  return e.is_top() || e.is_bottom() || e.is_named();
}

class Normalizer {
 public:
  std::set<Axiom> run(std::span<const Axiom> axioms) {
    for (const auto& ax : axioms) add(ax.sub, ax.sup);
    return std::move(out_);
  }

 private:
  void emit(ClassExpr sub, ClassExpr sup) { out_.insert(Axiom{std::move(sub), std::move(sup)}); }

  void add(const ClassExpr& sub, const ClassExpr& sup) {
    if (sub.is_bottom() || sup.is_top()) return;
    if (sup.is_conjunction()) {
      for (const auto& part : sup.conjuncts()) add(sub, part);
      return;
    }
    ClassExpr lhs = lhs_form(sub);
    if (is_basic(sup)) {
      emit(std::move(lhs), sup);
      return;
    }
    // sup is ∃r.F
    ClassExpr rhs = ClassExpr::exists(Iri(sup.iri()), name(sup.filler()));
    if (is_basic(lhs)) {
      emit(std::move(lhs), std::move(rhs));
    } else {
      ClassExpr mid = name(sub);
      emit(std::move(lhs), mid);
      emit(mid, std::move(rhs));
    }
  }

  // Left-hand side in normal shape: basic, binary conjunction of basics, or
  // an existential over a basic filler.
  ClassExpr lhs_form(const ClassExpr& e) {
    switch (e.kind()) {
      case ClassExpr::Kind::existential:
        return ClassExpr::exists(Iri(e.iri()), name(e.filler()));
      case ClassExpr::Kind::conjunction: {
        auto parts = e.conjuncts();
        if (parts.size() == 2) return ClassExpr::conjunction(name(parts[0]), name(parts[1]));
        std::vector<ClassExpr> head(parts.begin(), parts.end() - 1);
        return ClassExpr::conjunction(name(ClassExpr::conjunction(std::move(head))),
                                      name(parts.back()));
      }
      default:
        return e;
    }
  }

  // Basic concept equivalent to e; introduces a definition on first use.
  ClassExpr name(const ClassExpr& e) {
    if (is_basic(e)) return e;
    if (auto it = names_.find(e.str()); it != names_.end()) return it->second;
    ClassExpr fresh = ClassExpr::named(std::string(vocab::kNormPrefix) + "N" +
                                       std::to_string(names_.size() + 1));
    names_.emplace(e.str(), fresh);
    add(fresh, e);
    add(e, fresh);
    return fresh;
  }

  std::map<std::string, ClassExpr> names_;
  std::set<Axiom> out_;
};

inline std::set<Axiom> normalize(std::span<const Axiom> axioms) {
  return Normalizer{}.run(axioms);
}

}  // namespace selfwire::detail
