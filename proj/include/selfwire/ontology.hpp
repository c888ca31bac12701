#pragma once

// Terminological knowledge base and its document format: one axiom per line
// written `(sub <= sup)`, `#` starts a comment line, blank lines ignored.
// A comment of the form `# @ontology <iri>` names the ontology.

#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "selfwire/class_expr.hpp"
#include "selfwire/normalize.hpp"
#include "selfwire/reasoner.hpp"

namespace selfwire {

class Ontology {
 public:
  // Empty ontology.
  Ontology() : Ontology(Iri("urn:selfwire:ontology#empty"), {}) {}

  // Validates and classifies. Throws InconsistentOntology when Top ⊑ Bottom
  // is entailed, and Error when a reserved normalization name is used.
  Ontology(Iri iri, std::set<Axiom> axioms) : iri_(std::move(iri)), axioms_(std::move(axioms)) {
    for (const auto& ax : axioms_) {
      collect(ax.sub);
      collect(ax.sup);
    }
    std::vector<Axiom> flat(axioms_.begin(), axioms_.end());
    auto normalized = detail::normalize(flat);
    std::vector<std::string> names(named_.begin(), named_.end());
    reasoner_ = Reasoner::build(std::vector<Axiom>(normalized.begin(), normalized.end()), names);
    if (!reasoner_->consistent()) {
      throw InconsistentOntology("ontology " + iri_.str() + " is inconsistent (owl:Thing <= owl:Nothing)");
    }
  }

  static Ontology merge(std::span<const Ontology> parts, Iri iri) {
    std::set<Axiom> all;
    for (const auto& p : parts) all.insert(p.axioms_.begin(), p.axioms_.end());
    return Ontology(std::move(iri), std::move(all));
  }

  const Iri& iri() const noexcept { return iri_; }
  const std::set<Axiom>& axioms() const noexcept { return axioms_; }
  const std::set<std::string>& named_classes() const noexcept { return named_; }
  const std::set<std::string>& roles() const noexcept { return roles_; }
  const Reasoner& reasoner() const noexcept { return *reasoner_; }

  // Document text, one canonical axiom per line.
  std::string str() const {
    std::string out = "# @ontology <" + iri_.str() + ">\n";
    for (const auto& ax : axioms_) out += ax.str() + "\n";
    return out;
  }

  friend bool operator==(const Ontology& a, const Ontology& b) {
    return a.iri_ == b.iri_ && a.axioms_ == b.axioms_;
  }

 private:
  void collect(const ClassExpr& e) {
    switch (e.kind()) {
      case ClassExpr::Kind::named:
        if (detail::starts_with(e.iri(), vocab::kNormPrefix)) {
          throw Error("reserved IRI prefix used in ontology: " + e.iri());
        }
        named_.insert(e.iri());
        break;
      case ClassExpr::Kind::existential:
        roles_.insert(e.iri());
        collect(e.filler());
        break;
      case ClassExpr::Kind::conjunction:
        for (const auto& c : e.conjuncts()) collect(c);
        break;
      default:
        break;
    }
  }

  Iri iri_;
  std::set<Axiom> axioms_;
  std::set<std::string> named_;
  std::set<std::string> roles_;
  std::shared_ptr<const Reasoner> reasoner_;
};

// Parses an ontology document. Offsets in errors are relative to `text`.
inline Ontology parse_ontology(std::string_view text, Iri default_iri) {
  std::set<Axiom> axioms;
  std::optional<Iri> named;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);
    std::size_t first = 0;
    while (first < line.size() && detail::is_space(line[first])) ++first;
    if (first < line.size()) {
      if (line[first] == '#') {
        std::string_view rest = line.substr(first + 1);
        while (!rest.empty() && detail::is_space(rest.front())) rest.remove_prefix(1);
        constexpr std::string_view kDirective = "@ontology";
        if (detail::starts_with(rest, kDirective)) {
          detail::ExprReader reader(rest.substr(kDirective.size()),
                                    line_start + (rest.data() - line.data()) + kDirective.size());
          reader.skip_space();
          named = reader.read_iri();
        }
      } else {
        detail::ExprReader reader(line, line_start);
        reader.skip_space();
        if (!reader.consume("(")) reader.fail("expected '(' starting an axiom");
        ClassExpr sub = reader.read_expr();
        reader.skip_space();
        if (!reader.consume("<=")) reader.fail("expected '<='");
        ClassExpr sup = reader.read_expr();
        reader.skip_space();
        if (!reader.consume(")")) reader.fail("unbalanced parentheses");
        reader.skip_space();
        if (!reader.at_end()) reader.fail("trailing input after axiom");
        axioms.insert(Axiom{std::move(sub), std::move(sup)});
      }
    }
    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return Ontology(named ? *named : std::move(default_iri), std::move(axioms));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Ontology load_ontology(const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  try {
    return parse_ontology(text, Iri("urn:selfwire:ontology#" + path.stem().string()));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.message(), e.offset());
  }
}

// EL normal forms of the ontology's axioms. Fresh names use the reserved
// urn:selfwire:norm# prefix.
inline std::set<Axiom> normalize_tbox(const Ontology& onto) {
  std::vector<Axiom> flat(onto.axioms().begin(), onto.axioms().end());
  return detail::normalize(flat);
}

inline bool subsumes(const Ontology& onto, const ClassExpr& sub, const ClassExpr& sup) {
  return onto.reasoner().subsumes(sub, sup);
}

}  // namespace selfwire
