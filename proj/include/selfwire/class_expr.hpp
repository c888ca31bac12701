#pragma once

// Restricted OWL class expressions: Top, Bottom, named classes, intersections
// and existential restrictions, always held in canonical form.
//
// Textual grammar:
//   expr := 'owl:Thing' | 'owl:Nothing' | '<' IRI '>'
//         | '(and' expr+ ')' | '(some' '<' IRI '>' expr ')'
// Canonical serialization separates tokens with a single space.

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfwire/detail/text.hpp"
#include "selfwire/error.hpp"
#include "selfwire/iri.hpp"

namespace selfwire {

class ClassExpr {
 public:
  enum class Kind : std::uint8_t { top, bottom, named, conjunction, existential };

  ClassExpr() : kind_(Kind::top), text_("owl:Thing") {}

  static ClassExpr top() { return ClassExpr(); }

  static ClassExpr bottom() {
    ClassExpr e;
    e.kind_ = Kind::bottom;
    e.text_ = "owl:Nothing";
    return e;
  }

  static ClassExpr named(const Iri& iri) {
    ClassExpr e;
    e.kind_ = Kind::named;
    e.iri_ = iri.str();
    e.text_ = "<" + e.iri_ + ">";
    return e;
  }

  static ClassExpr named(std::string iri) { return named(Iri(std::move(iri))); }

  // Canonicalizes: flattens nested conjunctions, drops Top, collapses to
  // Bottom when any conjunct is Bottom, sorts by serialization and removes
  // duplicates. Zero conjuncts left means Top, one means that conjunct.
  static ClassExpr conjunction(std::vector<ClassExpr> parts) {
    std::vector<ClassExpr> flat;
    flat.reserve(parts.size());
    for (auto& p : parts) {
      switch (p.kind_) {
        case Kind::top:
          break;
        case Kind::bottom:
          return bottom();
        case Kind::conjunction:
          for (auto& q : p.args_) flat.push_back(std::move(q));
          break;
        default:
          flat.push_back(std::move(p));
      }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return top();
    if (flat.size() == 1) return std::move(flat.front());
    ClassExpr e;
    e.kind_ = Kind::conjunction;
    e.text_ = "(and";
    for (const auto& c : flat) {
      e.text_ += ' ';
      e.text_ += c.text_;
    }
    e.text_ += ')';
    e.args_ = std::move(flat);
    return e;
  }

  static ClassExpr conjunction(ClassExpr a, ClassExpr b) {
    std::vector<ClassExpr> v;
    v.push_back(std::move(a));
    v.push_back(std::move(b));
    return conjunction(std::move(v));
  }

  static ClassExpr exists(const Iri& role, ClassExpr filler) {
    ClassExpr e;
    e.kind_ = Kind::existential;
    e.iri_ = role.str();
    e.text_ = "(some <" + e.iri_ + "> " + filler.text_ + ")";
    e.args_.push_back(std::move(filler));
    return e;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_top() const noexcept { return kind_ == Kind::top; }
  bool is_bottom() const noexcept { return kind_ == Kind::bottom; }
  bool is_named() const noexcept { return kind_ == Kind::named; }
  bool is_conjunction() const noexcept { return kind_ == Kind::conjunction; }
  bool is_existential() const noexcept { return kind_ == Kind::existential; }

  // Class IRI for named expressions, role IRI for existentials.
  const std::string& iri() const noexcept { return iri_; }
  const ClassExpr& filler() const { return args_.front(); }
  std::span<const ClassExpr> conjuncts() const noexcept { return args_; }

  // Canonical serialization.
  const std::string& str() const noexcept { return text_; }

  friend bool operator==(const ClassExpr& a, const ClassExpr& b) { return a.text_ == b.text_; }
  friend std::strong_ordering operator<=>(const ClassExpr& a, const ClassExpr& b) {
    return a.text_.compare(b.text_) <=> 0;
  }

 private:
  Kind kind_;
  std::string iri_;
  std::vector<ClassExpr> args_;
  std::string text_;
};

// Top-level conjuncts: empty for Top, the parts of a conjunction, otherwise
// the expression itself.
inline std::vector<ClassExpr> top_level_conjuncts(const ClassExpr& e) {
  if (e.is_top()) return {};
  if (e.is_conjunction()) return {e.conjuncts().begin(), e.conjuncts().end()};
  return {e};
}

namespace detail {

// Recursive-descent reader over a shared buffer; also used by the ontology
// document parser, which embeds expressions inside axiom lines.
class ExprReader {
 public:
  ExprReader(std::string_view text, std::size_t base_offset = 0)
      : text_(text), base_(base_offset) {}

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }

  void skip_space() {
    while (!at_end() && is_space(text_[pos_])) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, base_ + pos_); }
  [[noreturn]] void fail_at(const std::string& what, std::size_t at) const {
    throw ParseError(what, base_ + at);
  }

  bool consume(std::string_view token) {
    if (text_.substr(pos_, token.size()) == token) {
      pos_ += token.size();
      return true;
    }
    return false;
  }

  // Requires whitespace or a delimiter after a keyword.
  bool consume_keyword(std::string_view kw) {
    if (text_.substr(pos_, kw.size()) != kw) return false;
    std::size_t after = pos_ + kw.size();
    if (after < text_.size() && !is_space(text_[after]) && text_[after] != '(' &&
        text_[after] != ')' && text_[after] != '<') {
      return false;
    }
    pos_ = after;
    return true;
  }

  Iri read_iri() {
    std::size_t start = pos_;
    if (!consume("<")) fail("expected '<'");
    std::string value;
    while (true) {
      if (at_end()) fail_at("unterminated IRI", start);
      char c = text_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '\\') {
        std::size_t esc = pos_;
        char kind = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
        std::size_t digits = kind == 'u' ? 4 : kind == 'U' ? 8 : 0;
        if (digits == 0) fail_at("unknown escape", esc);
        auto cp = parse_hex(text_, pos_ + 2, digits);
        if (!cp) fail_at("malformed \\" + std::string(1, kind) + " escape", esc);
        append_utf8(value, *cp);
        pos_ += 2 + digits;
        continue;
      }
      if (is_forbidden_iri_char(static_cast<unsigned char>(c))) {
        fail("illegal character in IRI");
      }
      value += c;
      ++pos_;
    }
    if (!Iri::valid(value)) fail_at("invalid IRI '" + value + "'", start);
    return Iri(std::move(value));
  }

  ClassExpr read_expr() {
    skip_space();
    if (at_end()) fail("unexpected end of input, expected expression");
    char c = peek();
    if (c == '<') return ClassExpr::named(read_iri());
    if (c == ')') fail("unbalanced parentheses");
    if (c == '(') {
      std::size_t open = pos_;
      ++pos_;
      skip_space();
      if (consume_keyword("and")) {
        std::vector<ClassExpr> parts;
        while (true) {
          skip_space();
          if (at_end()) fail_at("unbalanced parentheses", open);
          if (peek() == ')') break;
          parts.push_back(read_expr());
        }
        if (parts.empty()) fail("'and' requires at least one operand");
        ++pos_;
        return ClassExpr::conjunction(std::move(parts));
      }
      if (consume_keyword("some")) {
        skip_space();
        Iri role = read_iri();
        ClassExpr filler = read_expr();
        skip_space();
        if (at_end()) fail_at("unbalanced parentheses", open);
        if (!consume(")")) fail("expected ')' closing 'some'");
        return ClassExpr::exists(role, std::move(filler));
      }
      fail("expected 'and' or 'some'");
    }
    if (consume_keyword("owl:Thing")) return ClassExpr::top();
    if (consume_keyword("owl:Nothing")) return ClassExpr::bottom();
    fail("unexpected character");
  }

 private:
  std::string_view text_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parses one expression; surrounding whitespace is allowed, anything else
// after the expression is an error.
inline ClassExpr parse_class_expr(std::string_view text) {
  detail::ExprReader reader(text);
  ClassExpr e = reader.read_expr();
  reader.skip_space();
  if (!reader.at_end()) {
    if (reader.peek() == ')') reader.fail("unbalanced parentheses");
    reader.fail("trailing input after expression");
  }
  return e;
}

// Subsumption axiom sub ⊑ sup.
struct Axiom {
  ClassExpr sub;
  ClassExpr sup;

  std::string str() const { return "(" + sub.str() + " <= " + sup.str() + ")"; }

  friend bool operator==(const Axiom&, const Axiom&) = default;
  friend auto operator<=>(const Axiom&, const Axiom&) = default;
};

}  // namespace selfwire
