#pragma once

// Minimal RDF terms, triples and an N-Triples codec.
//
// Accepted subset: IRIREF (with \u/\U escapes), blank node labels, string
// literals in double quotes with \" \\ \n \r \t \u \U escapes, optional
// ^^<datatype> or @lang. `#` comment lines and blank lines are skipped.
// Serialization is canonical: one triple per line, lines sorted bytewise,
// every line terminated by " .\n".

#include <algorithm>
#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "selfwire/detail/text.hpp"
#include "selfwire/error.hpp"
#include "selfwire/iri.hpp"

namespace selfwire {

class NTriplesError : public Error {
 public:
  NTriplesError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " at line " + std::to_string(line) + ", column " + std::to_string(column)),
        line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class InvalidTerm : public Error {
 public:
  using Error::Error;
};

// Blank labels start alphanumeric and continue with alphanumerics or '_'
// (the underscore is what invocation-id standardization appends).
inline bool valid_blank_label(std::string_view label) {
  if (label.empty() || !detail::is_alnum(label.front())) return false;
  return std::all_of(label.begin(), label.end(),
                     [](char c) { return detail::is_alnum(c) || c == '_'; });
}

inline bool valid_lang_tag(std::string_view tag) {
  if (tag.empty()) return false;
  bool first = true;
  std::size_t run = 0;
  for (char c : tag) {
    if (c == '-') {
      if (run == 0) return false;
      run = 0;
      first = false;
      continue;
    }
    bool alpha = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    bool digit = c >= '0' && c <= '9';
    if (!(alpha || (!first && digit))) return false;
    ++run;
  }
  return run > 0;
}

class Term {
 public:
  enum class Kind : std::uint8_t { iri, blank, literal };

  static Term iri(const Iri& iri) { return Term(Kind::iri, iri.str(), {}, {}); }
  static Term iri(std::string value) { return iri(Iri(std::move(value))); }

  static Term blank(std::string label) {
    if (!valid_blank_label(label)) throw InvalidTerm("invalid blank node label '" + label + "'");
    return Term(Kind::blank, std::move(label), {}, {});
  }

  static Term literal(std::string lexical, const Iri& datatype = Iri(std::string(vocab::kXsdString))) {
    if (datatype.str() == vocab::kRdfLangString) {
      throw InvalidTerm("rdf:langString literal requires a language tag");
    }
    return Term(Kind::literal, std::move(lexical), datatype.str(), {});
  }

  static Term lang_literal(std::string lexical, std::string lang) {
    if (!valid_lang_tag(lang)) throw InvalidTerm("invalid language tag '" + lang + "'");
    return Term(Kind::literal, std::move(lexical), std::string(vocab::kRdfLangString),
                std::move(lang));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_iri() const noexcept { return kind_ == Kind::iri; }
  bool is_blank() const noexcept { return kind_ == Kind::blank; }
  bool is_literal() const noexcept { return kind_ == Kind::literal; }

  // IRI string, blank label, or literal lexical form.
  const std::string& value() const noexcept { return value_; }
  const std::string& datatype() const noexcept { return datatype_; }
  const std::string& lang() const noexcept { return lang_; }

  std::string str() const {
    switch (kind_) {
      case Kind::iri:
        return "<" + value_ + ">";
      case Kind::blank:
        return "_:" + value_;
      case Kind::literal: {
        std::string out = "\"" + escape_literal(value_) + "\"";
        if (!lang_.empty()) {
          out += "@" + lang_;
        } else if (datatype_ != vocab::kXsdString) {
          out += "^^<" + datatype_ + ">";
        }
        return out;
      }
    }
    return {};
  }

  friend bool operator==(const Term&, const Term&) = default;
  friend auto operator<=>(const Term&, const Term&) = default;

 private:
  Term(Kind kind, std::string value, std::string datatype, std::string lang)
      : kind_(kind), value_(std::move(value)), datatype_(std::move(datatype)),
        lang_(std::move(lang)) {}

  static std::string escape_literal(const std::string& v) {
    std::string out;
    out.reserve(v.size());
    for (char c : v) {
      switch (c) {
        case '"': out += "\\\""; break;
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        default: out += c;
      }
    }
    return out;
  }

  Kind kind_;
  std::string value_;
  std::string datatype_;
  std::string lang_;
};

struct Triple {
  Term s;
  Term p;
  Term o;

  Triple(Term subject, Term predicate, Term object)
      : s(std::move(subject)), p(std::move(predicate)), o(std::move(object)) {
    if (s.is_literal()) throw InvalidTerm("literal in subject position");
    if (!p.is_iri()) throw InvalidTerm("predicate must be an IRI");
  }

  std::string str() const { return s.str() + " " + p.str() + " " + o.str() + " ."; }

  friend bool operator==(const Triple&, const Triple&) = default;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

using Graph = std::set<Triple>;

namespace detail {

class NTriplesReader {
 public:
  explicit NTriplesReader(std::string_view text) : text_(text) {}

  Graph read() {
    Graph out;
    while (pos_ < text_.size()) {
      skip_inline_space();
      if (pos_ >= text_.size()) break;
      char c = text_[pos_];
      if (c == '\n' || c == '\r') {
        newline();
        continue;
      }
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r') ++pos_;
        continue;
      }
      out.insert(triple());
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw NTriplesError(what, line_, pos_ - line_start_ + 1);
  }

  void newline() {
    if (text_[pos_] == '\r' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '\n') ++pos_;
    ++pos_;
    ++line_;
    line_start_ = pos_;
  }

  void skip_inline_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  Triple triple() {
    Term s = subject();
    skip_inline_space();
    if (peek() != '<') fail("expected predicate IRI");
    Term p = Term::iri(iri());
    skip_inline_space();
    Term o = object();
    skip_inline_space();
    if (peek() != '.') fail("missing terminal '.'");
    ++pos_;
    skip_inline_space();
    if (peek() == '#') {
      while (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r') ++pos_;
    }
    if (pos_ < text_.size() && text_[pos_] != '\n' && text_[pos_] != '\r') {
      fail("unexpected content after '.'");
    }
    return Triple(std::move(s), std::move(p), std::move(o));
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  Term subject() {
    char c = peek();
    if (c == '<') return Term::iri(iri());
    if (c == '_') return blank();
    if (c == '"') fail("literal in subject position");
    fail("expected subject");
  }

  Term object() {
    char c = peek();
    if (c == '<') return Term::iri(iri());
    if (c == '_') return blank();
    if (c == '"') return literal();
    fail("expected object");
  }

  Iri iri() {
    std::size_t start = pos_;
    ++pos_;  // '<'
    std::string value;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n' || text_[pos_] == '\r') {
        pos_ = start;
        fail("unterminated IRI");
      }
      char c = text_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '\\') {
        char kind = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
        std::size_t digits = kind == 'u' ? 4 : kind == 'U' ? 8 : 0;
        if (digits == 0) fail("unknown escape in IRI");
        auto cp = parse_hex(text_, pos_ + 2, digits);
        if (!cp) fail("malformed escape in IRI");
        append_utf8(value, *cp);
        pos_ += 2 + digits;
        continue;
      }
      if (is_forbidden_iri_char(static_cast<unsigned char>(c))) fail("malformed IRI");
      value += c;
      ++pos_;
    }
    if (!Iri::valid(value)) {
      pos_ = start;
      fail("malformed IRI '" + value + "'");
    }
    return Iri(std::move(value));
  }

  Term blank() {
    if (text_.substr(pos_, 2) != "_:") fail("expected blank node label");
    pos_ += 2;
    std::size_t start = pos_;
    while (pos_ < text_.size() && (is_alnum(text_[pos_]) || text_[pos_] == '_')) ++pos_;
    std::string label(text_.substr(start, pos_ - start));
    if (!valid_blank_label(label)) {
      pos_ = start;
      fail("malformed blank node label");
    }
    return Term::blank(std::move(label));
  }

  Term literal() {
    std::size_t start = pos_;
    ++pos_;  // opening quote
    std::string lexical;
    while (true) {
      if (pos_ >= text_.size() || text_[pos_] == '\n' || text_[pos_] == '\r') {
        pos_ = start;
        fail("unterminated literal");
      }
      char c = text_[pos_];
      if (c == '"') {
        ++pos_;
        break;
      }
      if (c == '\\') {
        char e = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
        switch (e) {
          case '"': lexical += '"'; break;
          case '\\': lexical += '\\'; break;
          case 'n': lexical += '\n'; break;
          case 'r': lexical += '\r'; break;
          case 't': lexical += '\t'; break;
          case 'u':
          case 'U': {
            std::size_t digits = e == 'u' ? 4 : 8;
            auto cp = parse_hex(text_, pos_ + 2, digits);
            if (!cp) fail("malformed escape in literal");
            append_utf8(lexical, *cp);
            pos_ += 2 + digits;
            continue;
          }
          default: fail("unknown escape in literal");
        }
        pos_ += 2;
        continue;
      }
      lexical += c;
      ++pos_;
    }
    if (peek() == '@') {
      ++pos_;
      std::size_t tag_start = pos_;
      while (pos_ < text_.size() && (is_alnum(text_[pos_]) || text_[pos_] == '-')) ++pos_;
      std::string tag(text_.substr(tag_start, pos_ - tag_start));
      if (!valid_lang_tag(tag)) {
        pos_ = tag_start;
        fail("malformed language tag");
      }
      return Term::lang_literal(std::move(lexical), std::move(tag));
    }
    if (text_.substr(pos_, 2) == "^^") {
      pos_ += 2;
      if (peek() != '<') fail("expected datatype IRI");
      Iri dt = iri();
      if (dt.str() == vocab::kRdfLangString) fail("rdf:langString requires a language tag");
      return Term::literal(std::move(lexical), dt);
    }
    return Term::literal(std::move(lexical));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

}  // namespace detail

inline Graph parse_ntriples(std::string_view text) { return detail::NTriplesReader(text).read(); }

inline std::string serialize_ntriples(const Graph& graph) {
  std::vector<std::string> lines;
  lines.reserve(graph.size());
  for (const auto& t : graph) lines.push_back(t.str());
  std::sort(lines.begin(), lines.end());
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace selfwire
