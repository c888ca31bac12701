#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>

#include "selfwire/error.hpp"

namespace selfwire {

namespace vocab {
inline constexpr std::string_view kRdfType = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
inline constexpr std::string_view kRdfLangString = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
inline constexpr std::string_view kXsdString = "http://www.w3.org/2001/XMLSchema#string";
inline constexpr std::string_view kXsdInteger = "http://www.w3.org/2001/XMLSchema#integer";
inline constexpr std::string_view kQaQuestion = "urn:qa#Question";
inline constexpr std::string_view kQaAnswer = "urn:qa#Answer";
inline constexpr std::string_view kQaText = "urn:qa#text";
inline constexpr std::string_view kProcessedBy = "urn:selfwire#processedBy";
inline constexpr std::string_view kStep = "urn:selfwire#step";
inline constexpr std::string_view kModulePrefix = "urn:selfwire:module#";
// Names invented by TBox normalization. Never accepted from user input.
inline constexpr std::string_view kNormPrefix = "urn:selfwire:norm#";
}  // namespace vocab

// Characters that may not appear unescaped inside an IRIREF.
inline bool is_forbidden_iri_char(unsigned char c) {
  if (c <= 0x20) return true;
  switch (c) {
    case '<': case '>': case '"': case '{': case '}':
    case '|': case '^': case '`': case '\\':
      return true;
    default:
      return false;
  }
}

class InvalidIri : public Error {
 public:
  using Error::Error;
};

// Absolute IRI. Equality is exact byte equality.
class Iri {
 public:
  explicit Iri(std::string value) : value_(std::move(value)) {
    if (auto why = problem(value_); !why.empty()) {
      throw InvalidIri("invalid IRI '" + value_ + "': " + why);
    }
  }

  static bool valid(std::string_view v) { return problem(v).empty(); }

  const std::string& str() const noexcept { return value_; }

  friend bool operator==(const Iri&, const Iri&) = default;
  friend auto operator<=>(const Iri&, const Iri&) = default;

 private:
  static std::string problem(std::string_view v) {
    if (v.empty()) return "empty";
    if (v.find(':') == std::string_view::npos) return "missing scheme separator ':'";
    for (unsigned char c : v) {
      if (is_forbidden_iri_char(c)) return "forbidden character";
    }
    return {};
  }

  std::string value_;
};

}  // namespace selfwire

template <>
struct std::hash<selfwire::Iri> {
  std::size_t operator()(const selfwire::Iri& iri) const noexcept {
    return std::hash<std::string>{}(iri.str());
  }
};
