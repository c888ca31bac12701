#pragma once

// Seeded random RDF graphs exercising every term shape the codec accepts.

#include <random>
#include <string>

#include "selfwire/rdf.hpp"

namespace selfwire::test_support {

class RandomRdf {
 public:
  explicit RandomRdf(std::uint64_t seed) : rng_(seed) {}

  Graph graph(int max_triples = 12) {
    Graph g;
    int n = uniform(0, max_triples);
    for (int i = 0; i < n; ++i) g.insert(triple());
    return g;
  }

  Triple triple() {
    Term s = chance(0.3) ? blank() : iri();
    Term p = iri();
    double q = unit();
    Term o = q < 0.3 ? iri() : q < 0.5 ? blank() : literal();
    return Triple(std::move(s), std::move(p), std::move(o));
  }

  Term iri() {
    static const char* kBases[] = {"urn:x#", "http://example.org/", "urn:qa#", "https://e.x/a?b=c&d="};
    std::string v = kBases[uniform(0, 3)];
    v += "n" + std::to_string(uniform(0, 6));
    if (chance(0.1)) v += "\xC3\xA9";  // non-ASCII, written raw
    return Term::iri(std::move(v));
  }

  Term blank() {
    std::string label = "b" + std::to_string(uniform(0, 5));
    if (chance(0.2)) label += "_i" + std::to_string(uniform(0, 3));
    return Term::blank(std::move(label));
  }

  Term literal() {
    static const char kAlphabet[] = "ab \"\\\n\r\tz#.<>@^_";
    std::string lexical;
    int len = uniform(0, 8);
    for (int i = 0; i < len; ++i) lexical += kAlphabet[uniform(0, sizeof(kAlphabet) - 2)];
    double q = unit();
    if (q < 0.2) return Term::lang_literal(std::move(lexical), chance(0.5) ? "en" : "de-CH");
    if (q < 0.4) return Term::literal(std::move(lexical), Iri(std::string(vocab::kXsdInteger)));
    return Term::literal(std::move(lexical));
  }

  int uniform(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double unit() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  bool chance(double p) { return unit() < p; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace selfwire::test_support
