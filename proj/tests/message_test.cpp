#include <random>

#include <gtest/gtest.h>

#include "selfwire/message.hpp"
#include "support/model_oracle.hpp"
#include "support/random_el.hpp"
#include "support/random_rdf.hpp"

using namespace selfwire;

namespace {

const Term kType = Term::iri(std::string(vocab::kRdfType));

Term I(std::string v) { return Term::iri(std::move(v)); }
ClassExpr E(std::string_view text) { return parse_class_expr(text); }
Ontology onto(std::string_view text) { return parse_ontology(text, Iri("urn:test#o")); }

Message question(Graph extra = {}) {
  extra.emplace(I("urn:q1"), kType, I("urn:qa#Question"));
  return Message(std::move(extra), Iri("urn:q1"));
}

std::size_t count_blanks(const Graph& g) {
  std::set<std::string> labels;
  for (const auto& t : g) {
    if (t.s.is_blank()) labels.insert(t.s.value());
    if (t.o.is_blank()) labels.insert(t.o.value());
  }
  return labels.size();
}

// Random DAG-shaped ABox over the generator's signature. Edges run from
// lower to higher node index so every node has a finite roll-up.
struct RandomAbox {
  Graph graph;
  std::vector<Term> nodes;
};

RandomAbox random_abox(test_support::RandomEl& gen, int roles) {
  RandomAbox out;
  int n = gen.uniform(1, 5);
  for (int i = 0; i < n; ++i) {
    out.nodes.push_back(i % 2 ? Term::blank("n" + std::to_string(i)) : I("urn:g#n" + std::to_string(i)));
  }
  for (int i = 0; i < n; ++i) {
    int k = gen.uniform(0, 2);
    for (int j = 0; j < k; ++j) out.graph.emplace(out.nodes[i], kType, I(gen.name().iri()));
    if (gen.chance(0.2)) out.graph.emplace(out.nodes[i], kType, I("urn:other#Unknown"));
    if (gen.chance(0.3)) out.graph.emplace(out.nodes[i], I("urn:qa#text"), Term::literal("t"));
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (!gen.chance(0.4)) continue;
      std::string role = roles > 0 && gen.chance(0.85) ? gen.role().str() : "urn:other#rel";
      out.graph.emplace(out.nodes[i], I(role), out.nodes[j]);
    }
  }
  return out;
}

ClassExpr roll_up(const Graph& g, const Term& x) {
  std::vector<ClassExpr> parts;
  for (const auto& t : g) {
    if (t.s != x || t.o.is_literal()) continue;
    if (t.p == kType) {
      if (t.o.is_iri()) parts.push_back(ClassExpr::named(t.o.value()));
    } else {
      parts.push_back(ClassExpr::exists(Iri(t.p.value()), roll_up(g, t.o)));
    }
  }
  return ClassExpr::conjunction(std::move(parts));
}

}  // namespace

TEST(Merge, EmptyDeltaIsIdentity) {
  Message m = question();
  EXPECT_EQ(merge(m, Delta{}, "i1"), m);
}

TEST(Merge, RenamesDeltaBlankNodes) {
  Message m = question();
  Delta d{{Triple(Term::blank("x"), I("urn:p"), Term::literal("v"))}};
  Message out = merge(m, d, "i2");
  EXPECT_TRUE(out.graph().count(Triple(Term::blank("x_i2"), I("urn:p"), Term::literal("v"))));
  EXPECT_EQ(out.graph().size(), 2u);
  EXPECT_EQ(out.focus(), m.focus());
  EXPECT_EQ(out.conforms_to(), m.conforms_to());
}

TEST(Merge, SameDeltaTwiceGivesDistinctBlanks) {
  Delta d{{Triple(I("urn:q1"), I("urn:p"), Term::blank("x")), Triple(Term::blank("x"), kType, I("urn:A"))}};
  Message once = merge(question(), d, "a");
  Message twice = merge(once, d, "b");
  EXPECT_EQ(count_blanks(once.graph()), 1u);
  EXPECT_EQ(count_blanks(twice.graph()), 2u);
  EXPECT_EQ(twice.graph().size(), 5u);
}

TEST(Merge, RejectsInvalidInvocationId) {
  EXPECT_THROW(merge(question(), Delta{}, ""), Error);
  EXPECT_THROW(merge(question(), Delta{}, "a-b"), Error);
}

TEST(Message, RequiresTripleAboutFocus) {
  EXPECT_THROW(Message(Graph{}, Iri("urn:q1")), Error);
  EXPECT_THROW(Message(Graph{Triple(I("urn:other"), kType, I("urn:A"))}, Iri("urn:q1")), Error);
}

TEST(MergeProperty, MonotoneAndOrderIndependent) {
  test_support::RandomRdf gen(13);
  for (int i = 0; i < 300; ++i) {
    Message m = question(gen.graph(4));
    Delta d1{gen.graph(5)};
    Delta d2{gen.graph(5)};
    Message ab = merge(merge(m, d1, "a"), d2, "b");
    Message ba = merge(merge(m, d2, "b"), d1, "a");
    EXPECT_TRUE(std::includes(ab.graph().begin(), ab.graph().end(), m.graph().begin(), m.graph().end()));
    EXPECT_EQ(ab, ba);
    Graph want = m.graph();
    for (const auto* d : {&d1, &d2}) {
      const char* suffix = d == &d1 ? "_a" : "_b";
      auto rename = [&](const Term& t) { return t.is_blank() ? Term::blank(t.value() + suffix) : t; };
      for (const auto& t : d->graph) want.emplace(rename(t.s), t.p, rename(t.o));
    }
    EXPECT_EQ(ab.graph(), want);
  }
}

TEST(SaturateTypes, ToldSubsumption) {
  Graph g{Triple(I("urn:q"), kType, I("urn:A"))};
  TypeMap t = saturate_types(g, onto("(<urn:A> <= <urn:B>)\n"));
  ASSERT_TRUE(t.count(I("urn:q")));
  EXPECT_EQ(t[I("urn:q")], (std::set<std::string>{"urn:A", "urn:B"}));
}

TEST(SaturateTypes, EmptyGraph) { EXPECT_TRUE(saturate_types({}, onto("(<urn:A> <= <urn:B>)\n")).empty()); }

TEST(SaturateTypes, ExistentialChain) {
  const char* tbox = "((some <urn:r> <urn:A>) <= <urn:C>)\n";
  Graph g{Triple(I("urn:x"), I("urn:r"), I("urn:y")), Triple(I("urn:y"), kType, I("urn:A"))};
  TypeMap t = saturate_types(g, onto(tbox));
  EXPECT_TRUE(t[I("urn:x")].count("urn:C"));
  EXPECT_EQ(t[I("urn:y")], (std::set<std::string>{"urn:A"}));

  // The roll-up of x entails C in every model of size <= 3.
  Ontology o = onto(tbox);
  std::vector<Axiom> axioms(o.axioms().begin(), o.axioms().end());
  EXPECT_TRUE(test_support::ModelOracle(axioms).subsumes(roll_up(g, I("urn:x")), ClassExpr::named("urn:C")));
  EXPECT_FALSE(test_support::ModelOracle(axioms).subsumes(roll_up(g, I("urn:y")), ClassExpr::named("urn:C")));
}

TEST(SaturateTypes, ConjunctionAndNestedFillers) {
  Ontology o = onto(
      "((and <urn:A> <urn:B>) <= <urn:D>)\n"
      "((some <urn:r> (and <urn:D> <urn:E>)) <= <urn:F>)\n"
      "(<urn:G> <= <urn:A>)\n");
  Graph g{Triple(I("urn:x"), I("urn:r"), Term::blank("y")), Triple(Term::blank("y"), kType, I("urn:G")),
          Triple(Term::blank("y"), kType, I("urn:B")), Triple(Term::blank("y"), kType, I("urn:E"))};
  TypeMap t = saturate_types(g, o);
  EXPECT_EQ(t[Term::blank("y")], (std::set<std::string>{"urn:A", "urn:B", "urn:D", "urn:E", "urn:G"}));
  EXPECT_EQ(t[I("urn:x")], (std::set<std::string>{"urn:F"}));
  for (const auto& [node, names] : t) {
    for (const auto& n : names) EXPECT_FALSE(detail::starts_with(n, vocab::kNormPrefix));
  }
}

TEST(SaturateTypes, UnknownAssertedClassesKept) {
  Graph g{Triple(I("urn:q"), kType, I("urn:qa#Question"))};
  TypeMap t = saturate_types(g, Ontology());
  EXPECT_EQ(t[I("urn:q")], (std::set<std::string>{"urn:qa#Question"}));
}

TEST(SaturateTypesProperty, ConfluentUnderRandomOrder) {
  test_support::RandomEl gen(31);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto inst = gen.instance();
    std::optional<Ontology> o;
    try {
      o.emplace(Iri("urn:t#o"), std::set<Axiom>(inst.axioms.begin(), inst.axioms.end()));
    } catch (const InconsistentOntology&) {
      continue;
    }
    RandomAbox abox = random_abox(gen, static_cast<int>(o->roles().size()));
    TypeMap want = saturate_types(abox.graph, *o);
    for (int k = 0; k < 4; ++k) {
      std::mt19937_64 rng(1000 * i + k);
      EXPECT_EQ(detail::TypeSaturation(abox.graph, *o, &rng).run(), want);
    }
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

// On DAG-shaped graphs the derived types are exactly the named supers of
// each node's roll-up.
TEST(SaturateTypesProperty, MatchesRollUpEntailment) {
  test_support::RandomEl gen(8);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    auto inst = gen.instance();
    std::optional<Ontology> o;
    try {
      o.emplace(Iri("urn:t#o"), std::set<Axiom>(inst.axioms.begin(), inst.axioms.end()));
    } catch (const InconsistentOntology&) {
      continue;
    }
    RandomAbox abox = random_abox(gen, static_cast<int>(o->roles().size()));
    TypeMap got = saturate_types(abox.graph, *o);
    for (const auto& x : abox.nodes) {
      bool present = std::any_of(abox.graph.begin(), abox.graph.end(),
                                 [&](const Triple& t) { return t.s == x || t.o == x; });
      if (!present) continue;
      Description d = o->reasoner().describe(roll_up(abox.graph, x));
      if (!d.satisfiable()) continue;
      std::set<std::string> want;
      for (const auto& n : d.named_supers()) want.insert(n);
      for (const auto& t : abox.graph) {
        if (t.s == x && t.p == kType && !o->named_classes().count(t.o.value())) want.insert(t.o.value());
      }
      std::set<std::string> have = got.count(x) ? got.at(x) : std::set<std::string>{};
      EXPECT_EQ(have, want) << roll_up(abox.graph, x).str();
      ++checked;
    }
  }
  EXPECT_GT(checked, 500);
}

TEST(Conforms, TopAlways) {
  EXPECT_TRUE(conforms(question(), ClassExpr::top(), Ontology()));
  EXPECT_FALSE(conforms(question(), ClassExpr::bottom(), Ontology()));
}

TEST(Conforms, NamedQuestion) {
  EXPECT_TRUE(conforms(question(), ClassExpr::named("urn:qa#Question"), Ontology()));
  EXPECT_FALSE(conforms(question(), ClassExpr::named("urn:qa#Answer"), Ontology()));
}

TEST(Conforms, StructuralConjunctionWithExistential) {
  Graph g{Triple(I("urn:q"), kType, I("urn:A")), Triple(I("urn:q"), I("urn:r"), I("urn:y")),
          Triple(I("urn:y"), kType, I("urn:B"))};
  Message m(g, Iri("urn:q"));
  Ontology empty;
  EXPECT_TRUE(conforms(m, E("(and <urn:A> (some <urn:r> <urn:B>))"), empty));
  EXPECT_FALSE(conforms(m, E("(and <urn:A> (some <urn:r> <urn:A>))"), empty));
  EXPECT_FALSE(conforms(m, E("(some <urn:s> <urn:B>)"), empty));
}

TEST(Conforms, ExistentialFromTypes) {
  Ontology o = onto("(<urn:A> <= (some <urn:r> <urn:B>))\n(<urn:B> <= <urn:C>)\n");
  Message m(Graph{Triple(I("urn:q"), kType, I("urn:A"))}, Iri("urn:q"));
  EXPECT_TRUE(conforms(m, E("(some <urn:r> <urn:C>)"), o));
  EXPECT_FALSE(conforms(m, E("(some <urn:r> <urn:A>)"), o));
}

TEST(Conforms, LiteralsAreNotFillers) {
  Message m(Graph{Triple(I("urn:q"), I("urn:r"), Term::literal("x"))}, Iri("urn:q"));
  EXPECT_FALSE(conforms(m, E("(some <urn:r> owl:Thing)"), Ontology()));
}

TEST(ConformsProperty, MonotoneConjunctiveSound) {
  test_support::RandomEl gen(21);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    auto inst = gen.instance();
    std::optional<Ontology> o;
    try {
      o.emplace(Iri("urn:t#o"), std::set<Axiom>(inst.axioms.begin(), inst.axioms.end()));
    } catch (const InconsistentOntology&) {
      continue;
    }
    RandomAbox abox = random_abox(gen, static_cast<int>(o->roles().size()));
    RandomAbox more = random_abox(gen, static_cast<int>(o->roles().size()));
    Graph base = abox.graph;
    base.emplace(abox.nodes[0], I("urn:qa#text"), Term::literal("q"));
    Message m(base, Iri(abox.nodes[0].value()));
    Graph bigger = base;
    bigger.insert(more.graph.begin(), more.graph.end());
    Message m2(bigger, m.focus());

    ClassExpr a = gen.expr(2, false, false);
    ClassExpr b = gen.expr(2, false, false);
    bool ca = conforms(m, a, *o);
    bool cb = conforms(m, b, *o);
    EXPECT_EQ(conforms(m, ClassExpr::conjunction(a, b), *o), ca && cb);
    if (ca) {
      EXPECT_TRUE(conforms(m2, a, *o)) << a.str();
      // Never accepts what the roll-up does not entail.
      EXPECT_TRUE(o->reasoner().subsumes(roll_up(base, m.focus_term()), a)) << a.str();
    }
    ++checked;
  }
  EXPECT_GT(checked, 200);
}
