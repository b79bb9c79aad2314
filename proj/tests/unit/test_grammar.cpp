#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "core/descendants.hpp"
#include "core/errors.hpp"
#include "core/grammar.hpp"
#include "doctest.h"
#include "test_paths.hpp"

using namespace pcfgthresh;

namespace {

std::vector<Tree> trees(const std::string& text) {
  std::istringstream in(text);
  return read_treebank(in);
}

Grammar induced(const std::string& text, Transform kind = Transform::six_gram) {
  return induce_grammar(apply_transform(trees(text), kind));
}

double rule_p(const Grammar& g, const std::string& parent, const std::vector<std::string>& children) {
  const SymbolId p = g.find(parent);
  if (children.size() == 2) {
    for (const auto& r : g.binary_rules())
      if (r.parent == p && g.name(r.left) == children[0] && g.name(r.right) == children[1]) return std::exp2(r.logp);
  } else {
    for (const auto& r : g.unary_rules())
      if (r.parent == p && g.name(r.child) == children[0]) return std::exp2(r.logp);
    for (const auto& r : g.lexical_rules())
      if (r.parent == p && g.name(r.terminal) == children[0]) return std::exp2(r.logp);
  }
  return 0.0;
}

// Sum of rule probabilities per parent, computed from the rule tables.
std::map<SymbolId, double> parent_sums(const Grammar& g) {
  std::map<SymbolId, double> sums;
  for (const auto& r : g.binary_rules()) sums[r.parent] += std::exp2(r.logp);
  for (const auto& r : g.unary_rules()) sums[r.parent] += std::exp2(r.logp);
  for (const auto& r : g.lexical_rules()) sums[r.parent] += std::exp2(r.logp);
  return sums;
}

std::string written(const Grammar& g) {
  std::ostringstream out;
  write_grammar(out, g);
  return out.str();
}

}  // namespace

TEST_CASE("relative-frequency induction") {
  SUBCASE("single observation") {
    const Grammar g = induced("(S (A (a)) (B (b)))");
    CHECK(rule_p(g, "S", {"A", "B"}) == 1.0);
    CHECK(rule_p(g, "A", {"a"}) == 1.0);
    CHECK(rule_p(g, "B", {"b"}) == 1.0);
    REQUIRE(g.starts().size() == 1);
    CHECK(g.name(g.starts()[0].symbol) == "S");
  }
  SUBCASE("two thirds and one third") {
    const Grammar g = induced("(S (A (a)) (B (b)))\n(S (A (a)) (B (b)))\n(S (A (a)))");
    CHECK(rule_p(g, "S", {"A", "B"}) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(rule_p(g, "S", {"A^U"}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(rule_p(g, "A^U", {"a"}) == 1.0);
  }
  SUBCASE("empty treebank") { CHECK_THROWS_AS(induced(""), FormatError); }
}

TEST_CASE("priors count every node label, leaves included") {
  const auto priors = compute_priors(trees("(S (NP (n)) (VP (v) (NP (n))))"));
  std::map<std::string, double> p(priors.begin(), priors.end());
  CHECK(p.at("NP") == doctest::Approx(2.0 / 7.0));
  CHECK(p.at("S") == doctest::Approx(1.0 / 7.0));
  CHECK(p.at("n") == doctest::Approx(2.0 / 7.0));
  const auto single = compute_priors(trees("(S)"));
  REQUIRE(single.size() == 1);
  CHECK(single[0].second == 1.0);
}

TEST_CASE("induced grammars on the bundled treebank are normalized and deterministic") {
  const auto bank = read_treebank_file(test_data("synthetic/train.mrg"));
  for (auto kind : {Transform::six_gram, Transform::terminal_prime, Transform::coarse}) {
    const Grammar g = induce_grammar(apply_transform(bank, kind));
    for (const auto& [parent, sum] : parent_sums(g)) CHECK(std::abs(sum - 1.0) <= 1e-9);
    double priors = 0.0;
    for (SymbolId s = 0; s < g.symbol_count(); ++s)
      if (g.prior(s) > kLogZero) priors += std::exp2(g.prior(s));
    CHECK(std::abs(priors - 1.0) <= 1e-9);
    double starts = 0.0;
    for (const auto& s : g.starts()) starts += std::exp2(s.logp);
    CHECK(std::abs(starts - 1.0) <= 1e-9);

    const std::string text = written(g);
    CHECK(written(induce_grammar(apply_transform(bank, kind))) == text);
    std::istringstream in(text);
    CHECK(written(read_grammar(in)) == text);
  }
}

TEST_CASE("grammar validation") {
  auto make = [](std::vector<GrammarSpec::Rule> rules) {
    GrammarSpec spec;
    spec.rules = std::move(rules);
    for (const char* n : {"S", "A", "B", "a"}) spec.priors.emplace_back(n, -2.0);
    spec.starts.emplace_back("S", 0.0);
    return Grammar(spec);
  };
  CHECK_NOTHROW(make({{"S", {"A", "a"}, 0.0}, {"A", {"a"}, 0.0}}));
  CHECK_THROWS_AS(make({{"S", {"A"}, 0.0}, {"A", {"B"}, 0.0}, {"B", {"a"}, 0.0}}), FormatError);
  CHECK_THROWS_AS(make({{"S", {"a"}, 0.5}}), FormatError);
  CHECK_THROWS_AS(make({{"S", {"a"}, -0.5}, {"S", {"a", "a"}, -0.5}, {"S", {"A", "a"}, -0.5}, {"A", {"a"}, 0.0}}),
                  FormatError);
  CHECK_THROWS_AS(make({{"S", {"a"}, 0.0}, {"S", {"a"}, -1.0}}), FormatError);

  std::istringstream bad("S S\nB S A\n");
  try {
    read_grammar(bad, "g.txt");
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("g.txt:2") != std::string::npos);
  }
}

TEST_CASE("descendants maps") {
  const auto bank = trees("(S (NP (det) (adj) (noun)) (VP (verb)))\n(S (NP (adj) (noun)) (VP (verb) (NP (noun))))");
  const Grammar six = induce_grammar(apply_transform(bank, Transform::six_gram));
  const Grammar tp = induce_grammar(apply_transform(bank, Transform::terminal_prime));
  const Grammar coarse = induce_grammar(apply_transform(bank, Transform::coarse));

  const DescendantsMap tp_map = build_descendants(tp, six, Transform::terminal_prime);
  auto licensed = [&](const Grammar& first, const DescendantsMap& m, const char* x, const char* y) {
    return m.licenses(first.find(x), six.find(y));
  };
  CHECK(licensed(tp, tp_map, "ADJ'", "NP'<adj|noun>"));
  CHECK(licensed(tp, tp_map, "DET", "NP"));
  CHECK(licensed(tp, tp_map, "ADJ", "NP"));
  CHECK_FALSE(licensed(tp, tp_map, "DET", "NP'<adj|noun>"));

  const DescendantsMap coarse_map = build_descendants(coarse, six, Transform::coarse);
  CHECK(licensed(coarse, coarse_map, "NP'", "NP'<adj|noun>"));
  CHECK_FALSE(licensed(coarse, coarse_map, "NP", "NP'<adj|noun>"));

  std::ostringstream out;
  write_descendants(out, tp_map);
  std::istringstream in(out.str());
  const DescendantsMap back = read_descendants(in, tp, six);
  CHECK(back.pairs() == tp_map.pairs());

  const Grammar other = induced("(S (A (a)) (B (b)))");
  CHECK_THROWS_AS(build_descendants(other, six, Transform::six_gram), ModelError);
}
