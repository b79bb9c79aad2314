#include <cmath>

#include "bundled.hpp"
#include "core/errors.hpp"
#include "core/multipass.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_paths.hpp"

using namespace pcfgthresh;

namespace {

const Bundled& data() { return Bundled::get(PT_DATA_DIR); }

Chart parsed_with_outside(const GrammarPtr& g, const std::vector<std::string>& words) {
  Chart c = parse_exhaustive(g, words);
  c.inside_outside();
  return c;
}

std::pair<std::size_t, std::size_t> chart_size(const Chart& c) {
  std::size_t nodes = 0;
  std::size_t instances = 0;
  for (std::uint32_t len = 1; len <= c.size(); ++len)
    for (std::uint32_t s = 0; s + len <= c.size(); ++s) {
      nodes += c.cell(s, len).nodes.size();
      instances += c.cell(s, len).instances.size();
    }
  return {nodes, instances};
}

}  // namespace

TEST_CASE("survivor table shares") {
  SUBCASE("zero gates keep the whole chart") {
    const Chart c = parsed_with_outside(oracle::build(oracle::g3()), split_words("n v n p n"));
    const SurvivorTable all(c, 0.0, 0.0);
    const auto [nodes, instances] = chart_size(c);
    CHECK(all.node_count() == nodes);
    CHECK(all.instance_count() == instances);
  }
  SUBCASE("preterminals of x x carry all the mass") {
    const Chart c = parsed_with_outside(oracle::build(oracle::g2()), split_words("x x"));
    for (std::uint32_t i = 0; i < 2; ++i) {
      const Node& n = c.cell(i, 1).nodes[c.cell(i, 1).find(c.grammar().find("S"))];
      CHECK(node_share(c, n) == doctest::Approx(0.0).epsilon(1e-12));
    }
    const SurvivorTable strict(c, 1.0, 0.0);
    CHECK(strict.node(0, 1, c.cell(0, 1).find(c.grammar().find("S"))));
  }
  SUBCASE("unambiguous grammar: on-parse share 1, off-parse share 0") {
    oracle::ToyGrammar toy = oracle::g1();
    toy.rules.push_back({"C", {"a", "b"}, 1.0});
    const Chart c = parsed_with_outside(oracle::build(toy), split_words("a b"));
    const Grammar& g = c.grammar();
    auto share = [&](std::uint32_t s, std::uint32_t len, const char* sym) {
      return node_share(c, c.cell(s, len).nodes[c.cell(s, len).find(g.find(sym))]);
    };
    CHECK(share(0, 2, "S") == 0.0);
    CHECK(share(0, 1, "A") == 0.0);
    CHECK(share(1, 1, "B") == 0.0);
    CHECK(share(0, 2, "C") == kLogZero);
  }
}

TEST_CASE("identity two-pass parsing is admissible on a toy grammar") {
  const auto toy = oracle::g3();
  const auto g = oracle::build(toy);
  auto map = std::make_shared<const DescendantsMap>(build_descendants(*g, *g, Transform::six_gram));
  const std::vector<PassSpec> passes{{g, {}, nullptr}, {g, {}, map}};
  for (const auto& sentence : oracle::all_sentences(toy.alphabet, 5)) {
    ParseOptions opt;
    opt.retry.enabled = false;
    const Chart single = parse_with_retry(g, sentence, {}, opt);
    const Chart two = run_passes(passes, sentence, opt);
    CHECK(two.failed() == single.failed());
    if (single.failed()) continue;
    CHECK(two.total_inside() == single.total_inside());
    CHECK(two.viterbi_logprob() == single.viterbi_logprob());
    CHECK(two.viterbi_tree() == single.viterbi_tree());
    CHECK(two.stats().productions == 2 * single.stats().productions);
  }
  const Chart one = run_passes(std::span(passes).first(1), split_words("n v n"), {});
  const Chart direct = parse_with_retry(g, split_words("n v n"), {}, {});
  CHECK(one.total_inside() == direct.total_inside());
  CHECK(one.stats().productions == direct.stats().productions);
}

TEST_CASE("every second-pass node traces back to exactly one first-pass node") {
  const Bundled& b = data();
  std::size_t checked = 0;
  for (const auto& s : b.tune) {
    Chart first = parse_exhaustive(b.tp, s.words);
    first.inside_outside();
    const SurvivorTable all(first, 0.0, 0.0);
    const PassSpec spec{b.six, {}, b.tp_map};
    const Chart second = second_pass(spec, first, all, lookup_terminals(*b.six, s.words), {});
    for (std::uint32_t len = 1; len <= second.size(); ++len) {
      for (std::uint32_t start = 0; start + len <= second.size(); ++start) {
        const Cell& fine = second.cell(start, len);
        const Cell& coarse = first.cell(start, len);
        for (const Node& n : fine.nodes) {
          if (n.terminal) continue;
          int ancestors = 0;
          for (const Node& a : coarse.nodes)
            if (!a.terminal && b.tp_map->licenses(a.symbol, n.symbol)) ++ancestors;
          CHECK(ancestors == 1);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 1000);
}

TEST_CASE("tight gates shrink the second pass below a single pass") {
  const Bundled& b = data();
  std::uint64_t single = 0;
  std::uint64_t second = 0;
  for (const auto& s : b.test) {
    single += parse_exhaustive(b.six, s.words).stats().productions;
    Chart first = parse_exhaustive(b.coarse, s.words);
    first.inside_outside();
    const SurvivorTable gates(first, 1e-4, 1e-4);
    const PassSpec spec{b.six, {}, b.coarse_map};
    second += second_pass(spec, first, gates, lookup_terminals(*b.six, s.words), {}).stats().productions;
  }
  MESSAGE("single pass " << single << " productions, gated second pass " << second);
  CHECK(second < single);
}

TEST_CASE("a first grammar that does not cover the sentence falls back to the last grammar") {
  const Bundled& b = data();
  std::size_t fallbacks = 0;
  for (const auto& s : b.test) {
    const Pipeline p = b.two_pass(b.tp, b.tp_map, {}, {});
    const RunRecord two = p.parse(s);
    const RunRecord one = b.single().parse(s);
    if (two.retries > 0) {
      CHECK(two.tree == one.tree);
      CHECK(two.entropy == one.entropy);
      ++fallbacks;
    } else {
      // The gated search sees a subset of the derivations.
      CHECK(two.entropy >= one.entropy);
    }
  }
  MESSAGE(fallbacks << " of " << b.test.size() << " sentences needed the fallback");
}
