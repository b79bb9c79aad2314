#include <cmath>
#include <random>

#include "core/errors.hpp"
#include "core/thresholding.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace pcfgthresh;

namespace {

std::vector<LogProb> logs(std::initializer_list<double> ps) {
  std::vector<LogProb> out;
  for (double p : ps) out.push_back(std::log2(p));
  return out;
}

// S -> Y c needs Y over `a b`; X competes for the same span with a much
// larger prior, so a tight beam removes the only bridge to the root.
GrammarPtr bridge_grammar() {
  GrammarSpec spec;
  spec.rules = {{"S", {"Y", "c"}, 0.0}, {"X", {"a", "b"}, 0.0}, {"Y", {"a", "b"}, 0.0}};
  spec.priors = {{"S", std::log2(0.125)}, {"X", std::log2(0.5)}, {"Y", std::log2(0.075)},
                 {"a", std::log2(0.1)},   {"b", std::log2(0.1)}, {"c", std::log2(0.1)}};
  spec.starts = {{"S", 0.0}};
  return std::make_shared<const Grammar>(spec);
}

std::size_t active_nodes(const Chart& c) {
  std::size_t n = 0;
  for (std::uint32_t len = 1; len <= c.size(); ++len)
    for (std::uint32_t s = 0; s + len <= c.size(); ++s)
      for (const auto& node : c.cell(s, len).nodes) n += node.active;
  return n;
}

}  // namespace

TEST_CASE("beam survival") {
  CHECK(beam_survivors(logs({1.0, 0.099}), 0.1) == std::vector<bool>{true, false});
  CHECK(beam_survivors(logs({0.9, 0.9}), 1.0) == std::vector<bool>{true, true});
  CHECK(beam_survivors(logs({0.3}), 1.0) == std::vector<bool>{true});
  CHECK(beam_survivors(logs({1.0, 1e-300, 0.5}), 0.0) == std::vector<bool>(3, true));

  // X: prior .9 inside .1, Y: prior .001 inside .2, ratio .6.
  const auto inside_only = beam_survivors(logs({0.1, 0.2}), 0.6);
  CHECK(inside_only == std::vector<bool>{false, true});
  const auto with_prior = beam_survivors(logs({0.9 * 0.1, 0.001 * 0.2}), 0.6);
  CHECK(with_prior == std::vector<bool>{true, false});
}

TEST_CASE("global sequence scores") {
  // A over word 1 (.5), B over word 2 (.4), C over both (.1).
  const std::vector<ScoredSpan> spans{{0, 1, std::log2(0.5)}, {1, 1, std::log2(0.4)}, {0, 2, std::log2(0.1)}};
  const SequenceScores s = sequence_scores(2, spans);
  CHECK(std::exp2(s.forward[0]) == doctest::Approx(1.0));
  CHECK(std::exp2(s.forward[1]) == doctest::Approx(0.5));
  CHECK(std::exp2(s.forward[2]) == doctest::Approx(0.2));
  CHECK(std::exp2(s.backward[0]) == doctest::Approx(0.2));
  CHECK(std::exp2(s.backward[1]) == doctest::Approx(0.4));
  CHECK(std::exp2(s.backward[2]) == doctest::Approx(1.0));
  CHECK(std::exp2(s.best) == doctest::Approx(0.2));

  CHECK(global_survivors(2, spans, s, 0.6) == std::vector<bool>{true, true, false});
  CHECK(global_survivors(2, spans, s, 0.4) == std::vector<bool>{true, true, true});
  CHECK(global_survivors(2, spans, s, 0.0) == std::vector<bool>{true, true, true});

  const std::vector<ScoredSpan> words_only{{0, 1, std::log2(0.5)}, {1, 1, std::log2(0.25)}, {2, 1, std::log2(0.5)}};
  CHECK(std::exp2(sequence_scores(3, words_only).best) == doctest::Approx(0.0625));
}

TEST_CASE("global decisions match covering-sequence enumeration on random span sets") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t n = 1 + rng() % 6;
    std::vector<ScoredSpan> spans;
    for (std::uint32_t len = 1; len <= n; ++len)
      for (std::uint32_t s = 0; s + len <= n; ++s) {
        const int count = len == 1 ? 1 + rng() % 2 : rng() % 3;
        for (int k = 0; k < count; ++k)
          spans.push_back({s, len, -std::uniform_real_distribution<double>(0.0, 12.0)(rng)});
      }
    const SequenceScores scores = sequence_scores(n, spans);
    const double best = oracle::best_cover(n, spans, -1);
    CHECK(scores.best == doctest::Approx(best).epsilon(1e-12));
    CHECK(scores.forward[n] == doctest::Approx(scores.backward[0]).epsilon(1e-12));
    const double ratio = std::exp2(-std::uniform_real_distribution<double>(0.0, 10.0)(rng));
    const auto keep = global_survivors(n, spans, scores, ratio);
    for (std::size_t k = 0; k < spans.size(); ++k) {
      const double through = oracle::best_cover(n, spans, static_cast<long>(k));
      CHECK(keep[k] == !(through < std::log2(ratio) + best - 1e-9));
    }
  }
}

TEST_CASE("retry divides thresholds until a parse is found") {
  const auto g = bridge_grammar();
  const std::vector<std::string> w{"a", "b", "c"};
  ParseOptions opt;
  opt.retry.enabled = false;
  const Chart pruned = parse_with_retry(g, w, {0.5, 0, 0, 0}, opt);
  CHECK(pruned.failed());

  opt.retry.enabled = true;
  const Chart retried = parse_with_retry(g, w, {0.5, 0, 0, 0}, opt);
  CHECK_FALSE(retried.failed());
  CHECK(retried.stats().retries == 1);
  CHECK(retried.stats().productions == pruned.stats().productions + parse_exhaustive(g, w).stats().productions);

  const Chart plain = parse_with_retry(g, w, {}, opt);
  CHECK(plain.stats().retries == 0);

  const std::vector<std::string> backwards{"c", "a", "b"};
  CHECK_THROWS_AS(parse_with_retry(g, backwards, {0.5, 0.5, 0, 0}, opt), ModelError);
  CHECK_THROWS_AS(parse_with_retry(g, backwards, {}, opt), ModelError);
}

TEST_CASE("pruning never raises inside and zero thresholds are the identity") {
  const auto toy = oracle::g3();
  const auto g = oracle::build(toy);
  ParseOptions opt;
  opt.retry.enabled = false;
  FullExpansion full;
  for (const auto& sentence : oracle::all_sentences(toy.alphabet, 5)) {
    const Chart exact = parse_exhaustive(g, sentence);
    if (exact.failed()) continue;
    const auto ids = lookup_terminals(*g, sentence);
    const Chart zero = parse_once(g, ids, {}, opt, full);
    CHECK(zero.total_inside() == exact.total_inside());
    CHECK(active_nodes(zero) == active_nodes(exact));
    for (const ThresholdSet t : {ThresholdSet{0.3, 0, 0, 0}, ThresholdSet{0, 0.3, 0, 0}, ThresholdSet{0.5, 0.5, 0, 0}}) {
      const Chart pruned = parse_once(g, ids, t, opt, full);
      CHECK(pruned.total_inside() <= exact.total_inside());
      CHECK(pruned.entropy() >= exact.entropy());
      CHECK(pruned.stats().productions <= exact.stats().productions);
    }
  }
}

TEST_CASE("threshold sets") {
  const ThresholdSet t = parse_thresholds("beam=0.001 mpnode=1e-05");
  CHECK(t.beam == 0.001);
  CHECK(t.global == 0.0);
  CHECK(t.mp_node == 1e-5);
  CHECK(parse_thresholds(format_thresholds(t)) == t);
  CHECK_THROWS_AS(parse_thresholds("beam=2"), FormatError);
  CHECK_THROWS_AS(parse_thresholds("width=0.1"), FormatError);
  CHECK_THROWS_AS(parse_thresholds("beam=x"), FormatError);
  const ThresholdSet s = scaled({0.5, 0.25, 0.1, 0.1}, 5, false);
  CHECK(s == ThresholdSet{0.1, 0.05, 0.1, 0.1});
}

TEST_CASE("a best covering sequence survives and decisions ignore score scaling") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::uint32_t n = 1 + rng() % 6;
    std::vector<ScoredSpan> spans;
    for (std::uint32_t len = 1; len <= n; ++len)
      for (std::uint32_t s = 0; s + len <= n; ++s) {
        const int count = len == 1 ? 1 + rng() % 2 : rng() % 3;
        for (int k = 0; k < count; ++k)
          spans.push_back({s, len, -std::uniform_real_distribution<double>(0.0, 12.0)(rng)});
      }
    const double ratio = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const SequenceScores scores = sequence_scores(n, spans);
    const auto keep = global_survivors(n, spans, scores, ratio);
    std::vector<ScoredSpan> kept;
    for (std::size_t k = 0; k < spans.size(); ++k)
      if (keep[k]) kept.push_back(spans[k]);
    CHECK(oracle::best_cover(n, kept, -1) == doctest::Approx(scores.best).epsilon(1e-12));

    // Every covering sequence spans n words, so scaling each node by
    // c^length scales all sequences alike. A flat factor per node would
    // favour sequences with fewer pieces.
    const double shift = std::uniform_real_distribution<double>(-20.0, 20.0)(rng);
    auto shifted = spans;
    for (auto& s : shifted) s.score += shift * s.len;
    CHECK(global_survivors(n, shifted, sequence_scores(n, shifted), ratio) == keep);
    // The beam compares nodes of one cell, so a flat factor is harmless.
    std::vector<LogProb> measures;
    for (const auto& s : spans) measures.push_back(s.score);
    auto moved = measures;
    for (auto& m : moved) m += shift;
    CHECK(beam_survivors(moved, ratio) == beam_survivors(measures, ratio));
  }
}
