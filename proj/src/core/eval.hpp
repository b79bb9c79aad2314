#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logprob.hpp"
#include "tree.hpp"

namespace pcfgthresh {

// Per-sentence outcome of a parse. A failed sentence has entropy +inf and
// no tree.
struct RunRecord {
  std::string id;
  double entropy = 0.0;
  std::uint64_t productions = 0;
  double elapsed = 0.0;
  std::uint32_t retries = 0;
  LogProb viterbi = kLogZero;
  std::optional<Tree> tree;

  bool failed() const { return !tree.has_value(); }
};

// One JSON object per line: id, entropy (null when infinite), productions,
// elapsed, retries, viterbi (null when -inf), tree (bracketed, "(())" on
// failure).
void write_records(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_records(std::istream& in, std::string_view source = "<records>");

// ---------------------------------------------------------------------------
// Brackets

struct Bracket {
  std::string label;
  std::uint32_t start;
  std::uint32_t end;  // exclusive
  friend auto operator<=>(const Bracket&, const Bracket&) = default;
};

// Labeled spans of length >= 2 of every internal node except the root,
// sorted (a multiset).
std::vector<Bracket> brackets(const Tree& tree);

struct BracketCounts {
  std::uint64_t matched = 0;
  std::uint64_t candidate = 0;
  std::uint64_t gold = 0;
  double precision() const { return candidate ? static_cast<double>(matched) / candidate : 1.0; }
  double recall() const { return gold ? static_cast<double>(matched) / gold : 1.0; }
  BracketCounts& operator+=(const BracketCounts& o) {
    matched += o.matched;
    candidate += o.candidate;
    gold += o.gold;
    return *this;
  }
};

// A failed candidate has no brackets. Throws FormatError if the yields
// differ in length.
BracketCounts bracket_counts(const std::optional<Tree>& candidate, const Tree& gold);
// Unlabeled candidate spans crossing some gold span.
std::uint32_t crossing_brackets(const Tree& candidate, const Tree& gold);

struct PrecisionRecall {
  BracketCounts counts;
  double precision;
  double recall;
};
// Summed over the corpus. Throws FormatError when the lists differ in size.
PrecisionRecall precision_recall(std::span<const std::optional<Tree>> candidates, std::span<const Tree> golds);

// ---------------------------------------------------------------------------
// Run comparison

enum class Metric { inside, viterbi, crossing, zero_crossing, precision, recall };
inline constexpr std::array<Metric, 6> kMetrics{Metric::inside,        Metric::viterbi,   Metric::crossing,
                                                Metric::zero_crossing, Metric::precision, Metric::recall};
const char* metric_name(Metric m);

struct MetricDelta {
  struct Counts {
    std::uint32_t decreased = 0;
    std::uint32_t same = 0;
    std::uint32_t increased = 0;
  };
  std::array<Counts, 6> by_metric{};
  std::uint32_t compared = 0;  // sentences parsed in both runs
  std::uint32_t dropped = 0;

  const Counts& operator[](Metric m) const { return by_metric[static_cast<std::size_t>(m)]; }
};

// How each metric moved from run_a to run_b, sentence by sentence. Inside
// and Viterbi probabilities compare in the linear domain and count as the
// same within a relative 1e-12. Throws FormatError when the runs are not
// aligned with each other and the golds.
MetricDelta compare_runs(std::span<const RunRecord> run_a, std::span<const RunRecord> run_b,
                         std::span<const Tree> golds);
void write_metric_delta(std::ostream& out, const MetricDelta& delta);

// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace pcfgthresh
