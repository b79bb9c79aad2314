#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "chart.hpp"

namespace pcfgthresh {

// Pruning ratios in [0, 1]; 0 disables a technique, 1 prunes hardest.
// The multi-pass gates filter the previous pass's chart and are ignored on
// a first pass.
struct ThresholdSet {
  double beam = 0.0;
  double global = 0.0;
  double mp_node = 0.0;
  double mp_prod = 0.0;

  friend bool operator==(const ThresholdSet&, const ThresholdSet&) = default;
};

// Throws FormatError unless every ratio lies in [0, 1].
void validate(const ThresholdSet& t);
ThresholdSet scaled(const ThresholdSet& t, double divisor, bool gates_too);

// `beam=<r> global=<r> mpnode=<r> mpprod=<r>`; missing keys read as 0.
std::string format_thresholds(const ThresholdSet& t);
ThresholdSet parse_thresholds(std::string_view line);
// One line per pass, blank lines and '#' comments skipped.
std::vector<ThresholdSet> read_threshold_lines(std::istream& in, std::string_view source);

struct RetryPolicy {
  bool enabled = true;
  double divisor = 5.0;
  std::uint32_t max_retries = 6;
  bool loosen_gates = false;  // multi-pass gates are loosened only if set
};

struct ParseOptions {
  bool beam_prior = true;  // false: inside-only beam
  RetryPolicy retry;
};

// ---------------------------------------------------------------------------
// Beam

// Survival flags for one cell given each node's measure (log prior + log
// inside, or log inside alone): kept iff measure >= log(t) + best.
std::vector<bool> beam_survivors(std::span<const LogProb> measures, double ratio);

// Applies the beam to the nonterminal nodes of a built cell. Terminal items
// take part in finding the cell's best but are never pruned.
void beam_prune(Chart& chart, std::uint32_t start, std::uint32_t len, double ratio, bool use_prior = true);

// ---------------------------------------------------------------------------
// Global

struct ScoredSpan {
  std::uint32_t start;  // 0-based
  std::uint32_t len;
  LogProb score;  // log prior + log inside
};

// f[i]: best score of a sequence of spans exactly covering words [0, i);
// b[i]: best for [i, n). best = f[n] (-inf when no cover exists).
struct SequenceScores {
  std::vector<LogProb> forward;
  std::vector<LogProb> backward;
  LogProb best = kLogZero;
};

SequenceScores sequence_scores(std::uint32_t n, std::span<const ScoredSpan> spans);

// Survival flag per span: kept iff f[start] + score + b[start+len] >=
// log(t) + best. Nothing is pruned when no cover exists.
std::vector<bool> global_survivors(std::uint32_t n, std::span<const ScoredSpan> spans, const SequenceScores& scores,
                                   double ratio);

// Runs the sequence program over the active nodes of every cell with
// length <= max_len and deactivates the losers. Terminal items take part
// but are never pruned.
void global_prune(Chart& chart, std::uint32_t max_len, double ratio);

// ---------------------------------------------------------------------------
// Parsing with thresholds

// One attempt: builds the chart with the given expansion, beam after each
// cell, global after each length. The result may have failed().
Chart parse_once(GrammarPtr grammar, std::vector<SymbolId> terminals, const ThresholdSet& t, const ParseOptions& opt,
                 Expansion& expansion);

// Single-pass parse; on failure divides every ratio by the divisor and
// retries, up to max_retries, then makes a last attempt with all ratios 0.
// Statistics accumulate across attempts. Throws ModelError when even the
// unpruned parse fails (unless retry is disabled, in which case the failed
// chart is returned).
Chart parse_with_retry(GrammarPtr grammar, std::span<const std::string> words, const ThresholdSet& t,
                       const ParseOptions& opt);

}  // namespace pcfgthresh
