#include "thresholding.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <istream>
#include <sstream>

#include "errors.hpp"
#include "grammar.hpp"

namespace pcfgthresh {

namespace {

// Forward and backward sums reach the same sequence total in a different
// order; this slack (in bits) keeps rounding from pruning a node that lies
// on a best sequence.
constexpr double kGlobalSlack = 1e-9;

}  // namespace

void validate(const ThresholdSet& t) {
  for (double v : {t.beam, t.global, t.mp_node, t.mp_prod}) {
    if (!(v >= 0.0 && v <= 1.0)) throw FormatError("threshold " + format_double(v) + " outside [0,1]");
  }
}

ThresholdSet scaled(const ThresholdSet& t, double divisor, bool gates_too) {
  ThresholdSet out = t;
  out.beam /= divisor;
  out.global /= divisor;
  if (gates_too) {
    out.mp_node /= divisor;
    out.mp_prod /= divisor;
  }
  return out;
}

std::string format_thresholds(const ThresholdSet& t) {
  return "beam=" + format_double(t.beam) + " global=" + format_double(t.global) + " mpnode=" +
         format_double(t.mp_node) + " mpprod=" + format_double(t.mp_prod);
}

ThresholdSet parse_thresholds(std::string_view line) {
  ThresholdSet t;
  std::istringstream in{std::string(line)};
  for (std::string field; in >> field;) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw FormatError("expected key=value, got '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string text = field.substr(eq + 1);
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      throw FormatError("bad threshold value '" + text + "'");
    if (key == "beam")
      t.beam = v;
    else if (key == "global")
      t.global = v;
    else if (key == "mpnode")
      t.mp_node = v;
    else if (key == "mpprod")
      t.mp_prod = v;
    else
      throw FormatError("unknown threshold '" + key + "'");
  }
  validate(t);
  return t;
}

std::vector<ThresholdSet> read_threshold_lines(std::istream& in, std::string_view source) {
  std::vector<ThresholdSet> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_thresholds(line));
    } catch (const FormatError& e) {
      throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Beam

std::vector<bool> beam_survivors(std::span<const LogProb> measures, double ratio) {
  std::vector<bool> keep(measures.size(), true);
  if (ratio <= 0.0 || measures.empty()) return keep;
  const LogProb best = *std::max_element(measures.begin(), measures.end());
  const LogProb bound = std::log2(ratio) + best;
  for (std::size_t i = 0; i < measures.size(); ++i) keep[i] = !(measures[i] < bound);
  return keep;
}

void beam_prune(Chart& chart, std::uint32_t start, std::uint32_t len, double ratio, bool use_prior) {
  if (ratio <= 0.0) return;
  Cell& cell = chart.cell(start, len);
  LogProb best = kLogZero;
  for (const Node& n : cell.nodes) {
    if (!n.active) continue;
    best = std::max(best, use_prior ? n.prior + n.inside : n.inside);
  }
  const LogProb bound = std::log2(ratio) + best;
  for (Node& n : cell.nodes) {
    if (!n.active || n.terminal) continue;
    if ((use_prior ? n.prior + n.inside : n.inside) < bound) n.active = false;
  }
}

// ---------------------------------------------------------------------------
// Global

SequenceScores sequence_scores(std::uint32_t n, std::span<const ScoredSpan> spans) {
  SequenceScores s;
  s.forward.assign(n + 1, kLogZero);
  s.backward.assign(n + 1, kLogZero);
  std::vector<std::vector<std::uint32_t>> by_start(n);
  for (std::uint32_t i = 0; i < spans.size(); ++i) by_start[spans[i].start].push_back(i);

  s.forward[0] = kLogOne;
  for (std::uint32_t i = 0; i < n; ++i) {
    if (s.forward[i] == kLogZero) continue;
    for (std::uint32_t k : by_start[i]) {
      const ScoredSpan& sp = spans[k];
      s.forward[i + sp.len] = std::max(s.forward[i + sp.len], s.forward[i] + sp.score);
    }
  }
  s.backward[n] = kLogOne;
  for (std::uint32_t i = n; i-- > 0;) {
    for (std::uint32_t k : by_start[i]) {
      const ScoredSpan& sp = spans[k];
      s.backward[i] = std::max(s.backward[i], sp.score + s.backward[i + sp.len]);
    }
  }
  s.best = s.forward[n];
  return s;
}

std::vector<bool> global_survivors(std::uint32_t, std::span<const ScoredSpan> spans, const SequenceScores& scores,
                                   double ratio) {
  std::vector<bool> keep(spans.size(), true);
  if (ratio <= 0.0 || scores.best == kLogZero) return keep;
  const LogProb bound = std::log2(ratio) + scores.best - kGlobalSlack;
  for (std::size_t i = 0; i < spans.size(); ++i) {
    const ScoredSpan& sp = spans[i];
    const LogProb total = scores.forward[sp.start] + sp.score + scores.backward[sp.start + sp.len];
    keep[i] = !(total < bound);
  }
  return keep;
}

void global_prune(Chart& chart, std::uint32_t max_len, double ratio) {
  if (ratio <= 0.0) return;
  const std::uint32_t n = chart.size();
  std::vector<ScoredSpan> spans;
  std::vector<Node*> nodes;
  for (std::uint32_t len = 1; len <= max_len; ++len) {
    for (std::uint32_t start = 0; start + len <= n; ++start) {
      for (Node& node : chart.cell(start, len).nodes) {
        if (!node.active) continue;
        spans.push_back({start, len, node.prior + node.inside});
        nodes.push_back(&node);
      }
    }
  }
  const SequenceScores scores = sequence_scores(n, spans);
  const auto keep = global_survivors(n, spans, scores, ratio);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (!keep[i] && !nodes[i]->terminal) nodes[i]->active = false;
}

// ---------------------------------------------------------------------------

Chart parse_once(GrammarPtr grammar, std::vector<SymbolId> terminals, const ThresholdSet& t, const ParseOptions& opt,
                 Expansion& expansion) {
  Chart chart(std::move(grammar), std::move(terminals));
  ChartHooks hooks;
  if (t.beam > 0.0) {
    hooks.on_cell = [&](Chart& c, std::uint32_t start, std::uint32_t len) {
      beam_prune(c, start, len, t.beam, opt.beam_prior);
    };
  }
  if (t.global > 0.0) {
    hooks.on_length = [&](Chart& c, std::uint32_t len) { global_prune(c, len, t.global); };
  }
  chart.build(expansion, hooks);
  return chart;
}

namespace {

bool prunes(const ThresholdSet& t) { return t.beam > 0.0 || t.global > 0.0; }

}  // namespace

Chart parse_with_retry(GrammarPtr grammar, std::span<const std::string> words, const ThresholdSet& t,
                       const ParseOptions& opt) {
  validate(t);
  const auto start_time = std::chrono::steady_clock::now();
  const auto terminals = lookup_terminals(*grammar, words);
  FullExpansion full;
  ParseStats total;
  ThresholdSet current = t;
  std::uint32_t attempt = 0;
  while (true) {
    Chart chart = parse_once(grammar, terminals, current, opt, full);
    total.productions += chart.stats().productions;
    const bool done = !chart.failed() || !opt.retry.enabled;
    if (done || !prunes(current)) {
      total.retries = attempt;
      total.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
      chart.stats() = total;
      if (chart.failed() && opt.retry.enabled) throw ModelError("no parse under the grammar");
      return chart;
    }
    ++attempt;
    current = attempt <= opt.retry.max_retries ? scaled(current, opt.retry.divisor, false) : ThresholdSet{};
  }
}

}  // namespace pcfgthresh
