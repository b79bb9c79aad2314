#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "errors.hpp"
#include "grammar.hpp"
#include "json.hpp"

namespace pcfgthresh {

using nlohmann::json;

void write_records(std::ostream& out, std::span<const RunRecord> records) {
  for (const auto& r : records) {
    json j;
    j["id"] = r.id;
    j["entropy"] = std::isfinite(r.entropy) ? json(r.entropy) : json(nullptr);
    j["productions"] = r.productions;
    j["elapsed"] = r.elapsed;
    j["retries"] = r.retries;
    j["viterbi"] = std::isfinite(r.viterbi) ? json(r.viterbi) : json(nullptr);
    j["tree"] = r.tree ? to_bracketed(*r.tree) : std::string(kFailureBracket);
    out << j.dump() << '\n';
  }
}

std::vector<RunRecord> read_records(std::istream& in, std::string_view source) {
  std::vector<RunRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = std::string(source) + ":" + std::to_string(lineno);
    try {
      const json j = json::parse(line);
      RunRecord r;
      r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
      r.entropy = j.at("entropy").is_null() ? std::numeric_limits<double>::infinity() : j.at("entropy").get<double>();
      r.productions = j.at("productions").get<std::uint64_t>();
      r.elapsed = j.value("elapsed", 0.0);
      r.retries = j.value("retries", 0u);
      if (j.contains("viterbi") && !j.at("viterbi").is_null()) r.viterbi = j.at("viterbi").get<double>();
      if (j.contains("tree")) {
        std::istringstream tin(j.at("tree").get<std::string>());
        auto trees = read_trees(tin, where, true);
        if (trees.size() != 1) throw FormatError(where + ": expected one tree");
        r.tree = std::move(trees[0]);
      }
      if (r.tree.has_value() == std::isinf(r.entropy))
        throw FormatError(where + ": entropy and tree disagree on failure");
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

std::uint32_t collect(const Tree& t, std::uint32_t start, bool root, std::vector<Bracket>& out) {
  if (t.is_leaf()) return start + 1;
  std::uint32_t end = start;
  for (const auto& c : t.children) end = collect(c, end, false, out);
  if (!root && end - start >= 2) out.push_back({t.label, start, end});
  return end;
}

}  // namespace

std::vector<Bracket> brackets(const Tree& tree) {
  std::vector<Bracket> out;
  collect(tree, 0, true, out);
  std::sort(out.begin(), out.end());
  return out;
}

BracketCounts bracket_counts(const std::optional<Tree>& candidate, const Tree& gold) {
  BracketCounts c;
  const auto g = brackets(gold);
  c.gold = g.size();
  if (!candidate) return c;
  if (candidate->leaf_count() != gold.leaf_count()) throw FormatError("candidate and gold yields differ in length");
  const auto k = brackets(*candidate);
  c.candidate = k.size();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < k.size() && j < g.size()) {
    if (k[i] < g[j]) {
      ++i;
    } else if (g[j] < k[i]) {
      ++j;
    } else {
      ++c.matched;
      ++i;
      ++j;
    }
  }
  return c;
}

std::uint32_t crossing_brackets(const Tree& candidate, const Tree& gold) {
  const auto k = brackets(candidate);
  const auto g = brackets(gold);
  std::uint32_t crossing = 0;
  for (const auto& a : k) {
    for (const auto& b : g) {
      if ((a.start < b.start && b.start < a.end && a.end < b.end) ||
          (b.start < a.start && a.start < b.end && b.end < a.end)) {
        ++crossing;
        break;
      }
    }
  }
  return crossing;
}

PrecisionRecall precision_recall(std::span<const std::optional<Tree>> candidates, std::span<const Tree> golds) {
  if (candidates.size() != golds.size())
    throw FormatError("candidate and gold lists differ in length (" + std::to_string(candidates.size()) + " vs " +
                      std::to_string(golds.size()) + ")");
  PrecisionRecall pr{};
  for (std::size_t i = 0; i < golds.size(); ++i) pr.counts += bracket_counts(candidates[i], golds[i]);
  pr.precision = pr.counts.precision();
  pr.recall = pr.counts.recall();
  return pr;
}

// ---------------------------------------------------------------------------

const char* metric_name(Metric m) {
  switch (m) {
    case Metric::inside:
      return "inside";
    case Metric::viterbi:
      return "viterbi";
    case Metric::crossing:
      return "crossing";
    case Metric::zero_crossing:
      return "zero_crossing";
    case Metric::precision:
      return "precision";
    case Metric::recall:
      return "recall";
  }
  return "?";
}

namespace {

// -1, 0, +1 for b below, equal to, above a, as linear probabilities.
int compare_logprob(double a, double b) {
  const double d = std::abs(a - b);
  if (-std::expm1(-d * std::log(2.0)) <= 1e-12) return 0;
  return b > a ? 1 : -1;
}

int compare_value(double a, double b) { return b > a ? 1 : (b < a ? -1 : 0); }

}  // namespace

MetricDelta compare_runs(std::span<const RunRecord> run_a, std::span<const RunRecord> run_b,
                         std::span<const Tree> golds) {
  if (run_a.size() != run_b.size() || run_a.size() != golds.size())
    throw FormatError("runs and golds are not aligned (" + std::to_string(run_a.size()) + ", " +
                      std::to_string(run_b.size()) + ", " + std::to_string(golds.size()) + " entries)");
  MetricDelta delta;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const RunRecord& a = run_a[i];
    const RunRecord& b = run_b[i];
    if (a.id != b.id) throw FormatError("runs are not aligned at entry " + std::to_string(i) + ": '" + a.id +
                                        "' vs '" + b.id + "'");
    if (a.failed() || b.failed()) {
      ++delta.dropped;
      continue;
    }
    ++delta.compared;
    const auto ca = bracket_counts(a.tree, golds[i]);
    const auto cb = bracket_counts(b.tree, golds[i]);
    const auto xa = crossing_brackets(*a.tree, golds[i]);
    const auto xb = crossing_brackets(*b.tree, golds[i]);
    const std::array<int, 6> moves{
        compare_logprob(-a.entropy, -b.entropy),
        compare_logprob(a.viterbi, b.viterbi),
        compare_value(xa, xb),
        compare_value(xa == 0, xb == 0),
        compare_value(ca.precision(), cb.precision()),
        compare_value(ca.recall(), cb.recall()),
    };
    for (std::size_t m = 0; m < moves.size(); ++m) {
      auto& c = delta.by_metric[m];
      if (moves[m] < 0)
        ++c.decreased;
      else if (moves[m] == 0)
        ++c.same;
      else
        ++c.increased;
    }
  }
  return delta;
}

void write_metric_delta(std::ostream& out, const MetricDelta& delta) {
  out << "metric\tdecreased\tsame\tincreased\n";
  for (Metric m : kMetrics) {
    const auto& c = delta[m];
    out << metric_name(m) << '\t' << c.decreased << '\t' << c.same << '\t' << c.increased << '\n';
  }
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("spearman needs two equal-length series of size >= 2");
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace pcfgthresh
