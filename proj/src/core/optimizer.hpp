#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pcfgthresh {

// Measured cost of one parameter vector: total entropy (bits) and total
// work (productions examined).
struct Measurement {
  double entropy = 0.0;
  double time = 0.0;
};

using EvalFn = std::function<Measurement(std::span<const double>)>;

struct OptimizerConfig {
  double target_entropy = 0.0;
  std::vector<double> anneal_factors{16.0, 4.0, 2.0, 1.414, 1.15};
  // A move whose ratio denominator is below floor * |base quantity| is not
  // trusted and skipped.
  double denominator_floor = 1e-6;
  std::size_t max_iterations = 200;
  double min_value = 1e-20;  // smallest ratio a loosening move can reach
  // true: tighten when entropy is above target (then reverse moves that
  // head the wrong way). false: loosen when above target.
  bool figure_direction = true;
};

struct TraceRow {
  std::size_t iteration;
  double factor;
  std::vector<double> params;
  Measurement m;
  std::string status;  // base, candidate, inverse, accepted, final
};

struct OptimizeResult {
  std::vector<double> params;
  Measurement m;
  bool hit_iteration_cap = false;
  std::size_t evaluations = 0;  // distinct vectors measured
  std::size_t iterations = 0;
  std::vector<TraceRow> trace;
};

// Greedy ratio-driven search over multiplicative moves with an annealed
// step. Each vector is measured at most once per call. Zero parameters are
// held fixed. Returns the cheapest measured vector whose entropy is at or
// below the target, or the one closest to the target if none is.
OptimizeResult optimize(const OptimizerConfig& config, std::vector<double> initial, const EvalFn& eval);

// TSV with a header; `names` label the parameter columns.
void write_trace(std::ostream& out, const OptimizeResult& result, std::span<const std::string> names);

}  // namespace pcfgthresh
