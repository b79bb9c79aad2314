#include "optimizer.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <ostream>
#include <set>

#include "errors.hpp"
#include "grammar.hpp"

namespace pcfgthresh {

namespace {

using Key = std::vector<long long>;

// Parameters quantized to 1e-3 in log2 so that loops are detected despite
// rounding in repeated multiply/divide.
Key quantize(std::span<const double> params) {
  Key k;
  k.reserve(params.size());
  for (double p : params) k.push_back(p > 0.0 ? std::llround(std::log2(p) * 1000.0) : LLONG_MIN);
  return k;
}

class Search {
 public:
  Search(const OptimizerConfig& cfg, const EvalFn& eval, OptimizeResult& result)
      : cfg_(cfg), eval_(eval), result_(result) {}

  Measurement measure(const std::vector<double>& params) {
    const Key k = quantize(params);
    auto it = cache_.find(k);
    if (it != cache_.end()) return it->second;
    const Measurement m = eval_(params);
    cache_.emplace(k, m);
    seen_.emplace_back(params, m);
    ++result_.evaluations;
    return m;
  }

  void trace(std::size_t iteration, double factor, const std::vector<double>& params, const Measurement& m,
             const char* status) {
    result_.trace.push_back({iteration, factor, params, m, status});
  }

  // Returns false if the move leaves the parameter where it is.
  bool move(std::vector<double>& params, std::size_t i, double factor, bool tighten) const {
    const double before = params[i];
    params[i] = tighten ? std::min(1.0, before * factor) : std::max(cfg_.min_value, before / factor);
    return quantize(std::span<const double>(&params[i], 1)) != quantize(std::span<const double>(&before, 1));
  }

  void finish() {
    const std::pair<std::vector<double>, Measurement>* best = nullptr;
    for (const auto& entry : seen_) {
      if (entry.second.entropy > cfg_.target_entropy) continue;
      if (!best || entry.second.time < best->second.time ||
          (entry.second.time == best->second.time && entry.second.entropy < best->second.entropy))
        best = &entry;
    }
    if (!best) {
      for (const auto& entry : seen_) {
        if (!best || std::abs(entry.second.entropy - cfg_.target_entropy) <
                         std::abs(best->second.entropy - cfg_.target_entropy))
          best = &entry;
      }
    }
    result_.params = best->first;
    result_.m = best->second;
  }

 private:
  const OptimizerConfig& cfg_;
  const EvalFn& eval_;
  OptimizeResult& result_;
  std::map<Key, Measurement> cache_;
  std::vector<std::pair<std::vector<double>, Measurement>> seen_;
};

struct Candidate {
  std::vector<double> params;
  Measurement m;
  bool pareto;
  double ratio;
};

}  // namespace

OptimizeResult optimize(const OptimizerConfig& cfg, std::vector<double> initial, const EvalFn& eval) {
  if (cfg.anneal_factors.empty()) throw Error("no anneal factors");
  for (std::size_t i = 0; i < cfg.anneal_factors.size(); ++i) {
    if (!(cfg.anneal_factors[i] > 1.0)) throw Error("anneal factors must exceed 1");
    if (i && !(cfg.anneal_factors[i] < cfg.anneal_factors[i - 1])) throw Error("anneal factors must decrease");
  }
  if (!(cfg.denominator_floor > 0.0)) throw Error("denominator floor must be positive");
  for (double p : initial)
    if (!(p >= 0.0 && p <= 1.0)) throw Error("initial threshold outside [0,1]");

  OptimizeResult result;
  Search search(cfg, eval, result);
  std::vector<double> current = std::move(initial);
  std::size_t iteration = 0;

  for (double factor : cfg.anneal_factors) {
    std::set<Key> visited;
    while (visited.insert(quantize(current)).second) {
      if (iteration >= cfg.max_iterations) {
        result.hit_iteration_cap = true;
        break;
      }
      ++iteration;
      const Measurement base = search.measure(current);
      search.trace(iteration, factor, current, base, "base");
      const bool lower_entropy = base.entropy > cfg.target_entropy;
      const bool tighten = cfg.figure_direction ? lower_entropy : !lower_entropy;

      // A move is wrong-way when it makes no progress on the quantity being
      // traded for: entropy while above target, time otherwise.
      auto wrong_way = [&](const Measurement& m) {
        const bool both_worse = m.entropy > base.entropy && m.time > base.time;
        const bool progress = lower_entropy ? m.entropy < base.entropy : m.time < base.time;
        return both_worse || !progress;
      };
      auto pareto = [&](const Measurement& m) {
        return m.entropy <= base.entropy && m.time <= base.time && (m.entropy < base.entropy || m.time < base.time);
      };

      std::vector<Candidate> candidates;
      for (std::size_t i = 0; i < current.size(); ++i) {
        if (current[i] <= 0.0) continue;
        std::vector<double> trial = current;
        if (!search.move(trial, i, factor, tighten)) continue;
        Measurement m = search.measure(trial);
        search.trace(iteration, factor, trial, m, "candidate");
        if (!pareto(m) && wrong_way(m)) {
          trial = current;
          if (!search.move(trial, i, factor, !tighten)) continue;
          m = search.measure(trial);
          search.trace(iteration, factor, trial, m, "inverse");
          if (!pareto(m) && wrong_way(m)) continue;
        }
        if (pareto(m)) {
          candidates.push_back({trial, m, true, 0.0});
          continue;
        }
        double num;
        double den;
        double floor;
        if (lower_entropy) {
          num = base.entropy - m.entropy;
          den = m.time - base.time;
          floor = cfg.denominator_floor * std::abs(base.time);
        } else {
          num = base.time - m.time;
          den = m.entropy - base.entropy;
          floor = cfg.denominator_floor * std::abs(base.entropy);
        }
        if (!(num > 0.0) || !(den > 0.0) || den < floor) continue;
        candidates.push_back({trial, m, false, num / den});
      }

      const Candidate* chosen = nullptr;
      for (const auto& c : candidates)
        if (c.pareto && (!chosen || c.m.time < chosen->m.time)) chosen = &c;
      if (!chosen) {
        for (const auto& c : candidates)
          if (!chosen || c.ratio > chosen->ratio) chosen = &c;
      }
      if (chosen) {
        search.trace(iteration, factor, chosen->params, chosen->m, "accepted");
        current = chosen->params;
      }
    }
    if (result.hit_iteration_cap) break;
  }

  result.iterations = iteration;
  search.finish();
  result.trace.push_back({iteration, cfg.anneal_factors.back(), result.params, result.m, "final"});
  return result;
}

void write_trace(std::ostream& out, const OptimizeResult& result, std::span<const std::string> names) {
  out << "iter\tfactor";
  for (const auto& n : names) out << '\t' << n;
  out << "\tentropy\tproductions\tstatus\n";
  for (const auto& row : result.trace) {
    out << row.iteration << '\t' << format_double(row.factor);
    for (double p : row.params) out << '\t' << format_double(p);
    out << '\t' << format_double(row.m.entropy) << '\t' << format_double(row.m.time) << '\t' << row.status << '\n';
  }
}

}  // namespace pcfgthresh
