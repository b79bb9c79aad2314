#include "multipass.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <tuple>

#include "errors.hpp"

namespace pcfgthresh {

LogProb node_share(const Chart& chart, const Node& node) {
  return node.outside + node.inside - chart.total_inside();
}

LogProb instance_share(const Chart& chart, const ProductionInstance& inst) {
  return inst.combined() - chart.total_inside();
}

SurvivorTable::SurvivorTable(const Chart& chart, double node_ratio, double prod_ratio) : n_(chart.size()) {
  if (!chart.has_outside()) throw Error("survivor table needs outside scores");
  const LogProb total = chart.total_inside();
  const LogProb node_bound = to_log(node_ratio);
  const LogProb prod_bound = to_log(prod_ratio);
  nodes_.resize(static_cast<std::size_t>(n_) * n_);
  instances_.resize(nodes_.size());
  for (std::uint32_t len = 1; len <= n_; ++len) {
    for (std::uint32_t start = 0; start + len <= n_; ++start) {
      const Cell& cell = chart.cell(start, len);
      auto& keep = nodes_[cell_index(start, len)];
      keep.resize(cell.nodes.size());
      for (std::size_t i = 0; i < cell.nodes.size(); ++i) {
        const Node& node = cell.nodes[i];
        keep[i] = node.terminal || (node.active && !(node.outside + node.inside - total < node_bound));
        node_count_ += keep[i];
      }
    }
  }
  for (std::uint32_t len = 1; len <= n_; ++len) {
    for (std::uint32_t start = 0; start + len <= n_; ++start) {
      const Cell& cell = chart.cell(start, len);
      const auto& here = nodes_[cell_index(start, len)];
      auto& keep = instances_[cell_index(start, len)];
      keep.resize(cell.instances.size());
      for (std::size_t i = 0; i < cell.instances.size(); ++i) {
        const ProductionInstance& inst = cell.instances[i];
        bool ok = here[inst.parent] && !(inst.combined() - total < prod_bound);
        if (ok) {
          if (inst.kind == InstanceKind::binary) {
            ok = nodes_[cell_index(start, inst.split)][inst.left] &&
                 nodes_[cell_index(start + inst.split, len - inst.split)][inst.right];
          } else {
            ok = here[inst.left];
          }
        }
        keep[i] = ok;
        instance_count_ += ok;
      }
    }
  }
}

// ---------------------------------------------------------------------------

GatedExpansion::GatedExpansion(const Chart& previous, const SurvivorTable& survivors, const DescendantsMap& map)
    : prev_(previous), survivors_(survivors), map_(map), n_(previous.size()) {
  descendants_.resize(static_cast<std::size_t>(n_) * n_);
}

void GatedExpansion::set_ancestor(const Chart& chart, SymbolId symbol, std::uint32_t prev_node) {
  if (ancestor_.empty()) ancestor_.assign(chart.grammar().symbol_count(), kNoIndex);
  std::uint32_t& slot = ancestor_[symbol];
  if (slot == kNoIndex) {
    slot = prev_node;
    touched_.push_back(symbol);
  } else if (slot != prev_node) {
    throw ModelError("second-pass symbol '" + chart.grammar().name(symbol) +
                     "' descends from two first-pass nodes in one cell");
  }
}

void GatedExpansion::phase1(const Chart& chart, std::uint32_t start, std::uint32_t len,
                            std::vector<PendingInstance>& out, ParseStats& stats) {
  const Grammar& g = chart.grammar();
  const Cell& prev_cell = prev_.cell(start, len);
  if (len == 1) {
    const SymbolId t = chart.terminals()[start];
    for (std::uint32_t i = 0; i < prev_cell.nodes.size(); ++i)
      if (prev_cell.nodes[i].terminal) set_ancestor(chart, t, i);
    const auto [b, e] = g.lexical_range(t);
    const auto rules = g.lexical_rules();
    for (std::uint32_t i = 0; i < prev_cell.instances.size(); ++i) {
      const ProductionInstance& inst = prev_cell.instances[i];
      if (inst.kind != InstanceKind::lexical || !survivors_.instance(start, len, i)) continue;
      const SymbolId x = prev_cell.nodes[inst.parent].symbol;
      for (std::uint32_t r = b; r < e; ++r) {
        if (!map_.licenses(x, rules[r].parent)) continue;
        ++stats.productions;
        out.push_back({InstanceKind::lexical, rules[r].parent, r, 0, t, 0, rules[r].logp});
        set_ancestor(chart, rules[r].parent, inst.parent);
      }
    }
  } else {
    const auto rules = g.binary_rules();
    for (std::uint32_t i = 0; i < prev_cell.instances.size(); ++i) {
      const ProductionInstance& inst = prev_cell.instances[i];
      if (inst.kind != InstanceKind::binary || !survivors_.instance(start, len, i)) continue;
      const SymbolId x = prev_cell.nodes[inst.parent].symbol;
      const Cell& left = chart.cell(start, inst.split);
      const Cell& right = chart.cell(start + inst.split, len - inst.split);
      const auto& lefts = descendants_[cell_index(start, inst.split)][inst.left];
      const auto& rights = descendants_[cell_index(start + inst.split, len - inst.split)][inst.right];
      for (std::uint32_t li : lefts) {
        const Node& l = left.nodes[li];
        if (!l.active) continue;
        const auto groups = g.rights_for(l.symbol);
        for (std::uint32_t ri : rights) {
          const Node& r = right.nodes[ri];
          if (!r.active) continue;
          auto it = std::lower_bound(groups.begin(), groups.end(), r.symbol,
                                     [](const Grammar::RightGroup& grp, SymbolId s) { return grp.right < s; });
          if (it == groups.end() || it->right != r.symbol) continue;
          for (std::uint32_t k = it->begin; k < it->end; ++k) {
            if (!map_.licenses(x, rules[k].parent)) continue;
            ++stats.productions;
            out.push_back({InstanceKind::binary, rules[k].parent, k, inst.split, li, ri,
                           rules[k].logp + l.inside + r.inside});
            set_ancestor(chart, rules[k].parent, inst.parent);
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const PendingInstance& a, const PendingInstance& b) {
    return std::tie(a.split, a.rule) < std::tie(b.split, b.rule);
  });
}

void GatedExpansion::unary(const Chart& chart, std::uint32_t start, std::uint32_t len,
                           std::span<const SymbolId> children, std::vector<PendingInstance>& out, ParseStats& stats) {
  const Grammar& g = chart.grammar();
  const auto rules = g.unary_rules();
  if (children.empty()) return;
  const Cell& prev_cell = prev_.cell(start, len);
  for (std::uint32_t i = 0; i < prev_cell.instances.size(); ++i) {
    const ProductionInstance& inst = prev_cell.instances[i];
    if (inst.kind != InstanceKind::unary || !survivors_.instance(start, len, i)) continue;
    const SymbolId x = prev_cell.nodes[inst.parent].symbol;
    for (SymbolId y : children) {
      if (ancestor_[y] != inst.left) continue;
      const auto [b, e] = g.unary_range(y);
      for (std::uint32_t r = b; r < e; ++r) {
        if (!map_.licenses(x, rules[r].parent)) continue;
        ++stats.productions;
        out.push_back({InstanceKind::unary, rules[r].parent, r, 0, y, 0, kLogZero});
        set_ancestor(chart, rules[r].parent, inst.parent);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const PendingInstance& a, const PendingInstance& b) { return a.rule < b.rule; });
}

void GatedExpansion::cell_done(const Chart& chart, std::uint32_t start, std::uint32_t len) {
  const Cell& cell = chart.cell(start, len);
  auto& table = descendants_[cell_index(start, len)];
  table.assign(prev_.cell(start, len).nodes.size(), {});
  for (std::uint32_t i = 0; i < cell.nodes.size(); ++i) table[ancestor_[cell.nodes[i].symbol]].push_back(i);
  for (SymbolId s : touched_) ancestor_[s] = kNoIndex;
  touched_.clear();
}

// ---------------------------------------------------------------------------

Chart second_pass(const PassSpec& spec, const Chart& previous, const SurvivorTable& survivors,
                  std::vector<SymbolId> terminals, const ParseOptions& opt) {
  if (!spec.descendants) throw Error("a later pass needs a descendants map");
  GatedExpansion gated(previous, survivors, *spec.descendants);
  return parse_once(spec.grammar, std::move(terminals), spec.thresholds, opt, gated);
}

namespace {

bool loosenable(const ThresholdSet& t, bool gates) {
  return t.beam > 0.0 || t.global > 0.0 || (gates && (t.mp_node > 0.0 || t.mp_prod > 0.0));
}

}  // namespace

Chart run_passes(std::span<const PassSpec> passes, std::span<const std::string> words, const ParseOptions& opt) {
  if (passes.empty()) throw Error("no passes configured");
  const auto start_time = std::chrono::steady_clock::now();
  ParseStats total;
  auto finish = [&](Chart chart) {
    total.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
    chart.stats() = total;
    return chart;
  };
  // Ungated, unpruned parse with the last grammar.
  auto fallback = [&]() {
    Chart chart = parse_with_retry(passes.back().grammar, words, ThresholdSet{}, opt);
    total.productions += chart.stats().productions;
    ++total.retries;
    return finish(std::move(chart));
  };

  std::optional<Chart> prev;
  try {
    prev.emplace(parse_with_retry(passes.front().grammar, words, passes.front().thresholds, opt));
  } catch (const ModelError&) {
    if (passes.size() == 1) throw;
    // The first grammar cannot cover the sentence; the last one may.
    return fallback();
  }
  total.productions += prev->stats().productions;
  total.retries += prev->stats().retries;
  if (prev->failed()) return finish(std::move(*prev));

  for (std::size_t k = 1; k < passes.size(); ++k) {
    const PassSpec& spec = passes[k];
    validate(spec.thresholds);
    const auto terminals = lookup_terminals(*spec.grammar, words);
    prev->inside_outside();
    PassSpec attempt = spec;
    std::optional<SurvivorTable> survivors;
    std::uint32_t tries = 0;
    while (true) {
      if (!survivors || opt.retry.loosen_gates)
        survivors.emplace(*prev, attempt.thresholds.mp_node, attempt.thresholds.mp_prod);
      Chart chart = second_pass(attempt, *prev, *survivors, terminals, opt);
      total.productions += chart.stats().productions;
      if (!chart.failed() || !opt.retry.enabled) {
        total.retries += tries;
        if (chart.failed()) return finish(std::move(chart));
        prev.emplace(std::move(chart));
        break;
      }
      if (!loosenable(attempt.thresholds, opt.retry.loosen_gates)) {
        total.retries += tries;
        return fallback();
      }
      ++tries;
      if (tries <= opt.retry.max_retries) {
        attempt.thresholds = scaled(attempt.thresholds, opt.retry.divisor, opt.retry.loosen_gates);
      } else {
        attempt.thresholds.beam = 0.0;
        attempt.thresholds.global = 0.0;
        if (opt.retry.loosen_gates) attempt.thresholds.mp_node = attempt.thresholds.mp_prod = 0.0;
      }
    }
  }
  return finish(std::move(*prev));
}

}  // namespace pcfgthresh
