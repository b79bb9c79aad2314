#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "chart.hpp"
#include "descendants.hpp"
#include "thresholding.hpp"

namespace pcfgthresh {

struct PassSpec {
  GrammarPtr grammar;
  ThresholdSet thresholds;
  // Links this pass to the previous pass's grammar; null on the first pass.
  std::shared_ptr<const DescendantsMap> descendants;
};

// Which nodes and production instances of a parsed chart the next pass may
// build from, indexed like the chart: [cell][node] and [cell][instance],
// with cells ordered by (len, start).
class SurvivorTable {
 public:
  // The chart must carry outside scores. A node survives when it is active
  // and its share alpha*beta/total reaches `node_ratio`; an instance when
  // alpha(parent)*inside/total reaches `prod_ratio` and its parent and
  // children survive. Terminal items always survive.
  SurvivorTable(const Chart& chart, double node_ratio, double prod_ratio);

  bool node(std::uint32_t start, std::uint32_t len, std::uint32_t index) const {
    return nodes_[cell_index(start, len)][index];
  }
  bool instance(std::uint32_t start, std::uint32_t len, std::uint32_t index) const {
    return instances_[cell_index(start, len)][index];
  }
  std::size_t node_count() const { return node_count_; }
  std::size_t instance_count() const { return instance_count_; }

 private:
  std::size_t cell_index(std::uint32_t start, std::uint32_t len) const {
    return static_cast<std::size_t>(len - 1) * n_ + start;
  }
  std::uint32_t n_;
  std::vector<std::vector<bool>> nodes_;
  std::vector<std::vector<bool>> instances_;
  std::size_t node_count_ = 0;
  std::size_t instance_count_ = 0;
};

// Posterior share log2(alpha*beta/total) of a node, and log2 of an
// instance's combined score over the total.
LogProb node_share(const Chart& chart, const Node& node);
LogProb instance_share(const Chart& chart, const ProductionInstance& inst);

// Builds only descendants of surviving previous-pass instances: for a
// surviving X -> XL XR at split k, every L descending from XL and R from XR
// with a rule P -> L R where X licenses P. Lexical and unary levels are
// gated the same way. Throws ModelError if a node of a cell would trace back
// to two different previous-pass nodes.
class GatedExpansion : public Expansion {
 public:
  GatedExpansion(const Chart& previous, const SurvivorTable& survivors, const DescendantsMap& map);

  void phase1(const Chart& chart, std::uint32_t start, std::uint32_t len, std::vector<PendingInstance>& out,
              ParseStats& stats) override;
  void unary(const Chart& chart, std::uint32_t start, std::uint32_t len, std::span<const SymbolId> children,
             std::vector<PendingInstance>& out, ParseStats& stats) override;
  void cell_done(const Chart& chart, std::uint32_t start, std::uint32_t len) override;

 private:
  std::size_t cell_index(std::uint32_t start, std::uint32_t len) const {
    return static_cast<std::size_t>(len - 1) * n_ + start;
  }
  void set_ancestor(const Chart& chart, SymbolId symbol, std::uint32_t prev_node);

  const Chart& prev_;
  const SurvivorTable& survivors_;
  const DescendantsMap& map_;
  std::uint32_t n_;
  // Per cell: previous-pass node index -> this pass's node indexes.
  std::vector<std::vector<std::vector<std::uint32_t>>> descendants_;
  // Ancestor of each symbol in the cell under construction.
  std::vector<std::uint32_t> ancestor_;
  std::vector<SymbolId> touched_;
};

// One gated attempt at the given thresholds.
Chart second_pass(const PassSpec& spec, const Chart& previous, const SurvivorTable& survivors,
                  std::vector<SymbolId> terminals, const ParseOptions& opt);

// Runs the passes in order. The first pass uses the single-pass retry
// policy. A later pass that fails retries with its beam and global ratios
// divided by the divisor (gates too if the policy says so), then once with
// them at 0; if the gated search still finds nothing, the last grammar is
// parsed ungated and unpruned. Statistics of every attempt of every pass
// are summed into the returned chart's stats.
Chart run_passes(std::span<const PassSpec> passes, std::span<const std::string> words, const ParseOptions& opt);

}  // namespace pcfgthresh
