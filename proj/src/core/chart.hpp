#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "grammar.hpp"
#include "logprob.hpp"
#include "tree.hpp"

namespace pcfgthresh {

inline constexpr std::uint32_t kNoIndex = 0xffffffffu;

struct ParseStats {
  std::uint64_t productions = 0;  // non-zero-probability rule applications examined
  std::uint32_t retries = 0;
  double elapsed = 0.0;  // seconds

  ParseStats& operator+=(const ParseStats& o) {
    productions += o.productions;
    retries += o.retries;
    elapsed += o.elapsed;
    return *this;
  }
};

// A symbol over a span. Length-1 cells also hold one terminal item for the
// word itself (inside = log 1); it can be a child of binary rules and is
// never pruned.
struct Node {
  SymbolId symbol = kNoSymbol;
  LogProb inside = kLogZero;
  LogProb outside = kLogZero;
  LogProb viterbi = kLogZero;
  LogProb prior = kLogZero;
  std::uint32_t best = kNoIndex;  // instance index of the Viterbi derivation
  bool active = true;
  bool terminal = false;
};

enum class InstanceKind : std::uint8_t { lexical, binary, unary };

// One rule application inside a cell.
//   lexical: child = the cell's terminal item (node index in this cell)
//   binary:  left = node in cell (start, split), right = node in
//            (start + split, len - split)
//   unary:   left = child node in this cell
struct ProductionInstance {
  InstanceKind kind;
  std::uint32_t parent;  // node index in this cell
  std::uint32_t rule;    // index into the grammar's rules of this kind
  std::uint32_t split;   // left child length; 0 unless binary
  std::uint32_t left;
  std::uint32_t right;
  LogProb inside;                // rule probability times children's inside
  LogProb outside = kLogZero;    // outside of the parent
  LogProb combined() const { return outside + inside; }
};

struct Cell {
  std::vector<Node> nodes;  // sorted by symbol
  // Phase-1 instances (lexical or binary) sorted by (split, rule), then
  // unary instances sorted by rule.
  std::vector<ProductionInstance> instances;
  bool built = false;

  std::uint32_t find(SymbolId symbol) const;  // kNoIndex if absent
};

// An instance before its parent has a node index: the parent is given by
// symbol. For lexical and unary instances `left` holds the child symbol.
struct PendingInstance {
  InstanceKind kind;
  SymbolId parent;
  std::uint32_t rule;
  std::uint32_t split;
  std::uint32_t left;
  std::uint32_t right;
  LogProb inside;  // filled for binary instances only
};

class Chart;

// Decides which rule applications a cell is built from. The default
// expansion tries every rule over every pair of active child nodes; the
// gated second pass of multi-pass parsing supplies its own.
class Expansion {
 public:
  virtual ~Expansion() = default;
  // Appends lexical (len 1) or binary instances, sorted by (split, rule).
  virtual void phase1(const Chart& chart, std::uint32_t start, std::uint32_t len, std::vector<PendingInstance>& out,
                      ParseStats& stats) = 0;
  // Appends unary instances over the given phase-1 nonterminals, sorted by
  // rule index.
  virtual void unary(const Chart& chart, std::uint32_t start, std::uint32_t len, std::span<const SymbolId> children,
                     std::vector<PendingInstance>& out, ParseStats& stats) = 0;
  virtual void cell_done(const Chart& /*chart*/, std::uint32_t /*start*/, std::uint32_t /*len*/) {}
};

class FullExpansion : public Expansion {
 public:
  void phase1(const Chart& chart, std::uint32_t start, std::uint32_t len, std::vector<PendingInstance>& out,
              ParseStats& stats) override;
  void unary(const Chart& chart, std::uint32_t start, std::uint32_t len, std::span<const SymbolId> children,
             std::vector<PendingInstance>& out, ParseStats& stats) override;
};

struct ChartHooks {
  std::function<void(Chart&, std::uint32_t start, std::uint32_t len)> on_cell;
  std::function<void(Chart&, std::uint32_t len)> on_length;
};

class Chart {
 public:
  Chart(GrammarPtr grammar, std::vector<SymbolId> terminals);

  const Grammar& grammar() const { return *grammar_; }
  const GrammarPtr& grammar_ptr() const { return grammar_; }
  std::uint32_t size() const { return n_; }
  std::span<const SymbolId> terminals() const { return terminals_; }

  // start is 0-based, len in 1..n.
  const Cell& cell(std::uint32_t start, std::uint32_t len) const { return cells_[index(start, len)]; }
  Cell& cell(std::uint32_t start, std::uint32_t len) { return cells_[index(start, len)]; }

  ParseStats& stats() { return stats_; }
  const ParseStats& stats() const { return stats_; }

  // Builds every cell bottom-up, calling on_cell after each cell and
  // on_length after each length.
  void build(Expansion& expansion, const ChartHooks& hooks = {});

  // Sum over active start nodes of P(start) * inside; -inf when none.
  LogProb total_inside() const;
  bool failed() const { return total_inside() == kLogZero; }
  // Bits; +inf on failure.
  double entropy() const;

  // Top-down outside pass over the built forest. Requires a parse.
  void inside_outside();
  bool has_outside() const { return has_outside_; }

  // Best derivation (binarized labels, bare leaves) and its log probability
  // including the start probability. Throws ModelError on failure.
  Tree viterbi_tree() const;
  LogProb viterbi_logprob() const;

 private:
  std::size_t index(std::uint32_t start, std::uint32_t len) const {
    return static_cast<std::size_t>(len - 1) * n_ + start;
  }
  void build_cell(Expansion& expansion, std::uint32_t start, std::uint32_t len);
  std::uint32_t best_root() const;
  Tree extract(std::uint32_t start, std::uint32_t len, std::uint32_t node) const;

  GrammarPtr grammar_;
  std::uint32_t n_;
  std::vector<SymbolId> terminals_;
  std::vector<Cell> cells_;
  ParseStats stats_;
  bool has_outside_ = false;
  // Dense symbol -> node slot scratch used while assembling a cell.
  std::vector<std::uint32_t> slot_;
  std::vector<PendingInstance> pending_;
  std::vector<PendingInstance> pending_unary_;
  std::vector<SymbolId> phase1_symbols_;
};

// Maps words to terminal ids; throws ModelError naming the first unknown one.
std::vector<SymbolId> lookup_terminals(const Grammar& grammar, std::span<const std::string> words);

// Splits a sentence line on whitespace.
std::vector<std::string> split_words(std::string_view line);

// Unpruned single-pass parse.
Chart parse_exhaustive(GrammarPtr grammar, std::span<const std::string> words);

}  // namespace pcfgthresh
