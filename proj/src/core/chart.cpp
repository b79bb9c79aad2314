#include "chart.hpp"

#include <algorithm>

#include "errors.hpp"

namespace pcfgthresh {

namespace {

constexpr double kTieTolerance = 1e-12;

}  // namespace

std::uint32_t Cell::find(SymbolId symbol) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), symbol,
                             [](const Node& n, SymbolId s) { return n.symbol < s; });
  if (it == nodes.end() || it->symbol != symbol) return kNoIndex;
  return static_cast<std::uint32_t>(it - nodes.begin());
}

// ---------------------------------------------------------------------------
// Default expansion: for each left node, for each right node, each rule.

void FullExpansion::phase1(const Chart& chart, std::uint32_t start, std::uint32_t len,
                           std::vector<PendingInstance>& out, ParseStats& stats) {
  const Grammar& g = chart.grammar();
  if (len == 1) {
    const SymbolId t = chart.terminals()[start];
    const auto [b, e] = g.lexical_range(t);
    const auto rules = g.lexical_rules();
    for (std::uint32_t r = b; r < e; ++r) {
      ++stats.productions;
      out.push_back({InstanceKind::lexical, rules[r].parent, r, 0, t, 0, rules[r].logp});
    }
    return;
  }
  const auto rules = g.binary_rules();
  for (std::uint32_t split = 1; split < len; ++split) {
    const Cell& left = chart.cell(start, split);
    const Cell& right = chart.cell(start + split, len - split);
    for (std::uint32_t li = 0; li < left.nodes.size(); ++li) {
      const Node& l = left.nodes[li];
      if (!l.active) continue;
      const auto groups = g.rights_for(l.symbol);
      std::size_t gi = 0;
      std::size_t ri = 0;
      while (gi < groups.size() && ri < right.nodes.size()) {
        const SymbolId want = groups[gi].right;
        const SymbolId have = right.nodes[ri].symbol;
        if (want < have) {
          ++gi;
        } else if (have < want) {
          ++ri;
        } else {
          const Node& r = right.nodes[ri];
          if (r.active) {
            for (std::uint32_t k = groups[gi].begin; k < groups[gi].end; ++k) {
              ++stats.productions;
              out.push_back({InstanceKind::binary, rules[k].parent, k, split, li, static_cast<std::uint32_t>(ri),
                             rules[k].logp + l.inside + r.inside});
            }
          }
          ++gi;
          ++ri;
        }
      }
    }
  }
}

void FullExpansion::unary(const Chart& chart, std::uint32_t, std::uint32_t, std::span<const SymbolId> children,
                          std::vector<PendingInstance>& out, ParseStats& stats) {
  const Grammar& g = chart.grammar();
  const auto rules = g.unary_rules();
  for (SymbolId child : children) {
    const auto [b, e] = g.unary_range(child);
    for (std::uint32_t r = b; r < e; ++r) {
      ++stats.productions;
      out.push_back({InstanceKind::unary, rules[r].parent, r, 0, child, 0, kLogZero});
    }
  }
}

// ---------------------------------------------------------------------------
// Chart

Chart::Chart(GrammarPtr grammar, std::vector<SymbolId> terminals)
    : grammar_(std::move(grammar)), n_(static_cast<std::uint32_t>(terminals.size())), terminals_(std::move(terminals)) {
  if (n_ == 0) throw ModelError("empty sentence");
  cells_.resize(static_cast<std::size_t>(n_) * n_);
  slot_.assign(grammar_->symbol_count(), kNoIndex);
}

void Chart::build(Expansion& expansion, const ChartHooks& hooks) {
  for (std::uint32_t len = 1; len <= n_; ++len) {
    for (std::uint32_t start = 0; start + len <= n_; ++start) {
      build_cell(expansion, start, len);
      if (hooks.on_cell) hooks.on_cell(*this, start, len);
    }
    if (hooks.on_length) hooks.on_length(*this, len);
  }
}

void Chart::build_cell(Expansion& expansion, std::uint32_t start, std::uint32_t len) {
  const Grammar& g = *grammar_;
  Cell& target = cells_[index(start, len)];
  target.nodes.clear();
  target.instances.clear();
  pending_.clear();
  pending_unary_.clear();
  phase1_symbols_.clear();

  expansion.phase1(*this, start, len, pending_, stats_);
  for (const auto& p : pending_) phase1_symbols_.push_back(p.parent);
  std::sort(phase1_symbols_.begin(), phase1_symbols_.end());
  phase1_symbols_.erase(std::unique(phase1_symbols_.begin(), phase1_symbols_.end()), phase1_symbols_.end());
  expansion.unary(*this, start, len, phase1_symbols_, pending_unary_, stats_);

  std::vector<SymbolId> symbols = phase1_symbols_;
  for (const auto& p : pending_unary_) symbols.push_back(p.parent);
  if (len == 1) symbols.push_back(terminals_[start]);
  std::sort(symbols.begin(), symbols.end());
  symbols.erase(std::unique(symbols.begin(), symbols.end()), symbols.end());

  target.nodes.resize(symbols.size());
  for (std::uint32_t i = 0; i < symbols.size(); ++i) {
    Node& node = target.nodes[i];
    node.symbol = symbols[i];
    node.prior = g.prior(symbols[i]);
    slot_[symbols[i]] = i;
  }
  if (len == 1) {
    Node& item = target.nodes[slot_[terminals_[start]]];
    item.terminal = true;
    item.inside = kLogOne;
    item.viterbi = kLogOne;
  }

  auto add = [&](const ProductionInstance& inst, LogProb viterbi) {
    Node& parent = target.nodes[inst.parent];
    parent.inside = log_add(parent.inside, inst.inside);
    if (viterbi > parent.viterbi + kTieTolerance || parent.best == kNoIndex) {
      parent.viterbi = viterbi;
      parent.best = static_cast<std::uint32_t>(target.instances.size());
    }
    target.instances.push_back(inst);
  };

  target.instances.reserve(pending_.size() + pending_unary_.size());
  for (const auto& p : pending_) {
    ProductionInstance inst{p.kind, slot_[p.parent], p.rule, p.split, p.left, p.right, p.inside};
    LogProb viterbi;
    if (p.kind == InstanceKind::lexical) {
      inst.left = slot_[p.left];
      viterbi = g.lexical_rules()[p.rule].logp;
    } else {
      viterbi = g.binary_rules()[p.rule].logp + cell(start, p.split).nodes[p.left].viterbi +
                cell(start + p.split, len - p.split).nodes[p.right].viterbi;
    }
    add(inst, viterbi);
  }
  for (const auto& p : pending_unary_) {
    const std::uint32_t child = slot_[p.left];
    const LogProb logp = g.unary_rules()[p.rule].logp;
    const Node& c = target.nodes[child];
    ProductionInstance inst{p.kind, slot_[p.parent], p.rule, 0, child, 0, logp + c.inside};
    add(inst, logp + c.viterbi);
  }

  for (SymbolId s : symbols) slot_[s] = kNoIndex;
  target.built = true;
  expansion.cell_done(*this, start, len);
}

LogProb Chart::total_inside() const {
  const Cell& root = cell(0, n_);
  LogProb total = kLogZero;
  for (const Node& node : root.nodes) {
    if (!node.active || node.terminal) continue;
    const LogProb p = grammar_->start_logp(node.symbol);
    if (p == kLogZero) continue;
    total = log_add(total, p + node.inside);
  }
  return total;
}

double Chart::entropy() const { return 0.0 - total_inside(); }

void Chart::inside_outside() {
  if (failed()) throw ModelError("no parse: outside probabilities undefined");
  const Grammar& g = *grammar_;
  for (auto& c : cells_)
    for (auto& node : c.nodes) node.outside = kLogZero;
  for (auto& node : cell(0, n_).nodes) {
    if (!node.active || node.terminal) continue;
    node.outside = g.start_logp(node.symbol);
  }

  for (std::uint32_t len = n_; len >= 1; --len) {
    for (std::uint32_t start = 0; start + len <= n_; ++start) {
      Cell& c = cell(start, len);
      // Unary parents are never unary children, so their outside is final
      // before any unary instance of the cell is visited.
      auto first_unary = std::find_if(c.instances.begin(), c.instances.end(),
                                      [](const ProductionInstance& i) { return i.kind == InstanceKind::unary; });
      for (auto it = first_unary; it != c.instances.end(); ++it) {
        it->outside = c.nodes[it->parent].outside;
        if (it->outside == kLogZero) continue;
        Node& child = c.nodes[it->left];
        child.outside = log_add(child.outside, it->outside + g.unary_rules()[it->rule].logp);
      }
      for (auto it = c.instances.begin(); it != first_unary; ++it) {
        it->outside = c.nodes[it->parent].outside;
        if (it->outside == kLogZero) continue;
        if (it->kind == InstanceKind::lexical) {
          Node& item = c.nodes[it->left];
          item.outside = log_add(item.outside, it->outside + g.lexical_rules()[it->rule].logp);
          continue;
        }
        const LogProb logp = g.binary_rules()[it->rule].logp;
        Node& l = cell(start, it->split).nodes[it->left];
        Node& r = cell(start + it->split, len - it->split).nodes[it->right];
        l.outside = log_add(l.outside, it->outside + logp + r.inside);
        r.outside = log_add(r.outside, it->outside + logp + l.inside);
      }
    }
  }
  has_outside_ = true;
}

std::uint32_t Chart::best_root() const {
  const Cell& root = cell(0, n_);
  std::uint32_t best = kNoIndex;
  LogProb best_score = kLogZero;
  for (std::uint32_t i = 0; i < root.nodes.size(); ++i) {
    const Node& node = root.nodes[i];
    if (!node.active || node.terminal) continue;
    const LogProb p = grammar_->start_logp(node.symbol);
    if (p == kLogZero) continue;
    const LogProb score = p + node.viterbi;
    if (best == kNoIndex || score > best_score + kTieTolerance) {
      best = i;
      best_score = score;
    }
  }
  return best;
}

LogProb Chart::viterbi_logprob() const {
  const std::uint32_t root = best_root();
  if (root == kNoIndex) return kLogZero;
  const Node& node = cell(0, n_).nodes[root];
  return grammar_->start_logp(node.symbol) + node.viterbi;
}

Tree Chart::viterbi_tree() const {
  const std::uint32_t root = best_root();
  if (root == kNoIndex) throw ModelError("no parse");
  return extract(0, n_, root);
}

Tree Chart::extract(std::uint32_t start, std::uint32_t len, std::uint32_t index) const {
  const Cell& c = cell(start, len);
  const Node& node = c.nodes[index];
  Tree out;
  out.label = grammar_->name(node.symbol);
  if (node.terminal) return out;
  const ProductionInstance& inst = c.instances[node.best];
  switch (inst.kind) {
    case InstanceKind::lexical:
    case InstanceKind::unary:
      out.children.push_back(extract(start, len, inst.left));
      break;
    case InstanceKind::binary:
      out.children.push_back(extract(start, inst.split, inst.left));
      out.children.push_back(extract(start + inst.split, len - inst.split, inst.right));
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<SymbolId> lookup_terminals(const Grammar& grammar, std::span<const std::string> words) {
  std::vector<SymbolId> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    const SymbolId id = grammar.find_terminal(w);
    if (id == kNoSymbol) throw ModelError("unknown terminal '" + w + "'");
    out.push_back(id);
  }
  return out;
}

std::vector<std::string> split_words(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Chart parse_exhaustive(GrammarPtr grammar, std::span<const std::string> words) {
  auto ids = lookup_terminals(*grammar, words);
  Chart chart(std::move(grammar), std::move(ids));
  FullExpansion full;
  chart.build(full);
  return chart;
}

}  // namespace pcfgthresh
