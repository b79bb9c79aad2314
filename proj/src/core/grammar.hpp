#pragma once

#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "logprob.hpp"
#include "symbol.hpp"
#include "tree.hpp"

namespace pcfgthresh {

struct BinaryRule {
  SymbolId parent;
  SymbolId left;   // terminal or nonterminal
  SymbolId right;  // terminal or nonterminal
  LogProb logp;
};

// Nonterminal child; the child never heads another unary rule.
struct UnaryRule {
  SymbolId parent;
  SymbolId child;
  LogProb logp;
};

struct LexicalRule {
  SymbolId parent;
  SymbolId terminal;
  LogProb logp;
};

struct StartSymbol {
  SymbolId symbol;
  LogProb logp;
};

// Rules and priors by name, before interning. Used to assemble a Grammar
// from a file, from induction, or by hand in tests.
struct GrammarSpec {
  struct Rule {
    std::string parent;
    std::vector<std::string> children;  // one or two
    LogProb logp;
  };
  std::vector<Rule> rules;
  std::vector<std::pair<std::string, LogProb>> priors;
  std::vector<std::pair<std::string, LogProb>> starts;
};

// Immutable PCFG in log2 space with the indexes the CKY inner loop needs.
//
// Terminals and nonterminals share one symbol table; a symbol is a
// nonterminal iff it heads some rule. Priors cover every symbol that can
// occupy a chart cell, terminals included. Binary rules are stored sorted by
// (left, right, parent), so a rule's index orders it the same way the inner
// loop visits it.
class Grammar {
 public:
  struct RightGroup {
    SymbolId right;
    std::uint32_t begin;
    std::uint32_t end;
  };

  // Validates and indexes. Throws FormatError on structural problems
  // (unary chains, missing priors, probabilities outside (0,1], unnormalized
  // parents beyond `sum_tolerance`).
  explicit Grammar(const GrammarSpec& spec, double sum_tolerance = 1e-6);

  const SymbolTable& symbols() const { return symbols_; }
  std::size_t symbol_count() const { return symbols_.size(); }
  const std::string& name(SymbolId id) const { return symbols_.name(id); }
  SymbolId find(std::string_view name) const { return symbols_.find(name); }
  SymbolId find_terminal(std::string_view name) const;
  bool is_terminal(SymbolId id) const { return kinds_[id] == SymbolKind::terminal; }
  const Symbol& structure(SymbolId nonterminal) const { return structure_[nonterminal]; }

  std::span<const BinaryRule> binary_rules() const { return binary_; }
  std::span<const UnaryRule> unary_rules() const { return unary_; }
  std::span<const LexicalRule> lexical_rules() const { return lexical_; }

  // Right children paired with `left`, ascending, each with its rule range.
  std::span<const RightGroup> rights_for(SymbolId left) const;
  // Unary rules whose child is `child`, rule indexes [begin, end).
  std::pair<std::uint32_t, std::uint32_t> unary_range(SymbolId child) const;
  std::pair<std::uint32_t, std::uint32_t> lexical_range(SymbolId terminal) const;

  LogProb prior(SymbolId id) const { return priors_[id]; }
  std::span<const StartSymbol> starts() const { return starts_; }
  LogProb start_logp(SymbolId id) const { return start_logp_[id]; }

  std::vector<SymbolId> nonterminals() const;
  std::vector<SymbolId> terminal_ids() const;

  // Largest |sum - 1| of rule probabilities over parents, and of priors.
  double max_rule_sum_error() const;
  double prior_sum_error() const;

  GrammarSpec to_spec() const;

 private:
  SymbolTable symbols_;
  std::vector<SymbolKind> kinds_;
  std::vector<Symbol> structure_;
  std::vector<BinaryRule> binary_;
  std::vector<UnaryRule> unary_;
  std::vector<LexicalRule> lexical_;
  std::vector<std::vector<RightGroup>> rights_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> unary_ranges_;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> lexical_ranges_;
  std::vector<LogProb> priors_;
  std::vector<StartSymbol> starts_;
  std::vector<LogProb> start_logp_;
};

using GrammarPtr = std::shared_ptr<const Grammar>;

// Relative-frequency prior of each node label (internal and leaf) over all
// nodes of the corpus. Throws FormatError on an empty corpus.
std::vector<std::pair<std::string, double>> compute_priors(std::span<const Tree> trees);

// Reads off rules from binarized (or otherwise transformed) trees with
// relative-frequency probabilities, attaches priors and the distribution of
// root labels. Throws FormatError on an empty corpus or unbinarized trees.
Grammar induce_grammar(std::span<const Tree> trees);

enum class Transform { six_gram, terminal_prime, coarse };
Transform parse_transform(std::string_view name);
std::vector<Tree> apply_transform(std::span<const Tree> trees, Transform transform);

// Text format, one record per line, '#' comments:
//   S start [logprob]   B parent left right logprob
//   P symbol logprob    U parent child logprob
void write_grammar(std::ostream& out, const Grammar& grammar);
Grammar read_grammar(std::istream& in, std::string_view source = "<grammar>");
Grammar read_grammar_file(const std::string& path);
void write_grammar_file(const std::string& path, const Grammar& grammar);

// Shortest round-trip decimal form.
std::string format_double(double value);

}  // namespace pcfgthresh
