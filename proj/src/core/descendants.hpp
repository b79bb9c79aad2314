#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grammar.hpp"

namespace pcfgthresh {

// Which second-pass nonterminals a first-pass nonterminal licenses. The
// relation is many-to-many across the whole sentence; within one cell each
// second-pass node must trace back to a single first-pass node, which the
// second pass checks as it builds.
class DescendantsMap {
 public:
  // Pairs are (first-pass name, second-pass name); both must be
  // nonterminals of their grammars, and the grammars must share a terminal
  // alphabet. Throws FormatError / ModelError.
  DescendantsMap(const Grammar& first, const Grammar& second,
                 std::span<const std::pair<std::string, std::string>> pairs);

  // Second-pass ids licensed by `first_symbol`, ascending.
  std::span<const SymbolId> forward(SymbolId first_symbol) const { return forward_[first_symbol]; }
  bool licenses(SymbolId first_symbol, SymbolId second_symbol) const {
    return member_[static_cast<std::size_t>(first_symbol) * second_count_ + second_symbol];
  }
  // First-pass terminal id for a second-pass terminal id.
  SymbolId first_terminal(SymbolId second_terminal) const { return terminal_map_[second_terminal]; }

  std::size_t pair_count() const { return pairs_.size(); }
  const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

 private:
  std::size_t second_count_;
  std::vector<std::vector<SymbolId>> forward_;
  std::vector<bool> member_;
  std::vector<SymbolId> terminal_map_;
  std::vector<std::pair<std::string, std::string>> pairs_;
};

// Terminals that can begin a string derived from each symbol (a terminal's
// own set is itself). Indexed by symbol id, each sorted.
std::vector<std::vector<SymbolId>> first_terminals(const Grammar& grammar);

// Derives the map for a first-pass grammar built with `first_kind` from the
// same binarized trees as `second`:
//   terminal_prime  X licenses Y when X is the category of some terminal
//                   that can begin Y, with Y's prime and post-unary marks
//   coarse          X licenses Y when X is Y without its subscript
//   six_gram        identity
// Pairs whose first-pass symbol is absent from `first` are dropped.
DescendantsMap build_descendants(const Grammar& first, const Grammar& second, Transform first_kind);

// `D first second` per line, sorted.
void write_descendants(std::ostream& out, const DescendantsMap& map);
DescendantsMap read_descendants(std::istream& in, const Grammar& first, const Grammar& second,
                                std::string_view source = "<descendants>");
DescendantsMap read_descendants_file(const std::string& path, const Grammar& first, const Grammar& second);

}  // namespace pcfgthresh
