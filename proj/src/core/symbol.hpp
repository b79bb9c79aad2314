#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace pcfgthresh {

using SymbolId = std::uint32_t;
inline constexpr SymbolId kNoSymbol = 0xffffffffu;

enum class SymbolKind : std::uint8_t { terminal, nonterminal };

// Structured nonterminal label.
//
// Text form:  base ['] [<s1|s2|...>] [^U]
//
//   '      chain continuation symbol introduced by binarization (X')
//   <...>  up to five following sibling labels (the 6-gram subscript)
//   ^U     post-unary variant: the child of a unary rule; such a symbol
//          never heads another unary rule
//
// A base may be a '+'-joined compound for a collapsed unary chain.
struct Symbol {
  static constexpr std::size_t kMaxSubscript = 5;

  std::string base;
  std::vector<std::string> subscript;
  bool primed = false;
  bool post_unary = false;

  std::string name() const;
  // Throws FormatError on malformed names.
  static Symbol parse(std::string_view text);

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

// Characters that may not appear in an original nonterminal label.
bool has_reserved_label_chars(std::string_view label);

// Nonterminal name used by the terminal and terminal-prime grammars for a
// node whose span starts with `terminal`: the uppercase form, or the
// terminal with a trailing '_' when uppercasing would not change it.
std::string terminal_category(std::string_view terminal);

// Bidirectional string <-> dense id table.
class SymbolTable {
 public:
  SymbolId intern(std::string_view name);
  SymbolId find(std::string_view name) const;  // kNoSymbol if absent
  const std::string& name(SymbolId id) const { return names_[id]; }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, SymbolId> ids_;
};

}  // namespace pcfgthresh
