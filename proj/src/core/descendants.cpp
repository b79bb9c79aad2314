#include "descendants.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "errors.hpp"

namespace pcfgthresh {

DescendantsMap::DescendantsMap(const Grammar& first, const Grammar& second,
                               std::span<const std::pair<std::string, std::string>> pairs)
    : second_count_(second.symbol_count()) {
  std::set<std::string> first_terms;
  std::set<std::string> second_terms;
  for (SymbolId t : first.terminal_ids()) first_terms.insert(first.name(t));
  for (SymbolId t : second.terminal_ids()) second_terms.insert(second.name(t));
  if (first_terms != second_terms) throw ModelError("pass grammars have different terminal alphabets");
  terminal_map_.assign(second.symbol_count(), kNoSymbol);
  for (SymbolId t : second.terminal_ids()) terminal_map_[t] = first.find(second.name(t));

  forward_.assign(first.symbol_count(), {});
  member_.assign(first.symbol_count() * second_count_, false);
  std::set<std::pair<std::string, std::string>> unique(pairs.begin(), pairs.end());
  for (const auto& [a, b] : unique) {
    const SymbolId x = first.find(a);
    const SymbolId y = second.find(b);
    if (x == kNoSymbol || first.is_terminal(x))
      throw FormatError("'" + a + "' is not a nonterminal of the first-pass grammar");
    if (y == kNoSymbol || second.is_terminal(y))
      throw FormatError("'" + b + "' is not a nonterminal of the second-pass grammar");
    forward_[x].push_back(y);
    member_[static_cast<std::size_t>(x) * second_count_ + y] = true;
    pairs_.emplace_back(a, b);
  }
  for (auto& f : forward_) std::sort(f.begin(), f.end());
}

std::vector<std::vector<SymbolId>> first_terminals(const Grammar& g) {
  std::vector<std::set<SymbolId>> sets(g.symbol_count());
  for (SymbolId t : g.terminal_ids()) sets[t].insert(t);
  for (const auto& r : g.lexical_rules()) sets[r.parent].insert(r.terminal);
  bool changed = true;
  while (changed) {
    changed = false;
    auto merge = [&](SymbolId into, SymbolId from) {
      for (SymbolId t : sets[from]) changed |= sets[into].insert(t).second;
    };
    for (const auto& r : g.binary_rules()) merge(r.parent, r.left);
    for (const auto& r : g.unary_rules()) merge(r.parent, r.child);
  }
  std::vector<std::vector<SymbolId>> out(sets.size());
  for (std::size_t i = 0; i < sets.size(); ++i) out[i].assign(sets[i].begin(), sets[i].end());
  return out;
}

DescendantsMap build_descendants(const Grammar& first, const Grammar& second, Transform first_kind) {
  std::vector<std::pair<std::string, std::string>> pairs;
  auto add = [&](const std::string& a, SymbolId y) {
    const SymbolId x = first.find(a);
    if (x != kNoSymbol && !first.is_terminal(x)) pairs.emplace_back(a, second.name(y));
  };
  switch (first_kind) {
    case Transform::terminal_prime: {
      const auto firsts = first_terminals(second);
      for (SymbolId y : second.nonterminals()) {
        const Symbol& sym = second.structure(y);
        for (SymbolId t : firsts[y]) {
          Symbol anc;
          anc.base = terminal_category(second.name(t));
          anc.primed = sym.primed;
          anc.post_unary = sym.post_unary;
          add(anc.name(), y);
        }
      }
      break;
    }
    case Transform::coarse:
      for (SymbolId y : second.nonterminals()) {
        Symbol anc = second.structure(y);
        anc.subscript.clear();
        add(anc.name(), y);
      }
      break;
    case Transform::six_gram:
      for (SymbolId y : second.nonterminals()) add(second.name(y), y);
      break;
  }
  return DescendantsMap(first, second, pairs);
}

void write_descendants(std::ostream& out, const DescendantsMap& map) {
  auto pairs = map.pairs();
  std::sort(pairs.begin(), pairs.end());
  for (const auto& [a, b] : pairs) out << "D " << a << ' ' << b << '\n';
}

DescendantsMap read_descendants(std::istream& in, const Grammar& first, const Grammar& second,
                                std::string_view source) {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string w; fields >> w;) f.push_back(std::move(w));
    if (f.empty()) continue;
    if (f.size() != 3 || f[0] != "D")
      throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": malformed descendants record");
    pairs.emplace_back(f[1], f[2]);
  }
  try {
    return DescendantsMap(first, second, pairs);
  } catch (const FormatError& e) {
    throw FormatError(std::string(source) + ": " + e.what());
  }
}

DescendantsMap read_descendants_file(const std::string& path, const Grammar& first, const Grammar& second) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_descendants(in, first, second, path);
}

}  // namespace pcfgthresh
