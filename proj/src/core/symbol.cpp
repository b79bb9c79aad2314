#include "symbol.hpp"

#include <cctype>

#include "errors.hpp"

namespace pcfgthresh {

namespace {

constexpr std::string_view kReserved = "'<>|+^";
constexpr std::string_view kUnaryMark = "^U";

}  // namespace

std::string Symbol::name() const {
  std::string out = base;
  if (primed) out += '\'';
  if (!subscript.empty()) {
    out += '<';
    for (std::size_t i = 0; i < subscript.size(); ++i) {
      if (i) out += '|';
      out += subscript[i];
    }
    out += '>';
  }
  if (post_unary) out += kUnaryMark;
  return out;
}

Symbol Symbol::parse(std::string_view text) {
  Symbol sym;
  if (text.size() >= kUnaryMark.size() && text.substr(text.size() - kUnaryMark.size()) == kUnaryMark) {
    sym.post_unary = true;
    text.remove_suffix(kUnaryMark.size());
  }
  if (!text.empty() && text.back() == '>') {
    const auto open = text.find('<');
    if (open == std::string_view::npos) throw FormatError("malformed symbol '" + std::string(text) + "'");
    std::string_view inner = text.substr(open + 1, text.size() - open - 2);
    text = text.substr(0, open);
    while (true) {
      const auto bar = inner.find('|');
      sym.subscript.emplace_back(inner.substr(0, bar));
      if (bar == std::string_view::npos) break;
      inner.remove_prefix(bar + 1);
    }
    if (sym.subscript.size() > kMaxSubscript)
      throw FormatError("symbol '" + std::string(text) + "' has more than 5 subscripts");
  }
  if (!text.empty() && text.back() == '\'' && text.size() > 1) {
    sym.primed = true;
    text.remove_suffix(1);
  }
  if (text.empty()) throw FormatError("empty symbol base");
  if (text.find_first_of("<>|^") != std::string_view::npos)
    throw FormatError("malformed symbol base '" + std::string(text) + "'");
  sym.base = std::string(text);
  return sym;
}

bool has_reserved_label_chars(std::string_view label) {
  return label.find_first_of(kReserved) != std::string_view::npos;
}

std::string terminal_category(std::string_view terminal) {
  std::string upper(terminal);
  for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper == terminal) upper += '_';
  return upper;
}

SymbolId SymbolTable::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  const auto id = static_cast<SymbolId>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(std::string(name), id);
  return id;
}

SymbolId SymbolTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  return it == ids_.end() ? kNoSymbol : it->second;
}

}  // namespace pcfgthresh
