#include "tree.hpp"

#include <cctype>
#include <fstream>
#include <istream>
#include <sstream>

#include "errors.hpp"
#include "symbol.hpp"

namespace pcfgthresh {

std::size_t Tree::leaf_count() const {
  if (is_leaf()) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

namespace {

void collect_terminals(const Tree& t, std::vector<std::string>& out) {
  if (t.is_leaf()) {
    out.push_back(t.label);
    return;
  }
  for (const auto& c : t.children) collect_terminals(c, out);
}

}  // namespace

std::vector<std::string> Tree::terminals() const {
  std::vector<std::string> out;
  collect_terminals(*this, out);
  return out;
}

const Tree& Tree::first_leaf() const {
  const Tree* t = this;
  while (!t->is_leaf()) t = &t->children.front();
  return *t;
}

// ---------------------------------------------------------------------------
// Reading

namespace {

struct Token {
  enum Kind { open, close, atom, end } kind;
  std::string text;
  int line;
};

class Lexer {
 public:
  Lexer(std::istream& in, std::string_view source) : in_(in), source_(source) {}

  Token next() {
    int c;
    while ((c = in_.get()) != EOF) {
      if (c == '\n') {
        ++line_;
        continue;
      }
      if (std::isspace(c)) continue;
      if (c == '(') return {Token::open, "(", line_};
      if (c == ')') return {Token::close, ")", line_};
      std::string atom(1, static_cast<char>(c));
      while ((c = in_.peek()) != EOF && !std::isspace(c) && c != '(' && c != ')') atom += static_cast<char>(in_.get());
      return {Token::atom, std::move(atom), line_};
    }
    return {Token::end, "", line_};
  }

  [[noreturn]] void fail(const std::string& what, int line) const {
    throw FormatError(std::string(source_) + ":" + std::to_string(line) + ": " + what);
  }

 private:
  std::istream& in_;
  std::string_view source_;
  int line_ = 1;
};

// A raw bracket: label may be empty; either a token (leaf) or children.
// Bare atoms among other children are leaves without a token, as the
// parser prints them.
struct Raw {
  std::string label;
  std::optional<std::string> token;
  std::vector<Raw> children;
  int line = 0;
  bool bare = false;
};

Raw read_bracket(Lexer& lex, int open_line) {
  Raw raw;
  raw.line = open_line;
  Token t = lex.next();
  if (t.kind == Token::atom) {
    raw.label = t.text;
    t = lex.next();
  }
  std::size_t atoms = 0;
  while (t.kind != Token::close) {
    if (t.kind == Token::end) lex.fail("unbalanced at line " + std::to_string(open_line), t.line);
    if (t.kind == Token::open) {
      raw.children.push_back(read_bracket(lex, t.line));
    } else {
      Raw leaf;
      leaf.label = t.text;
      leaf.line = t.line;
      leaf.bare = true;
      raw.children.push_back(std::move(leaf));
      ++atoms;
    }
    t = lex.next();
  }
  // `(TAG word)`: a single atom is the leaf's token.
  if (atoms == 1 && raw.children.size() == 1) {
    raw.token = raw.children[0].label;
    raw.children.clear();
  }
  return raw;
}

Tree to_tree(const Raw& raw, const Lexer& lex) {
  Tree tree;
  tree.label = raw.label;
  if (raw.bare) return tree;
  if (raw.token) {
    if (raw.label.empty()) lex.fail("leaf without a tag", raw.line);
    tree.token = *raw.token;
    return tree;
  }
  if (raw.label.empty()) lex.fail(raw.children.empty() ? "empty constituent" : "unlabeled constituent", raw.line);
  if (raw.children.empty()) return tree;  // `(TAG)`: a leaf without a word
  tree.children.reserve(raw.children.size());
  for (const auto& c : raw.children) tree.children.push_back(to_tree(c, lex));
  return tree;
}

}  // namespace

std::vector<std::optional<Tree>> read_trees(std::istream& in, std::string_view source, bool allow_failures) {
  Lexer lex(in, source);
  std::vector<std::optional<Tree>> out;
  for (Token t = lex.next(); t.kind != Token::end; t = lex.next()) {
    if (t.kind != Token::open) lex.fail("expected '(' but found '" + t.text + "'", t.line);
    Raw raw = read_bracket(lex, t.line);
    // (()) failure marker
    if (raw.label.empty() && !raw.token && raw.children.size() == 1 && raw.children[0].label.empty() &&
        !raw.children[0].token && raw.children[0].children.empty()) {
      if (!allow_failures) lex.fail("empty constituent", raw.line);
      out.emplace_back(std::nullopt);
      continue;
    }
    while (raw.label.empty() && !raw.token && raw.children.size() == 1) {
      Raw inner = std::move(raw.children[0]);
      raw = std::move(inner);
    }
    out.emplace_back(to_tree(raw, lex));
  }
  return out;
}

std::vector<Tree> read_treebank(std::istream& in, std::string_view source) {
  std::vector<Tree> out;
  for (auto& t : read_trees(in, source, false)) out.push_back(std::move(*t));
  return out;
}

std::vector<Tree> read_treebank_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_treebank(in, path);
}

// ---------------------------------------------------------------------------
// Writing

namespace {

void write(const Tree& t, std::string& out) {
  if (t.is_leaf()) {
    if (t.token.empty()) {
      out += t.label;
    } else {
      out += '(';
      out += t.label;
      out += ' ';
      out += t.token;
      out += ')';
    }
    return;
  }
  out += '(';
  out += t.label;
  for (const auto& c : t.children) {
    out += ' ';
    write(c, out);
  }
  out += ')';
}

}  // namespace

std::string to_bracketed(const Tree& tree) {
  std::string out;
  write(tree, out);
  return out;
}

// ---------------------------------------------------------------------------
// Transforms

namespace {

void check_label(const Tree& t) {
  if (t.is_leaf()) {
    if (t.label.find_first_of("<>|") != std::string::npos)
      throw FormatError("terminal '" + t.label + "' contains a reserved character");
  } else if (has_reserved_label_chars(t.label)) {
    throw FormatError("label '" + t.label + "' contains a reserved character (' < > | + ^)");
  }
}

Tree binarize_node(const Tree& node, const std::string& label, std::size_t max_sub);

// Builds the right-branching chain for children [first, end) under a primed
// symbol with base `base`.
Tree chain(const std::string& base, const std::vector<Tree>& kids, std::size_t first, std::size_t max_sub) {
  Symbol sym;
  sym.base = base;
  sym.primed = true;
  const std::size_t k = kids.size();
  for (std::size_t i = first; i < k && sym.subscript.size() < max_sub; ++i) sym.subscript.push_back(kids[i].label);
  Tree out;
  out.label = sym.name();
  out.children.push_back(binarize_node(kids[first], kids[first].label, max_sub));
  if (k - first == 2) {
    out.children.push_back(binarize_node(kids[first + 1], kids[first + 1].label, max_sub));
  } else {
    out.children.push_back(chain(base, kids, first + 1, max_sub));
  }
  return out;
}

Tree binarize_node(const Tree& node, const std::string& label, std::size_t max_sub) {
  check_label(node);
  if (node.is_leaf()) return node;

  Tree out;
  out.label = label;

  // Unary nonterminal chain: node -> u1 -> ... -> um, um not unary-internal.
  if (node.children.size() == 1 && !node.children[0].is_leaf()) {
    std::vector<const Tree*> middle;
    const Tree* cur = &node.children[0];
    while (true) {
      check_label(*cur);
      middle.push_back(cur);
      if (cur->children.size() == 1 && !cur->children[0].is_leaf())
        cur = &cur->children[0];
      else
        break;
    }
    Symbol child_sym;
    for (std::size_t i = 0; i < middle.size(); ++i) {
      if (i) child_sym.base += '+';
      child_sym.base += middle[i]->label;
    }
    child_sym.post_unary = true;
    out.children.push_back(binarize_node(*middle.back(), child_sym.name(), max_sub));
    return out;
  }

  const auto& kids = node.children;
  if (kids.size() <= 2) {
    for (const auto& c : kids) out.children.push_back(binarize_node(c, c.label, max_sub));
    return out;
  }
  Symbol own = Symbol::parse(label);
  out.children.push_back(binarize_node(kids[0], kids[0].label, max_sub));
  out.children.push_back(chain(own.base, kids, 1, max_sub));
  return out;
}

void splice_children(const Tree& node, std::vector<Tree>& out);

Tree debinarize_node(const Tree& node) {
  if (node.is_leaf()) return node;
  const Symbol sym = Symbol::parse(node.label);
  std::vector<Tree> kids;
  splice_children(node, kids);

  // Expand a compound base "A+B+C" into A -> B -> C -> kids.
  std::vector<std::string> parts;
  std::size_t pos = 0;
  while (true) {
    const auto plus = sym.base.find('+', pos);
    parts.push_back(sym.base.substr(pos, plus - pos));
    if (plus == std::string::npos) break;
    pos = plus + 1;
  }
  Tree inner;
  inner.label = parts.back();
  inner.children = std::move(kids);
  for (std::size_t i = parts.size() - 1; i-- > 0;) {
    Tree wrap;
    wrap.label = parts[i];
    wrap.children.push_back(std::move(inner));
    inner = std::move(wrap);
  }
  return inner;
}

void splice_children(const Tree& node, std::vector<Tree>& out) {
  for (const auto& c : node.children) {
    if (!c.is_leaf() && Symbol::parse(c.label).primed)
      splice_children(c, out);
    else
      out.push_back(debinarize_node(c));
  }
}

Tree relabel_terminal_prime(const Tree& node) {
  if (node.is_leaf()) return node;
  if (node.children.size() > 2) throw FormatError("terminal-prime transform requires a binarized tree");
  const Symbol orig = Symbol::parse(node.label);
  Symbol sym;
  sym.base = terminal_category(node.first_leaf().label);
  sym.primed = orig.primed;
  sym.post_unary = orig.post_unary;
  Tree out;
  out.label = sym.name();
  for (const auto& c : node.children) out.children.push_back(relabel_terminal_prime(c));
  return out;
}

Tree strip_node(const Tree& node) {
  if (node.is_leaf()) return node;
  Symbol sym = Symbol::parse(node.label);
  sym.subscript.clear();
  Tree out;
  out.label = sym.name();
  for (const auto& c : node.children) out.children.push_back(strip_node(c));
  return out;
}

}  // namespace

Tree binarize(const Tree& tree, std::size_t max_subscript) {
  if (max_subscript == 0 || max_subscript > Symbol::kMaxSubscript)
    throw FormatError("subscript length must be in 1..5");
  return binarize_node(tree, tree.label, max_subscript);
}

Tree debinarize(const Tree& tree) { return debinarize_node(tree); }

Tree to_terminal_prime(const Tree& binary_tree) { return relabel_terminal_prime(binary_tree); }

Tree strip_subscripts(const Tree& binary_tree) { return strip_node(binary_tree); }

}  // namespace pcfgthresh
