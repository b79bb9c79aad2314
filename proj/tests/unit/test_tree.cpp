#include <sstream>

#include "core/errors.hpp"
#include "core/symbol.hpp"
#include "core/tree.hpp"
#include "doctest.h"
#include "test_paths.hpp"

using namespace pcfgthresh;

namespace {

Tree tree(const std::string& text) {
  std::istringstream in(text);
  auto trees = read_treebank(in);
  REQUIRE(trees.size() == 1);
  return trees[0];
}

std::string flat(const Tree& t) { return to_bracketed(t); }

// Symbol base of every node must equal the category of its first terminal.
void check_first_terminal_labels(const Tree& t) {
  if (t.is_leaf()) return;
  CHECK(Symbol::parse(t.label).base == terminal_category(t.first_leaf().label));
  for (const auto& c : t.children) check_first_terminal_labels(c);
}

}  // namespace

TEST_CASE("reading bracketed trees") {
  const Tree t = tree("(S (NP (DT a)) (VP (VB b)))");
  CHECK(t.label == "S");
  REQUIRE(t.children.size() == 2);
  CHECK(t.children[0].label == "NP");
  CHECK(t.children[0].children[0].label == "DT");
  CHECK(t.children[0].children[0].token == "a");
  CHECK(t.terminals() == std::vector<std::string>{"DT", "VB"});

  CHECK(flat(tree("((S (X (T t))))")) == "(S (X (T t)))");
  CHECK(flat(tree("(X (t))")) == "(X t)");
  CHECK(flat(tree("(NP det adj (N noun))")) == "(NP det adj (N noun))");

  std::istringstream bad("(S (NP");
  try {
    read_treebank(bad);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("unbalanced at line 1") != std::string::npos);
  }

  std::istringstream with_failure("(S a b)\n(())\n");
  const auto mixed = read_trees(with_failure, "<t>", true);
  REQUIRE(mixed.size() == 2);
  CHECK(mixed[0].has_value());
  CHECK_FALSE(mixed[1].has_value());
  std::istringstream failure_not_allowed("(())");
  CHECK_THROWS_AS(read_treebank(failure_not_allowed), FormatError);
}

TEST_CASE("6-gram binarization") {
  SUBCASE("eight children") {
    const Tree b = binarize(tree("(X A B C D E F G H)"));
    CHECK(flat(b) ==
          "(X A (X'<B|C|D|E|F> B (X'<C|D|E|F|G> C (X'<D|E|F|G|H> D (X'<E|F|G|H> E (X'<F|G|H> F (X'<G|H> G H)))))))");
  }
  SUBCASE("three children") {
    const Tree b = binarize(tree("(X A B C)"));
    CHECK(flat(b) == "(X A (X'<B|C> B C))");
    CHECK(b.terminals() == std::vector<std::string>{"A", "B", "C"});
  }
  SUBCASE("binary trees are unchanged") {
    const Tree t = tree("(S (NP (D d) (N n)) (V v))");
    CHECK(binarize(t) == t);
  }
  SUBCASE("unary chains collapse") {
    const Tree b = binarize(tree("(S (VP (V v)) (NP (N n)))"));
    CHECK(flat(b) == "(S (VP (V v)) (NP (N n)))");
    const Tree u = binarize(tree("(S (VP (NP (D d) (N n))))"));
    CHECK(flat(u) == "(S (VP+NP^U (D d) (N n)))");
    CHECK(debinarize(u) == tree("(S (VP (NP (D d) (N n))))"));
  }
}

TEST_CASE("binarize and debinarize round-trip the bundled treebank") {
  const auto trees = read_treebank_file(test_data("synthetic/train.mrg"));
  REQUIRE(trees.size() > 100);
  for (const auto& t : trees) {
    const Tree b = binarize(t);
    CHECK(b.terminals() == t.terminals());
    CHECK(debinarize(b) == t);
    const Tree tp = to_terminal_prime(b);
    CHECK(tp.terminals() == t.terminals());
    check_first_terminal_labels(tp);
  }
}

TEST_CASE("terminal-prime relabeling") {
  const Tree b = binarize(tree("(S (NP (det) (adj) (noun)) (VP (verb)))"));
  CHECK(flat(to_terminal_prime(b)) == "(DET (DET det (ADJ' adj noun)) (VERB verb))");
  CHECK(flat(to_terminal_prime(binarize(tree("(X (t))")))) == "(T t)");
  CHECK(terminal_category("det") == "DET");
  CHECK(terminal_category(".") == "._");
  CHECK(flat(strip_subscripts(binarize(tree("(X A B C D)")))) == "(X A (X' B (X' C D)))");
}

TEST_CASE("symbol names") {
  const Symbol s = Symbol::parse("NP'<adj|noun>^U");
  CHECK(s.base == "NP");
  CHECK(s.primed);
  CHECK(s.post_unary);
  CHECK(s.subscript == std::vector<std::string>{"adj", "noun"});
  CHECK(s.name() == "NP'<adj|noun>^U");
  CHECK_THROWS_AS(Symbol::parse("NP<adj"), FormatError);
}
