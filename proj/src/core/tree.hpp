#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcfgthresh {

// A parse tree. Leaves are terminals (part-of-speech tags); a leaf read from
// a treebank keeps its word as `token`, which is carried along but never
// used by the grammar.
struct Tree {
  std::string label;
  std::string token;
  std::vector<Tree> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t leaf_count() const;
  std::vector<std::string> terminals() const;
  const Tree& first_leaf() const;

  friend bool operator==(const Tree&, const Tree&) = default;
};

// Penn-style bracketing, one tree per top-level bracket. `(TAG token)` is a
// leaf, and so are `(TAG)` and a bare `TAG` next to other children. An
// unlabeled single-child wrapper `( (S ...) )` is unwrapped. With
// `allow_failures`, `(())` yields std::nullopt (the parser's failure marker).
// Throws FormatError with the line number on malformed input.
std::vector<std::optional<Tree>> read_trees(std::istream& in, std::string_view source = "<input>",
                                            bool allow_failures = false);
std::vector<Tree> read_treebank(std::istream& in, std::string_view source = "<input>");
std::vector<Tree> read_treebank_file(const std::string& path);

// Leaves print as `(TAG token)` when a token is present, bare `TAG` otherwise.
std::string to_bracketed(const Tree& tree);
inline constexpr std::string_view kFailureBracket = "(())";

// Right-branching 6-gram binarization. A node X with children C1..Ck (k > 2)
// becomes X -> C1 X'<C2..C6>, each chain symbol listing its own first child
// and up to four following sibling labels. Unary chains of nonterminals are
// collapsed so no unary rule feeds another: the child of a unary node gets
// the post-unary marker, and longer chains merge their middle labels into a
// '+' compound.
Tree binarize(const Tree& tree, std::size_t max_subscript = 5);

// Inverse of binarize: splices primed chains back into their parents, strips
// post-unary markers and expands compound labels.
Tree debinarize(const Tree& tree);

// Relabels every internal node of a binarized tree with the category of the
// first terminal in its span, keeping the prime and post-unary markers.
// Throws FormatError for nodes with more than two children.
Tree to_terminal_prime(const Tree& binary_tree);

// Drops 6-gram subscripts, keeping prime and post-unary markers. The result
// is a label projection of the 6-gram tree.
Tree strip_subscripts(const Tree& binary_tree);

}  // namespace pcfgthresh
