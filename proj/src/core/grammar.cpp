#include "grammar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <tuple>
#include <sstream>

#include "errors.hpp"

namespace pcfgthresh {

std::string format_double(double value) {
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view text, const std::string& where) {
  double v = 0.0;
  if (text == "-inf") return kLogZero;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw FormatError(where + ": bad number '" + std::string(text) + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Grammar

Grammar::Grammar(const GrammarSpec& spec, double sum_tolerance) {
  std::set<std::string> parents;
  std::set<std::string> names;
  for (const auto& r : spec.rules) {
    if (r.children.empty() || r.children.size() > 2)
      throw FormatError("rule for '" + r.parent + "' must have one or two children");
    parents.insert(r.parent);
    names.insert(r.parent);
    for (const auto& c : r.children) names.insert(c);
  }
  for (const auto& [n, lp] : spec.priors) names.insert(n);
  for (const auto& [n, lp] : spec.starts) names.insert(n);
  if (spec.rules.empty()) throw FormatError("grammar has no rules");

  // Ids follow name order so a grammar's numbering does not depend on how
  // it was assembled.
  for (const auto& n : names) symbols_.intern(n);
  const std::size_t count = symbols_.size();
  kinds_.assign(count, SymbolKind::terminal);
  structure_.assign(count, Symbol{});
  for (const auto& p : parents) {
    const SymbolId id = symbols_.find(p);
    kinds_[id] = SymbolKind::nonterminal;
    structure_[id] = Symbol::parse(p);
  }

  std::set<std::vector<SymbolId>> seen;
  std::vector<double> sums(count, 0.0);
  for (const auto& r : spec.rules) {
    if (!(r.logp <= 1e-12) || r.logp == kLogZero)
      throw FormatError("rule probability for '" + r.parent + "' outside (0,1]");
    const SymbolId parent = symbols_.find(r.parent);
    std::vector<SymbolId> key{parent};
    for (const auto& c : r.children) key.push_back(symbols_.find(c));
    if (!seen.insert(key).second) throw FormatError("duplicate rule for '" + r.parent + "'");
    sums[parent] += std::exp2(r.logp);
    if (key.size() == 3) {
      binary_.push_back({parent, key[1], key[2], r.logp});
    } else if (kinds_[key[1]] == SymbolKind::nonterminal) {
      unary_.push_back({parent, key[1], r.logp});
    } else {
      lexical_.push_back({parent, key[1], r.logp});
    }
  }
  for (const auto& p : parents) {
    const SymbolId id = symbols_.find(p);
    if (std::abs(sums[id] - 1.0) > sum_tolerance)
      throw FormatError("rule probabilities for '" + p + "' sum to " + format_double(sums[id]));
  }

  std::vector<bool> unary_parent(count, false);
  for (const auto& u : unary_) unary_parent[u.parent] = true;
  for (const auto& u : unary_) {
    if (unary_parent[u.child])
      throw FormatError("unary chain through '" + symbols_.name(u.child) + "' (child of a unary rule heads another)");
  }

  priors_.assign(count, kLogZero);
  for (const auto& [n, lp] : spec.priors) {
    if (lp > 1e-12) throw FormatError("prior for '" + n + "' exceeds 1");
    priors_[symbols_.find(n)] = lp;
  }
  auto require_prior = [&](SymbolId id) {
    if (priors_[id] == kLogZero) throw FormatError("missing prior for '" + symbols_.name(id) + "'");
  };
  for (const auto& b : binary_) {
    require_prior(b.parent);
    require_prior(b.left);
    require_prior(b.right);
  }
  for (const auto& u : unary_) {
    require_prior(u.parent);
    require_prior(u.child);
  }
  for (const auto& l : lexical_) {
    require_prior(l.parent);
    require_prior(l.terminal);
  }

  start_logp_.assign(count, kLogZero);
  if (spec.starts.empty()) throw FormatError("grammar has no start symbol");
  for (const auto& [n, lp] : spec.starts) {
    const SymbolId id = symbols_.find(n);
    if (kinds_[id] != SymbolKind::nonterminal) throw FormatError("start symbol '" + n + "' heads no rule");
    starts_.push_back({id, lp});
    start_logp_[id] = lp;
  }
  double start_sum = 0.0;
  for (const auto& s : starts_) start_sum += std::exp2(s.logp);
  if (std::abs(start_sum - 1.0) > sum_tolerance) throw FormatError("start probabilities do not sum to 1");

  std::sort(binary_.begin(), binary_.end(), [](const BinaryRule& a, const BinaryRule& b) {
    return std::tie(a.left, a.right, a.parent) < std::tie(b.left, b.right, b.parent);
  });
  std::sort(unary_.begin(), unary_.end(), [](const UnaryRule& a, const UnaryRule& b) {
    return std::tie(a.child, a.parent) < std::tie(b.child, b.parent);
  });
  std::sort(lexical_.begin(), lexical_.end(), [](const LexicalRule& a, const LexicalRule& b) {
    return std::tie(a.terminal, a.parent) < std::tie(b.terminal, b.parent);
  });

  rights_.assign(count, {});
  for (std::uint32_t i = 0; i < binary_.size();) {
    std::uint32_t j = i;
    while (j < binary_.size() && binary_[j].left == binary_[i].left && binary_[j].right == binary_[i].right) ++j;
    rights_[binary_[i].left].push_back({binary_[i].right, i, j});
    i = j;
  }
  unary_ranges_.assign(count, {0, 0});
  for (std::uint32_t i = 0; i < unary_.size();) {
    std::uint32_t j = i;
    while (j < unary_.size() && unary_[j].child == unary_[i].child) ++j;
    unary_ranges_[unary_[i].child] = {i, j};
    i = j;
  }
  lexical_ranges_.assign(count, {0, 0});
  for (std::uint32_t i = 0; i < lexical_.size();) {
    std::uint32_t j = i;
    while (j < lexical_.size() && lexical_[j].terminal == lexical_[i].terminal) ++j;
    lexical_ranges_[lexical_[i].terminal] = {i, j};
    i = j;
  }
}

SymbolId Grammar::find_terminal(std::string_view name) const {
  const SymbolId id = symbols_.find(name);
  if (id == kNoSymbol || kinds_[id] != SymbolKind::terminal || priors_[id] == kLogZero) return kNoSymbol;
  return id;
}

std::span<const Grammar::RightGroup> Grammar::rights_for(SymbolId left) const { return rights_[left]; }

std::pair<std::uint32_t, std::uint32_t> Grammar::unary_range(SymbolId child) const { return unary_ranges_[child]; }

std::pair<std::uint32_t, std::uint32_t> Grammar::lexical_range(SymbolId terminal) const {
  return lexical_ranges_[terminal];
}

std::vector<SymbolId> Grammar::nonterminals() const {
  std::vector<SymbolId> out;
  for (SymbolId i = 0; i < kinds_.size(); ++i)
    if (kinds_[i] == SymbolKind::nonterminal) out.push_back(i);
  return out;
}

std::vector<SymbolId> Grammar::terminal_ids() const {
  std::vector<SymbolId> out;
  for (SymbolId i = 0; i < kinds_.size(); ++i)
    if (kinds_[i] == SymbolKind::terminal && priors_[i] != kLogZero) out.push_back(i);
  return out;
}

double Grammar::max_rule_sum_error() const {
  std::vector<double> sums(symbol_count(), 0.0);
  for (const auto& r : binary_) sums[r.parent] += std::exp2(r.logp);
  for (const auto& r : unary_) sums[r.parent] += std::exp2(r.logp);
  for (const auto& r : lexical_) sums[r.parent] += std::exp2(r.logp);
  double worst = 0.0;
  for (SymbolId id : nonterminals()) worst = std::max(worst, std::abs(sums[id] - 1.0));
  return worst;
}

double Grammar::prior_sum_error() const {
  double s = 0.0;
  for (LogProb lp : priors_)
    if (lp != kLogZero) s += std::exp2(lp);
  return std::abs(s - 1.0);
}

GrammarSpec Grammar::to_spec() const {
  GrammarSpec spec;
  for (const auto& r : binary_) spec.rules.push_back({name(r.parent), {name(r.left), name(r.right)}, r.logp});
  for (const auto& r : unary_) spec.rules.push_back({name(r.parent), {name(r.child)}, r.logp});
  for (const auto& r : lexical_) spec.rules.push_back({name(r.parent), {name(r.terminal)}, r.logp});
  for (SymbolId id = 0; id < priors_.size(); ++id)
    if (priors_[id] != kLogZero) spec.priors.emplace_back(name(id), priors_[id]);
  for (const auto& s : starts_) spec.starts.emplace_back(name(s.symbol), s.logp);
  return spec;
}

// ---------------------------------------------------------------------------
// Induction

namespace {

void count_labels(const Tree& t, std::map<std::string, std::size_t>& counts, std::size_t& total) {
  ++counts[t.label];
  ++total;
  for (const auto& c : t.children) count_labels(c, counts, total);
}

using RuleKey = std::pair<std::string, std::vector<std::string>>;

void count_rules(const Tree& t, std::map<RuleKey, std::size_t>& rules, std::map<std::string, std::size_t>& lhs) {
  if (t.is_leaf()) return;
  if (t.children.size() > 2) throw FormatError("cannot induce from unbinarized node '" + t.label + "'");
  std::vector<std::string> kids;
  for (const auto& c : t.children) kids.push_back(c.label);
  ++rules[{t.label, std::move(kids)}];
  ++lhs[t.label];
  for (const auto& c : t.children) count_rules(c, rules, lhs);
}

}  // namespace

std::vector<std::pair<std::string, double>> compute_priors(std::span<const Tree> trees) {
  if (trees.empty()) throw FormatError("cannot compute priors from an empty corpus");
  std::map<std::string, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& t : trees) count_labels(t, counts, total);
  std::vector<std::pair<std::string, double>> out;
  for (const auto& [label, n] : counts) out.emplace_back(label, static_cast<double>(n) / static_cast<double>(total));
  return out;
}

Grammar induce_grammar(std::span<const Tree> trees) {
  if (trees.empty()) throw FormatError("cannot induce a grammar from an empty corpus");
  std::map<RuleKey, std::size_t> rules;
  std::map<std::string, std::size_t> lhs;
  std::map<std::string, std::size_t> roots;
  for (const auto& t : trees) {
    if (t.is_leaf()) throw FormatError("tree is a bare terminal");
    count_rules(t, rules, lhs);
    ++roots[t.label];
  }
  GrammarSpec spec;
  for (const auto& [key, n] : rules) {
    spec.rules.push_back({key.first, key.second, std::log2(static_cast<double>(n) / static_cast<double>(lhs[key.first]))});
  }
  for (const auto& [label, p] : compute_priors(trees)) spec.priors.emplace_back(label, std::log2(p));
  for (const auto& [label, n] : roots)
    spec.starts.emplace_back(label, std::log2(static_cast<double>(n) / static_cast<double>(trees.size())));
  return Grammar(spec, 1e-9);
}

Transform parse_transform(std::string_view name) {
  if (name == "6gram" || name == "six-gram") return Transform::six_gram;
  if (name == "terminal-prime") return Transform::terminal_prime;
  if (name == "coarse") return Transform::coarse;
  throw FormatError("unknown transform '" + std::string(name) + "' (expected 6gram, terminal-prime or coarse)");
}

std::vector<Tree> apply_transform(std::span<const Tree> trees, Transform transform) {
  std::vector<Tree> out;
  out.reserve(trees.size());
  for (const auto& t : trees) {
    Tree b = binarize(t);
    switch (transform) {
      case Transform::six_gram:
        out.push_back(std::move(b));
        break;
      case Transform::terminal_prime:
        out.push_back(to_terminal_prime(b));
        break;
      case Transform::coarse:
        out.push_back(strip_subscripts(b));
        break;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Text format

void write_grammar(std::ostream& out, const Grammar& g) {
  GrammarSpec spec = g.to_spec();
  std::sort(spec.starts.begin(), spec.starts.end());
  std::sort(spec.priors.begin(), spec.priors.end());
  std::sort(spec.rules.begin(), spec.rules.end(), [](const auto& a, const auto& b) {
    if (a.children.size() != b.children.size()) return a.children.size() > b.children.size();
    return std::tie(a.parent, a.children) < std::tie(b.parent, b.children);
  });
  out << "# pcfgthresh grammar: log2 probabilities\n";
  for (const auto& [n, lp] : spec.starts) {
    if (spec.starts.size() == 1)
      out << "S " << n << '\n';
    else
      out << "S " << n << ' ' << format_double(lp) << '\n';
  }
  for (const auto& [n, lp] : spec.priors) out << "P " << n << ' ' << format_double(lp) << '\n';
  for (const auto& r : spec.rules) {
    out << (r.children.size() == 2 ? "B " : "U ") << r.parent;
    for (const auto& c : r.children) out << ' ' << c;
    out << ' ' << format_double(r.logp) << '\n';
  }
}

Grammar read_grammar(std::istream& in, std::string_view source) {
  GrammarSpec spec;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = std::string(source) + ":" + std::to_string(lineno);
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<std::string> f;
    for (std::string w; fields >> w;) f.push_back(std::move(w));
    if (f.empty()) continue;
    const std::string& tag = f[0];
    if (tag == "S" && (f.size() == 2 || f.size() == 3)) {
      spec.starts.emplace_back(f[1], f.size() == 3 ? parse_double(f[2], where) : 0.0);
    } else if (tag == "P" && f.size() == 3) {
      spec.priors.emplace_back(f[1], parse_double(f[2], where));
    } else if (tag == "B" && f.size() == 5) {
      spec.rules.push_back({f[1], {f[2], f[3]}, parse_double(f[4], where)});
    } else if (tag == "U" && f.size() == 4) {
      spec.rules.push_back({f[1], {f[2]}, parse_double(f[3], where)});
    } else {
      throw FormatError(where + ": malformed grammar record");
    }
  }
  try {
    return Grammar(spec);
  } catch (const FormatError& e) {
    throw FormatError(std::string(source) + ": " + e.what());
  }
}

Grammar read_grammar_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_grammar(in, path);
}

void write_grammar_file(const std::string& path, const Grammar& grammar) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  write_grammar(out, grammar);
  if (!out) throw IoError("error writing " + path);
}

}  // namespace pcfgthresh
