// Generates the bundled synthetic treebank: flat trees over part-of-speech
// tags from a small hand-written stochastic generator, split into
// train/tune/test. Held-out trees are kept only when the grammars induced
// from the training split can parse their tag sequence.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "core/chart.hpp"
#include "core/errors.hpp"
#include "core/grammar.hpp"
#include "core/tree.hpp"

namespace {

using pcfgthresh::Transform;
using pcfgthresh::Tree;

const std::map<std::string, std::vector<std::string>> kWords = {
    {"det", {"the", "a", "this", "every"}},     {"noun", {"dog", "idea", "market", "report", "city"}},
    {"nouns", {"dogs", "prices", "people"}},    {"pnoun", {"Alice", "Paris", "Acme"}},
    {"pron", {"she", "they", "it"}},            {"adj", {"big", "new", "green", "quiet"}},
    {"adv", {"very", "quickly", "often"}},      {"verb", {"see", "buy", "say"}},
    {"verbd", {"saw", "bought", "said"}},       {"verbz", {"sees", "buys", "says"}},
    {"verbg", {"seeing", "buying"}},            {"aux", {"is", "was", "has"}},
    {"modal", {"can", "will", "might"}},        {"prep", {"in", "on", "with", "of"}},
    {"to", {"to"}},                             {"conj", {"and", "but"}},
    {"comp", {"that", "because", "if"}},        {"num", {"two", "three", "forty"}},
    {"poss", {"her", "their"}},                 {"punct", {".", ",", "!"}},
};

// Flat, Penn-like trees built from optional slots, so the flat rules vary
// a lot and attachment is ambiguous (PPs under NP or VP, coordination).
class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  Tree sentence(std::size_t min_len, std::size_t max_len) {
    while (true) {
      depth_ = 0;
      Tree t = s();
      const std::size_t n = t.leaf_count();
      if (n >= min_len && n <= max_len) return t;
    }
  }

 private:
  bool coin(double p) { return std::bernoulli_distribution(p)(rng_); }
  std::size_t pick(std::initializer_list<double> weights) {
    return std::discrete_distribution<std::size_t>(weights)(rng_);
  }

  Tree leaf(const std::string& tag) {
    const auto& words = kWords.at(tag);
    Tree t;
    t.label = tag;
    t.token = words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng_)];
    return t;
  }

  Tree node(const std::string& label, std::vector<Tree> kids) {
    Tree t;
    t.label = label;
    t.children = std::move(kids);
    return t;
  }

  // Deeper recursion only while the sentence is still shallow.
  bool room() const { return depth_ < 5; }

  Tree s() {
    ++depth_;
    std::vector<Tree> k;
    const std::size_t shape = pick({0.78, 0.07, 0.08, 0.07});
    if (shape == 1 && room()) {
      k.push_back(s());
      k.push_back(leaf("conj"));
      k.push_back(s());
    } else if (shape == 2) {
      --depth_;
      return node("S", {vp()});
    } else {
      if (coin(0.12) && room()) k.push_back(pp());
      if (coin(0.08)) k.push_back(advp());
      if (shape == 3 && room()) {
        k.push_back(sbar());
        k.push_back(leaf("punct"));
      }
      k.push_back(np());
      if (coin(0.06)) k.push_back(advp());
      if (coin(0.08)) k.push_back(leaf("modal"));
      k.push_back(vp());
    }
    if (coin(0.7)) k.push_back(leaf("punct"));
    --depth_;
    return node("S", std::move(k));
  }

  Tree np() {
    ++depth_;
    Tree out;
    switch (pick({0.12, 0.10, 0.52, 0.12, 0.05, 0.05, 0.04})) {
      case 0:
        out = node("NP", {leaf("pron")});
        break;
      case 1: {
        std::vector<Tree> k{leaf("pnoun")};
        if (coin(0.3)) k.push_back(leaf("pnoun"));
        out = node("NP", std::move(k));
        break;
      }
      case 2:
        out = base_np();
        break;
      case 3:
        out = room() ? node("NP", {base_np(), pp()}) : base_np();
        break;
      case 4:
        out = room() ? node("NP", {np(), leaf("conj"), np()}) : base_np();
        break;
      case 5:
        out = room() ? node("NP", {base_np(), sbar()}) : base_np();
        break;
      default: {
        std::vector<Tree> k{leaf("num")};
        if (coin(0.3)) {
          k.push_back(leaf("conj"));
          k.push_back(leaf("num"));
        }
        k.push_back(leaf("nouns"));
        out = node("NP", std::move(k));
      }
    }
    --depth_;
    return out;
  }

  Tree base_np() {
    std::vector<Tree> k;
    switch (pick({0.6, 0.15, 0.1, 0.15})) {
      case 0:
        k.push_back(leaf("det"));
        break;
      case 1:
        k.push_back(leaf("poss"));
        break;
      case 2:
        k.push_back(leaf("num"));
        break;
      default:
        break;
    }
    const std::size_t adjs = pick({0.55, 0.3, 0.1, 0.05});
    for (std::size_t i = 0; i < adjs; ++i) k.push_back(coin(0.15) ? adjp() : leaf("adj"));
    if (coin(0.15)) k.push_back(leaf("noun"));
    k.push_back(leaf(coin(0.65) ? "noun" : "nouns"));
    if (coin(0.06) && room()) k.push_back(pp());
    return node("NP", std::move(k));
  }

  Tree vp() {
    ++depth_;
    std::vector<Tree> k;
    if (coin(0.06)) k.push_back(leaf("adv"));
    const std::size_t shape = pick({0.72, 0.1, 0.08, 0.05, 0.05});
    if (shape == 1 && room()) {
      k.push_back(leaf(coin(0.5) ? "aux" : "modal"));
      k.push_back(vp());
    } else if (shape == 2) {
      k.push_back(leaf("aux"));
      k.push_back(leaf("verbg"));
      if (coin(0.7)) k.push_back(np());
    } else if (shape == 3 && room()) {
      k.push_back(vp());
      k.push_back(leaf("conj"));
      k.push_back(vp());
    } else if (shape == 4 && room()) {
      k.push_back(leaf("verb"));
      k.push_back(sbar_to());
    } else {
      const char* verbs[] = {"verb", "verbd", "verbz"};
      k.push_back(leaf(verbs[pick({0.35, 0.35, 0.3})]));
      if (coin(0.7)) k.push_back(np());
      if (coin(0.05)) k.push_back(np());
      if (coin(0.08)) k.push_back(adjp());
      const std::size_t pps = room() ? pick({0.6, 0.3, 0.1}) : 0;
      for (std::size_t i = 0; i < pps; ++i) k.push_back(pp());
      if (coin(0.1)) k.push_back(advp());
      if (coin(0.08) && room()) k.push_back(sbar());
    }
    --depth_;
    return node("VP", std::move(k));
  }

  Tree pp() {
    ++depth_;
    std::vector<Tree> k;
    if (coin(0.05)) k.push_back(leaf("adv"));
    k.push_back(leaf("prep"));
    k.push_back(coin(0.06) && room() ? s() : np());
    --depth_;
    return node("PP", std::move(k));
  }

  Tree adjp() {
    switch (pick({0.5, 0.3, 0.1, 0.1})) {
      case 0:
        return node("ADJP", {leaf("adj")});
      case 1:
        return node("ADJP", {leaf("adv"), leaf("adj")});
      case 2:
        return node("ADJP", {leaf("adj"), leaf("conj"), leaf("adj")});
      default:
        return room() ? node("ADJP", {leaf("adj"), pp()}) : node("ADJP", {leaf("adj")});
    }
  }

  Tree advp() {
    if (coin(0.7)) return node("ADVP", {leaf("adv")});
    return node("ADVP", {leaf("adv"), leaf("adv")});
  }

  Tree sbar() {
    ++depth_;
    Tree out;
    switch (pick({0.6, 0.2, 0.2})) {
      case 0:
        out = node("SBAR", {leaf("comp"), s()});
        break;
      case 1:
        out = node("SBAR", {s()});
        break;
      default:
        out = sbar_to();
    }
    --depth_;
    return out;
  }

  Tree sbar_to() { return node("SBAR", {node("S", {node("VP", {leaf("to"), vp()})})}); }

  std::mt19937_64 rng_;
  int depth_ = 0;
};

bool parseable(const pcfgthresh::GrammarPtr& g, const Tree& t) {
  try {
    return !pcfgthresh::parse_exhaustive(g, t.terminals()).failed();
  } catch (const pcfgthresh::ModelError&) {
    return false;
  }
}

void write_split(const std::filesystem::path& dir, const std::string& name, const std::vector<Tree>& trees) {
  std::ofstream mrg(dir / (name + ".mrg"));
  std::ofstream txt(dir / (name + ".txt"));
  for (const auto& t : trees) {
    mrg << pcfgthresh::to_bracketed(t) << '\n';
    const auto tags = t.terminals();
    for (std::size_t i = 0; i < tags.size(); ++i) txt << (i ? " " : "") << tags[i];
    txt << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic treebank"};
  std::string out_dir = "data/synthetic";
  std::uint64_t seed = 1998;
  std::size_t n_train = 419;
  std::size_t n_tune = 31;
  std::size_t n_test = 50;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", seed, "Random seed");
  app.add_option("--train", n_train, "Training trees");
  app.add_option("--tune", n_tune, "Tuning trees");
  app.add_option("--test", n_test, "Test trees");
  CLI11_PARSE(app, argc, argv);

  Generator gen(seed);
  std::vector<Tree> train;
  for (std::size_t i = 0; i < n_train; ++i) train.push_back(gen.sentence(3, 18));
  std::vector<pcfgthresh::GrammarPtr> grammars;
  for (auto kind : {Transform::six_gram, Transform::terminal_prime, Transform::coarse})
    grammars.push_back(std::make_shared<const pcfgthresh::Grammar>(
        pcfgthresh::induce_grammar(pcfgthresh::apply_transform(train, kind))));
  auto held_out = [&](std::size_t count) {
    std::vector<Tree> out;
    while (out.size() < count) {
      Tree t = gen.sentence(3, 18);
      if (std::all_of(grammars.begin(), grammars.end(), [&](const auto& g) { return parseable(g, t); }))
        out.push_back(std::move(t));
    }
    return out;
  };
  const auto tune = held_out(n_tune);
  const auto test = held_out(n_test);

  std::filesystem::create_directories(out_dir);
  write_split(out_dir, "train", train);
  write_split(out_dir, "tune", tune);
  write_split(out_dir, "test", test);
  std::cout << "wrote " << train.size() << " / " << tune.size() << " / " << test.size() << " trees to " << out_dir
            << '\n';
  return 0;
}
