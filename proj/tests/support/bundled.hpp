// The bundled synthetic corpus with its three induced grammars and the
// descendants maps into the 6-gram grammar, loaded once per process.
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "core/descendants.hpp"
#include "core/grammar.hpp"
#include "core/multipass.hpp"
#include "core/pipeline.hpp"

struct Bundled {
  std::vector<pcfgthresh::Tree> train;
  std::vector<pcfgthresh::Tree> tune_gold;
  std::vector<pcfgthresh::Tree> test_gold;
  std::vector<pcfgthresh::Sentence> tune;
  std::vector<pcfgthresh::Sentence> test;
  pcfgthresh::GrammarPtr six;
  pcfgthresh::GrammarPtr tp;
  pcfgthresh::GrammarPtr coarse;
  std::shared_ptr<const pcfgthresh::DescendantsMap> tp_map;
  std::shared_ptr<const pcfgthresh::DescendantsMap> coarse_map;

  static const Bundled& get(const std::string& data_dir) {
    static const Bundled b(data_dir);
    return b;
  }

  pcfgthresh::Pipeline single(const pcfgthresh::ThresholdSet& t = {}, pcfgthresh::ParseOptions opt = {}) const {
    return pcfgthresh::Pipeline::single(six, t, opt);
  }

  pcfgthresh::Pipeline two_pass(pcfgthresh::GrammarPtr first, std::shared_ptr<const pcfgthresh::DescendantsMap> map,
                                const pcfgthresh::ThresholdSet& t1, const pcfgthresh::ThresholdSet& t2,
                                pcfgthresh::ParseOptions opt = {}) const {
    return pcfgthresh::Pipeline({{std::move(first), t1, nullptr}, {six, t2, std::move(map)}}, opt);
  }

 private:
  explicit Bundled(const std::string& dir) {
    using namespace pcfgthresh;
    const std::string base = dir + "/synthetic/";
    train = read_treebank_file(base + "train.mrg");
    tune_gold = read_treebank_file(base + "tune.mrg");
    test_gold = read_treebank_file(base + "test.mrg");
    tune = sentences_from_trees(tune_gold);
    test = sentences_from_trees(test_gold);
    auto induce = [&](Transform kind) {
      return std::make_shared<const Grammar>(induce_grammar(apply_transform(train, kind)));
    };
    six = induce(Transform::six_gram);
    tp = induce(Transform::terminal_prime);
    coarse = induce(Transform::coarse);
    tp_map = std::make_shared<const DescendantsMap>(build_descendants(*tp, *six, Transform::terminal_prime));
    coarse_map = std::make_shared<const DescendantsMap>(build_descendants(*coarse, *six, Transform::coarse));
  }
};
