#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eval.hpp"
#include "multipass.hpp"
#include "optimizer.hpp"

namespace pcfgthresh {

struct Sentence {
  std::string id;
  std::vector<std::string> words;
};

// One sentence per line; ids are 1-based line numbers. Blank lines are kept
// (they parse as failures) so output stays aligned with input.
std::vector<Sentence> read_sentences(std::istream& in);
std::vector<Sentence> read_sentences_file(const std::string& path);
std::vector<Sentence> sentences_from_trees(std::span<const Tree> trees);

// An ordered list of passes plus parse options. A single pass is plain
// thresholded CKY.
class Pipeline {
 public:
  Pipeline(std::vector<PassSpec> passes, ParseOptions options = {});
  static Pipeline single(GrammarPtr grammar, const ThresholdSet& t = {}, ParseOptions options = {});

  const std::vector<PassSpec>& passes() const { return passes_; }
  const PassSpec& final_pass() const { return passes_.back(); }
  ParseOptions& options() { return options_; }
  const ParseOptions& options() const { return options_; }
  void set_thresholds(std::size_t pass, const ThresholdSet& t);

  // Tunable ratios: beam and global of every pass, plus the gates of every
  // later pass. Names are "beam", "global" for one pass, "p<k>.<name>"
  // (k from 1) otherwise.
  std::vector<std::string> parameter_names() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> values);
  // Accepts a parameter name, or a bare name meaning the final pass's.
  void set_parameter(const std::string& name, double value);

  // Throws ModelError for unknown words or ungrammatical sentences.
  Chart parse_chart(std::span<const std::string> words) const;
  RunRecord parse(const Sentence& sentence) const;
  // Failures (unknown words, no parse) become failure records.
  RunRecord parse_or_fail(const Sentence& sentence) const;
  std::vector<RunRecord> parse_corpus(std::span<const Sentence> sentences, bool tolerate_failures = true) const;

 private:
  std::vector<PassSpec> passes_;
  ParseOptions options_;
};

RunRecord failure_record(const std::string& id, std::uint64_t productions = 0);

// Pipeline file: one "[pass]" section per pass, in order, each with
//   grammar = path          (required)
//   descendants = path      (required after the first pass)
//   thresholds = beam=.. global=.. mpnode=.. mpprod=..
// Relative paths resolve against the file's directory.
Pipeline read_pipeline_file(const std::string& path, ParseOptions options = {});

struct CorpusTotals {
  double entropy = 0.0;  // +inf if any sentence failed
  std::uint64_t productions = 0;
  double elapsed = 0.0;
  std::uint32_t retries = 0;
  std::uint32_t failures = 0;
};
CorpusTotals totals(std::span<const RunRecord> records);

// (entropy, productions) of the whole corpus under the given parameter
// vector. Hard failures propagate.
Measurement evaluate(Pipeline pipeline, std::span<const double> params, std::span<const Sentence> sentences);

struct SweepRow {
  double value;
  CorpusTotals totals;
  std::optional<PrecisionRecall> accuracy;
};

// Re-parses the corpus once per value of parameter `name`; accuracy is
// filled when golds are given.
std::vector<SweepRow> sweep(const Pipeline& pipeline, const std::string& name, std::span<const double> values,
                            std::span<const Sentence> sentences, std::span<const Tree> golds = {});
void write_sweep(std::ostream& out, const std::string& name, std::span<const SweepRow> rows);

// Trees of the records as optional values, debinarized output as parsed.
std::vector<std::optional<Tree>> record_trees(std::span<const RunRecord> records);

}  // namespace pcfgthresh
