#include "pcfgthresh/pcfgthresh.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <new>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "core/errors.hpp"
#include "core/pipeline.hpp"

using namespace pcfgthresh;

struct pt_parser {
  Pipeline pipeline;
};

struct pt_result {
  RunRecord record;
  std::string tree;
};

namespace {

thread_local std::string last_error;

pt_status fail(pt_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, mapping exceptions onto status codes.
template <class F>
pt_status guarded(F&& body) {
  try {
    body();
    return PT_OK;
  } catch (const IoError& e) {
    return fail(PT_ERR_IO, e.what());
  } catch (const FormatError& e) {
    return fail(PT_ERR_FORMAT, e.what());
  } catch (const ModelError& e) {
    return fail(PT_ERR_MODEL, e.what());
  } catch (const Error& e) {
    return fail(PT_ERR_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PT_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PT_ERR_INTERNAL, e.what());
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(std::string(what) + " is null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::ofstream open_out(const char* path) {
  std::ofstream out(path);
  if (!out) throw IoError(std::string("cannot write ") + path);
  return out;
}

void check_written(std::ofstream& out, const char* path) {
  out.flush();
  if (!out) throw IoError(std::string("error writing ") + path);
}

bool parse_flag(const char* name, const std::string& value) {
  if (value == "1" || value == "true" || value == "on") return true;
  if (value == "0" || value == "false" || value == "off") return false;
  throw Error(std::string("option ") + name + " expects 0 or 1, got '" + value + "'");
}

double parse_number(const char* name, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v))
    throw Error(std::string("option ") + name + " expects a number, got '" + value + "'");
  return v;
}

std::size_t pass_index(const Pipeline& pipeline, int pass) {
  const std::size_t passes = pipeline.passes().size();
  const std::size_t k = pass < 0 ? passes - 1 : static_cast<std::size_t>(pass);
  if (k >= passes) throw Error("pass " + std::to_string(pass) + " out of range");
  return k;
}

// Caller-supplied values that fail validation are argument errors, not
// malformed input.
template <class F>
auto as_argument(F&& f) {
  try {
    return f();
  } catch (const FormatError& e) {
    throw Error(e.what());
  }
}

}  // namespace

extern "C" {

const char* pt_version(void) { return "1.0.0"; }

const char* pt_last_error(void) { return last_error.c_str(); }

void pt_string_free(char* s) { std::free(s); }

pt_status pt_induce_file(const char* treebank_path, const char* transform, const char* grammar_out_path) {
  return guarded([&] {
    require(treebank_path, "treebank path");
    require(transform, "transform");
    require(grammar_out_path, "output path");
    const Transform kind = as_argument([&] { return parse_transform(transform); });
    const auto trees = read_treebank_file(treebank_path);
    const Grammar g = induce_grammar(apply_transform(trees, kind));
    write_grammar_file(grammar_out_path, g);
  });
}

pt_status pt_build_descendants(const char* first_grammar_path, const char* second_grammar_path,
                               const char* first_transform, const char* out_path) {
  return guarded([&] {
    require(first_grammar_path, "first grammar path");
    require(second_grammar_path, "second grammar path");
    require(first_transform, "transform");
    require(out_path, "output path");
    const Transform kind = as_argument([&] { return parse_transform(first_transform); });
    const Grammar first = read_grammar_file(first_grammar_path);
    const Grammar second = read_grammar_file(second_grammar_path);
    const DescendantsMap map = build_descendants(first, second, kind);
    auto out = open_out(out_path);
    write_descendants(out, map);
    check_written(out, out_path);
  });
}

pt_status pt_parser_open_grammar(const char* grammar_path, pt_parser** out) {
  return guarded([&] {
    require(grammar_path, "grammar path");
    require(out, "output handle");
    *out = nullptr;
    auto g = std::make_shared<const Grammar>(read_grammar_file(grammar_path));
    *out = new pt_parser{Pipeline::single(std::move(g))};
  });
}

pt_status pt_parser_open_pipeline(const char* pipeline_path, pt_parser** out) {
  return guarded([&] {
    require(pipeline_path, "pipeline path");
    require(out, "output handle");
    *out = nullptr;
    *out = new pt_parser{read_pipeline_file(pipeline_path)};
  });
}

void pt_parser_free(pt_parser* parser) { delete parser; }

size_t pt_parser_pass_count(const pt_parser* parser) { return parser ? parser->pipeline.passes().size() : 0; }

pt_status pt_parser_set_thresholds(pt_parser* parser, int pass, double beam, double global, double mp_node,
                                   double mp_prod) {
  return guarded([&] {
    require(parser, "parser");
    const std::size_t k = pass_index(parser->pipeline, pass);
    as_argument([&] { parser->pipeline.set_thresholds(k, ThresholdSet{beam, global, mp_node, mp_prod}); });
  });
}

pt_status pt_parser_get_thresholds(const pt_parser* parser, int pass, double* beam, double* global, double* mp_node,
                                   double* mp_prod) {
  return guarded([&] {
    require(parser, "parser");
    const ThresholdSet& t = parser->pipeline.passes().at(pass_index(parser->pipeline, pass)).thresholds;
    if (beam) *beam = t.beam;
    if (global) *global = t.global;
    if (mp_node) *mp_node = t.mp_node;
    if (mp_prod) *mp_prod = t.mp_prod;
  });
}

pt_status pt_parser_set_option(pt_parser* parser, const char* name, const char* value) {
  return guarded([&] {
    require(parser, "parser");
    require(name, "option name");
    require(value, "option value");
    ParseOptions& opt = parser->pipeline.options();
    const std::string n = name;
    const std::string v = value;
    if (n == "retry") {
      opt.retry.enabled = parse_flag(name, v);
    } else if (n == "retry-divisor") {
      const double d = parse_number(name, v);
      if (d <= 1.0) throw Error("retry divisor must exceed 1");
      opt.retry.divisor = d;
    } else if (n == "max-retries") {
      const double d = parse_number(name, v);
      if (d < 0 || d != std::floor(d) || d > 1000) throw Error("max-retries must be an integer in [0, 1000]");
      opt.retry.max_retries = static_cast<std::uint32_t>(d);
    } else if (n == "beam-prior") {
      opt.beam_prior = parse_flag(name, v);
    } else if (n == "loosen-gates") {
      opt.retry.loosen_gates = parse_flag(name, v);
    } else {
      throw Error("unknown option '" + n + "'");
    }
  });
}

pt_status pt_parser_thresholds(const pt_parser* parser, char** out) {
  return guarded([&] {
    require(parser, "parser");
    require(out, "output string");
    std::string text;
    for (const auto& p : parser->pipeline.passes()) text += format_thresholds(p.thresholds) + "\n";
    *out = dup_string(text);
  });
}

pt_status pt_parser_parse(pt_parser* parser, const char* sentence, pt_result** out) {
  return guarded([&] {
    require(parser, "parser");
    require(sentence, "sentence");
    require(out, "output handle");
    *out = nullptr;
    const Sentence s{"1", split_words(sentence)};
    auto result = std::make_unique<pt_result>();
    result->record = parser->pipeline.parse(s);
    result->tree = result->record.tree ? to_bracketed(*result->record.tree) : std::string(kFailureBracket);
    *out = result.release();
  });
}

void pt_result_free(pt_result* result) { delete result; }

int pt_result_failed(const pt_result* result) { return result ? result->record.failed() : 1; }

double pt_result_entropy(const pt_result* result) {
  return result ? result->record.entropy : std::numeric_limits<double>::infinity();
}

uint64_t pt_result_productions(const pt_result* result) { return result ? result->record.productions : 0; }

double pt_result_elapsed(const pt_result* result) { return result ? result->record.elapsed : 0.0; }

uint32_t pt_result_retries(const pt_result* result) { return result ? result->record.retries : 0; }

double pt_result_viterbi(const pt_result* result) { return result ? result->record.viterbi : kLogZero; }

const char* pt_result_tree(const pt_result* result) { return result ? result->tree.c_str() : kFailureBracket.data(); }

pt_status pt_parser_parse_file(pt_parser* parser, const char* sentences_path, const char* trees_out_path,
                               const char* records_out_path) {
  return guarded([&] {
    require(parser, "parser");
    require(sentences_path, "sentences path");
    const auto sentences = read_sentences_file(sentences_path);
    const bool trees_to_stdout = trees_out_path && std::string_view(trees_out_path) == "-";
    std::optional<std::ofstream> trees_out;
    std::optional<std::ofstream> records_out;
    if (trees_out_path && !trees_to_stdout) trees_out = open_out(trees_out_path);
    if (records_out_path) records_out = open_out(records_out_path);
    const auto records = parser->pipeline.parse_corpus(sentences);
    std::ostringstream trees;
    for (const auto& r : records) trees << (r.tree ? to_bracketed(*r.tree) : std::string(kFailureBracket)) << '\n';
    if (trees_to_stdout) {
      std::fwrite(trees.str().data(), 1, trees.str().size(), stdout);
      std::fflush(stdout);
    } else if (trees_out) {
      *trees_out << trees.str();
      check_written(*trees_out, trees_out_path);
    }
    if (records_out) {
      write_records(*records_out, records);
      check_written(*records_out, records_out_path);
    }
  });
}

pt_status pt_sweep(pt_parser* parser, const char* parameter, const double* values, size_t count,
                   const char* sentences_path, const char* gold_path, char** tsv_out) {
  return guarded([&] {
    require(parser, "parser");
    require(parameter, "parameter");
    require(sentences_path, "sentences path");
    require(tsv_out, "output string");
    if (count > 0) require(values, "values");
    *tsv_out = nullptr;
    as_argument([&] {
      Pipeline probe = parser->pipeline;
      for (std::size_t i = 0; i < count; ++i) probe.set_parameter(parameter, values[i]);
    });
    const auto sentences = read_sentences_file(sentences_path);
    std::vector<Tree> golds;
    if (gold_path) {
      golds = read_treebank_file(gold_path);
      if (golds.size() != sentences.size())
        throw FormatError("gold file has " + std::to_string(golds.size()) + " trees for " +
                          std::to_string(sentences.size()) + " sentences");
    }
    const auto rows = sweep(parser->pipeline, parameter, std::span<const double>(values, count), sentences, golds);
    std::ostringstream out;
    write_sweep(out, parameter, rows);
    *tsv_out = dup_string(out.str());
  });
}

pt_optimize_config pt_optimize_config_default(void) {
  const OptimizerConfig d;
  return pt_optimize_config{d.target_entropy, static_cast<uint32_t>(d.max_iterations), d.figure_direction ? 1 : 0};
}

pt_status pt_optimize(pt_parser* parser, const char* sentences_path, const pt_optimize_config* config,
                      char** trace_out, int* warning_out) {
  return guarded([&] {
    require(parser, "parser");
    require(sentences_path, "sentences path");
    require(config, "config");
    require(trace_out, "output string");
    *trace_out = nullptr;
    if (!std::isfinite(config->target_entropy) || config->target_entropy < 0)
      throw Error("target entropy must be a finite non-negative number");
    const auto sentences = read_sentences_file(sentences_path);
    OptimizerConfig oc;
    oc.target_entropy = config->target_entropy;
    oc.max_iterations = config->max_iterations;
    oc.figure_direction = config->figure_direction != 0;
    const Pipeline base = parser->pipeline;
    const auto result = optimize(oc, base.parameters(), [&](std::span<const double> params) {
      return evaluate(base, params, sentences);
    });
    parser->pipeline.set_parameters(result.params);
    std::ostringstream out;
    write_trace(out, result, base.parameter_names());
    *trace_out = dup_string(out.str());
    if (warning_out) *warning_out = result.hit_iteration_cap ? 1 : 0;
  });
}

pt_status pt_eval_files(const char* candidates_path, const char* gold_path, char** report_out) {
  return guarded([&] {
    require(candidates_path, "candidates path");
    require(gold_path, "gold path");
    require(report_out, "output string");
    *report_out = nullptr;
    std::ifstream in(candidates_path);
    if (!in) throw IoError(std::string("cannot open ") + candidates_path);
    const auto candidates = read_trees(in, candidates_path, true);
    const auto golds = read_treebank_file(gold_path);
    const PrecisionRecall pr = precision_recall(candidates, golds);
    std::uint64_t crossing = 0;
    std::uint64_t zero_crossing = 0;
    std::uint64_t failures = 0;
    for (std::size_t i = 0; i < golds.size(); ++i) {
      if (!candidates[i]) {
        ++failures;
        continue;
      }
      const auto x = crossing_brackets(*candidates[i], golds[i]);
      crossing += x;
      zero_crossing += x == 0;
    }
    std::ostringstream out;
    out << "sentences\t" << golds.size() << '\n'
        << "failures\t" << failures << '\n'
        << "matched\t" << pr.counts.matched << '\n'
        << "candidate\t" << pr.counts.candidate << '\n'
        << "gold\t" << pr.counts.gold << '\n'
        << "precision\t" << format_double(pr.precision) << '\n'
        << "recall\t" << format_double(pr.recall) << '\n'
        << "crossing\t" << crossing << '\n'
        << "zero_crossing\t" << zero_crossing << '\n';
    *report_out = dup_string(out.str());
  });
}

pt_status pt_compare_runs(const char* records_a_path, const char* records_b_path, const char* gold_path,
                          char** tsv_out) {
  return guarded([&] {
    require(records_a_path, "first records path");
    require(records_b_path, "second records path");
    require(gold_path, "gold path");
    require(tsv_out, "output string");
    *tsv_out = nullptr;
    auto load = [](const char* path) {
      std::ifstream in(path);
      if (!in) throw IoError(std::string("cannot open ") + path);
      return read_records(in, path);
    };
    const auto a = load(records_a_path);
    const auto b = load(records_b_path);
    const auto golds = read_treebank_file(gold_path);
    const MetricDelta delta = compare_runs(a, b, golds);
    std::ostringstream out;
    write_metric_delta(out, delta);
    out << "# compared " << delta.compared << ", dropped " << delta.dropped << '\n';
    *tsv_out = dup_string(out.str());
  });
}

}  // extern "C"
