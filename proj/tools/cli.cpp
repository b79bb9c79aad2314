// pcfgthresh command-line front end. Everything goes through the C API.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pcfgthresh/pcfgthresh.h"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kFormat = 3, kModel = 4, kIo = 5 };

struct Failure {
  int code;
};

int exit_code(pt_status s) {
  switch (s) {
    case PT_OK:
      return kOk;
    case PT_ERR_ARGUMENT:
      return kUsage;
    case PT_ERR_FORMAT:
      return kFormat;
    case PT_ERR_MODEL:
      return kModel;
    case PT_ERR_IO:
      return kIo;
    default:
      return kInternal;
  }
}

void check(pt_status s) {
  if (s == PT_OK) return;
  std::cerr << "pcfgthresh: " << pt_last_error() << '\n';
  throw Failure{exit_code(s)};
}

struct StringDeleter {
  void operator()(char* s) const { pt_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ParserDeleter {
  void operator()(pt_parser* p) const { pt_parser_free(p); }
};
using ParserPtr = std::unique_ptr<pt_parser, ParserDeleter>;

void emit(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  out << text;
  out.flush();
  if (!out) {
    std::cerr << "pcfgthresh: cannot write " << path << '\n';
    throw Failure{kIo};
  }
}

// Grammar or pipeline selection, thresholds for the final pass and retry
// options, shared by parse, sweep and optimize.
struct ParserArgs {
  std::string grammar;
  std::string pipeline;
  double beam = 0.0;
  double global = 0.0;
  double mp_node = 0.0;
  double mp_prod = 0.0;
  double retry_divisor = 5.0;
  unsigned max_retries = 6;
  bool no_retry = false;
  bool no_prior = false;
  bool loosen_gates = false;
  CLI::Option* threshold_opts[4] = {};

  void add(CLI::App* cmd) {
    auto* g = cmd->add_option("--grammar", grammar, "Grammar file (single pass)")->check(CLI::ExistingFile);
    auto* p = cmd->add_option("--pipeline", pipeline, "Pipeline file (one or more passes)")->check(CLI::ExistingFile);
    g->excludes(p);
    threshold_opts[0] = cmd->add_option("--beam", beam, "Beam ratio for the final pass")->check(CLI::Range(0.0, 1.0));
    threshold_opts[1] = cmd->add_option("--global", global, "Global ratio for the final pass")->check(CLI::Range(0.0, 1.0));
    threshold_opts[2] = cmd->add_option("--mp-node", mp_node, "Node gate for the final pass")->check(CLI::Range(0.0, 1.0));
    threshold_opts[3] = cmd->add_option("--mp-prod", mp_prod, "Production gate for the final pass")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--retry-divisor", retry_divisor, "Threshold divisor on failure")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-retries", max_retries, "Retries before an unpruned attempt")->capture_default_str();
    cmd->add_flag("--no-retry", no_retry, "Report failures instead of retrying");
    cmd->add_flag("--no-prior", no_prior, "Beam on inside probability alone");
    cmd->add_flag("--loosen-gates", loosen_gates, "Also loosen multi-pass gates on retry");
  }

  ParserPtr open() const {
    if (grammar.empty() == pipeline.empty()) {
      std::cerr << "pcfgthresh: exactly one of --grammar and --pipeline is required\n";
      throw Failure{kUsage};
    }
    pt_parser* raw = nullptr;
    check(grammar.empty() ? pt_parser_open_pipeline(pipeline.c_str(), &raw)
                          : pt_parser_open_grammar(grammar.c_str(), &raw));
    ParserPtr parser(raw);
    // Flags override the final pass; unset ones keep the pipeline file's value.
    double t[4] = {};
    check(pt_parser_get_thresholds(parser.get(), -1, &t[0], &t[1], &t[2], &t[3]));
    const double flags[4] = {beam, global, mp_node, mp_prod};
    for (int i = 0; i < 4; ++i)
      if (threshold_opts[i]->count() > 0) t[i] = flags[i];
    check(pt_parser_set_thresholds(parser.get(), -1, t[0], t[1], t[2], t[3]));
    check(pt_parser_set_option(parser.get(), "retry", no_retry ? "0" : "1"));
    check(pt_parser_set_option(parser.get(), "retry-divisor", std::to_string(retry_divisor).c_str()));
    check(pt_parser_set_option(parser.get(), "max-retries", std::to_string(max_retries).c_str()));
    check(pt_parser_set_option(parser.get(), "beam-prior", no_prior ? "0" : "1"));
    check(pt_parser_set_option(parser.get(), "loosen-gates", loosen_gates ? "1" : "0"));
    return parser;
  }
};

std::vector<double> log_range(const std::vector<double>& spec) {
  if (spec.size() != 3 || spec[0] <= 0 || spec[1] <= 0 || spec[2] < 2 || spec[2] != std::floor(spec[2])) {
    std::cerr << "pcfgthresh: --log-range takes LO,HI,COUNT with LO,HI > 0 and COUNT >= 2\n";
    throw Failure{kUsage};
  }
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(spec[2]);
  const double a = std::log10(spec[0]);
  const double b = std::log10(spec[1]);
  for (std::size_t i = 0; i < n; ++i)
    out.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thresholded CKY parsing for probabilistic context-free grammars"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pt_version());

  // induce
  auto* induce = app.add_subcommand("induce", "Read a grammar off a treebank");
  std::string treebank, transform = "6gram", out;
  induce->add_option("--treebank", treebank, "Bracketed trees, one per line")->required()->check(CLI::ExistingFile);
  induce->add_option("--transform", transform, "6gram, terminal-prime or coarse")->capture_default_str();
  induce->add_option("--out", out, "Grammar output file")->required();

  // descendants
  auto* desc = app.add_subcommand("descendants", "Build a descendants map between two grammars");
  std::string first, second, first_transform = "terminal-prime";
  desc->add_option("--first", first, "First-pass grammar")->required()->check(CLI::ExistingFile);
  desc->add_option("--second", second, "Second-pass (6gram) grammar")->required()->check(CLI::ExistingFile);
  desc->add_option("--transform", first_transform, "Transform the first grammar was built with")
      ->capture_default_str();
  desc->add_option("--out", out, "Descendants output file")->required();

  // parse
  auto* parse = app.add_subcommand("parse", "Parse a sentence file");
  ParserArgs parse_args;
  parse_args.add(parse);
  std::string sentences, records;
  parse->add_option("--sentences", sentences, "One tag sequence per line")->required()->check(CLI::ExistingFile);
  parse->add_option("--out", out, "Tree output file (default stdout)");
  parse->add_option("--records", records, "JSON-lines statistics output");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Parse once per value of one threshold");
  ParserArgs sweep_args;
  sweep_args.add(sweep);
  std::string parameter = "beam", gold;
  std::vector<double> values, range;
  sweep->add_option("--sentences", sentences, "One tag sequence per line")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", parameter, "beam, global, mpnode, mpprod or p<k>.<name>")->capture_default_str();
  auto* values_opt = sweep->add_option("--values", values, "Comma-separated values")->delimiter(',');
  auto* range_opt = sweep->add_option("--log-range", range, "LO,HI,COUNT log-spaced values")->delimiter(',');
  values_opt->excludes(range_opt);
  sweep->add_option("--gold", gold, "Gold trees for precision and recall")->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "TSV output (default stdout)");

  // optimize
  auto* opt = app.add_subcommand("optimize", "Tune the nonzero thresholds to a target entropy");
  ParserArgs opt_args;
  opt_args.add(opt);
  double target = 0.0;
  unsigned max_iterations = pt_optimize_config_default().max_iterations;
  bool inverse_direction = false;
  std::string trace;
  opt->add_option("--sentences", sentences, "Tuning sentences")->required()->check(CLI::ExistingFile);
  opt->add_option("--target-entropy", target, "Total entropy to reach (bits)")->required();
  opt->add_option("--max-iterations", max_iterations, "Iteration cap")->capture_default_str();
  opt->add_flag("--loosen-above-target", inverse_direction, "Loosen rather than tighten while above target");
  opt->add_option("--trace", trace, "Search trace TSV (default stdout)");
  opt->add_option("--out", out, "Final thresholds, one line per pass (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "Labeled bracket precision and recall");
  std::string candidates;
  eval->add_option("--candidates", candidates, "Parser trees, (()) for failures")->required()->check(CLI::ExistingFile);
  eval->add_option("--gold", gold, "Gold trees")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", out, "Report output (default stdout)");

  // compare
  auto* compare = app.add_subcommand("compare", "Per-sentence metric changes between two runs");
  std::string run_a, run_b;
  compare->add_option("--a", run_a, "Records of the first run")->required()->check(CLI::ExistingFile);
  compare->add_option("--b", run_b, "Records of the second run")->required()->check(CLI::ExistingFile);
  compare->add_option("--gold", gold, "Gold trees")->required()->check(CLI::ExistingFile);
  compare->add_option("--out", out, "TSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*induce) {
      check(pt_induce_file(treebank.c_str(), transform.c_str(), out.c_str()));
    } else if (*desc) {
      check(pt_build_descendants(first.c_str(), second.c_str(), first_transform.c_str(), out.c_str()));
    } else if (*parse) {
      auto parser = parse_args.open();
      check(pt_parser_parse_file(parser.get(), sentences.c_str(), out.empty() ? "-" : out.c_str(),
                                 records.empty() ? nullptr : records.c_str()));
    } else if (*sweep) {
      auto parser = sweep_args.open();
      if (range_opt->count() > 0) values = log_range(range);
      if (values.empty()) {
        std::cerr << "pcfgthresh: sweep needs --values or --log-range\n";
        throw Failure{kUsage};
      }
      char* text = nullptr;
      check(pt_sweep(parser.get(), parameter.c_str(), values.data(), values.size(), sentences.c_str(),
                     gold.empty() ? nullptr : gold.c_str(), &text));
      OwnedString owned(text);
      emit(out, owned.get());
    } else if (*opt) {
      auto parser = opt_args.open();
      pt_optimize_config config = pt_optimize_config_default();
      config.target_entropy = target;
      config.max_iterations = max_iterations;
      config.figure_direction = inverse_direction ? 0 : 1;
      char* text = nullptr;
      int warning = 0;
      check(pt_optimize(parser.get(), sentences.c_str(), &config, &text, &warning));
      OwnedString owned_trace(text);
      emit(trace, owned_trace.get());
      if (warning) std::cerr << "pcfgthresh: warning: iteration cap reached before convergence\n";
      check(pt_parser_thresholds(parser.get(), &text));
      OwnedString owned_final(text);
      emit(out, owned_final.get());
    } else if (*eval) {
      char* text = nullptr;
      check(pt_eval_files(candidates.c_str(), gold.c_str(), &text));
      OwnedString owned(text);
      emit(out, owned.get());
    } else if (*compare) {
      char* text = nullptr;
      check(pt_compare_runs(run_a.c_str(), run_b.c_str(), gold.c_str(), &text));
      OwnedString owned(text);
      emit(out, owned.get());
    }
  } catch (const Failure& f) {
    return f.code;
  }
  return kOk;
}
