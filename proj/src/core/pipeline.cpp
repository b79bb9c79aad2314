#include "pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "errors.hpp"

namespace pcfgthresh {

std::vector<Sentence> read_sentences(std::istream& in) {
  std::vector<Sentence> out;
  std::string line;
  while (std::getline(in, line)) out.push_back({std::to_string(out.size() + 1), split_words(line)});
  return out;
}

std::vector<Sentence> read_sentences_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return read_sentences(in);
}

std::vector<Sentence> sentences_from_trees(std::span<const Tree> trees) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i < trees.size(); ++i) out.push_back({std::to_string(i + 1), trees[i].terminals()});
  return out;
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(std::vector<PassSpec> passes, ParseOptions options)
    : passes_(std::move(passes)), options_(options) {
  if (passes_.empty()) throw Error("pipeline has no passes");
  for (std::size_t k = 0; k < passes_.size(); ++k) {
    if (!passes_[k].grammar) throw Error("pass without a grammar");
    validate(passes_[k].thresholds);
    if (k > 0 && !passes_[k].descendants)
      throw FormatError("pass " + std::to_string(k + 1) + " needs a descendants map");
  }
}

Pipeline Pipeline::single(GrammarPtr grammar, const ThresholdSet& t, ParseOptions options) {
  return Pipeline({PassSpec{std::move(grammar), t, nullptr}}, options);
}

void Pipeline::set_thresholds(std::size_t pass, const ThresholdSet& t) {
  validate(t);
  passes_.at(pass).thresholds = t;
}

namespace {

struct ParamRef {
  std::size_t pass;
  double ThresholdSet::*field;
  const char* name;
};

std::vector<ParamRef> parameter_refs(std::size_t passes) {
  std::vector<ParamRef> refs;
  for (std::size_t k = 0; k < passes; ++k) {
    refs.push_back({k, &ThresholdSet::beam, "beam"});
    refs.push_back({k, &ThresholdSet::global, "global"});
    if (k > 0) {
      refs.push_back({k, &ThresholdSet::mp_node, "mpnode"});
      refs.push_back({k, &ThresholdSet::mp_prod, "mpprod"});
    }
  }
  return refs;
}

}  // namespace

std::vector<std::string> Pipeline::parameter_names() const {
  std::vector<std::string> out;
  for (const auto& r : parameter_refs(passes_.size()))
    out.push_back(passes_.size() == 1 ? std::string(r.name) : "p" + std::to_string(r.pass + 1) + "." + r.name);
  return out;
}

std::vector<double> Pipeline::parameters() const {
  std::vector<double> out;
  for (const auto& r : parameter_refs(passes_.size())) out.push_back(passes_[r.pass].thresholds.*r.field);
  return out;
}

void Pipeline::set_parameters(std::span<const double> values) {
  const auto refs = parameter_refs(passes_.size());
  if (values.size() != refs.size()) throw Error("parameter vector has the wrong size");
  for (std::size_t i = 0; i < refs.size(); ++i) passes_[refs[i].pass].thresholds.*refs[i].field = values[i];
  for (const auto& p : passes_) validate(p.thresholds);
}

void Pipeline::set_parameter(const std::string& name, double value) {
  const auto names = parameter_names();
  const auto refs = parameter_refs(passes_.size());
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const bool bare = refs[i].pass + 1 == passes_.size() && name == refs[i].name;
    if (names[i] == name || bare) {
      ThresholdSet t = passes_[refs[i].pass].thresholds;
      t.*refs[i].field = value;
      set_thresholds(refs[i].pass, t);
      return;
    }
  }
  throw FormatError("unknown threshold parameter '" + name + "'");
}

Chart Pipeline::parse_chart(std::span<const std::string> words) const {
  if (passes_.size() == 1) return parse_with_retry(passes_[0].grammar, words, passes_[0].thresholds, options_);
  return run_passes(passes_, words, options_);
}

RunRecord failure_record(const std::string& id, std::uint64_t productions) {
  RunRecord r;
  r.id = id;
  r.entropy = std::numeric_limits<double>::infinity();
  r.productions = productions;
  return r;
}

RunRecord Pipeline::parse(const Sentence& sentence) const {
  const Chart chart = parse_chart(sentence.words);
  RunRecord r;
  r.id = sentence.id;
  r.productions = chart.stats().productions;
  r.elapsed = chart.stats().elapsed;
  r.retries = chart.stats().retries;
  if (chart.failed()) {
    r.entropy = std::numeric_limits<double>::infinity();
    return r;
  }
  r.entropy = chart.entropy();
  r.viterbi = chart.viterbi_logprob();
  r.tree = debinarize(chart.viterbi_tree());
  return r;
}

RunRecord Pipeline::parse_or_fail(const Sentence& sentence) const {
  try {
    return parse(sentence);
  } catch (const ModelError&) {
    return failure_record(sentence.id);
  }
}

std::vector<RunRecord> Pipeline::parse_corpus(std::span<const Sentence> sentences, bool tolerate_failures) const {
  std::vector<RunRecord> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(tolerate_failures ? parse_or_fail(s) : parse(s));
  return out;
}

// ---------------------------------------------------------------------------

Pipeline read_pipeline_file(const std::string& path, ParseOptions options) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  const std::filesystem::path dir = std::filesystem::path(path).parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return (fp.is_absolute() || dir.empty() ? fp : dir / fp).string();
  };

  struct Section {
    std::map<std::string, std::string> keys;
    int line;
  };
  std::vector<Section> sections;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first, line.find_last_not_of(" \t\r") - first + 1);
    const std::string where = path + ":" + std::to_string(lineno);
    if (line == "[pass]") {
      sections.push_back({{}, lineno});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos || sections.empty()) throw FormatError(where + ": expected [pass] or key = value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      if (a == std::string::npos) return std::string();
      return s.substr(a, s.find_last_not_of(" \t") - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    if (key != "grammar" && key != "descendants" && key != "thresholds")
      throw FormatError(where + ": unknown key '" + key + "'");
    if (!sections.back().keys.emplace(key, trim(line.substr(eq + 1))).second)
      throw FormatError(where + ": duplicate key '" + key + "'");
  }
  if (sections.empty()) throw FormatError(path + ": no [pass] sections");

  std::map<std::string, GrammarPtr> loaded;
  std::vector<PassSpec> passes;
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    const std::string where = path + ":" + std::to_string(s.line);
    auto g = s.keys.find("grammar");
    if (g == s.keys.end()) throw FormatError(where + ": pass without grammar");
    const std::string gpath = resolve(g->second);
    auto& grammar = loaded[gpath];
    if (!grammar) grammar = std::make_shared<const Grammar>(read_grammar_file(gpath));
    PassSpec spec{grammar, {}, nullptr};
    if (auto t = s.keys.find("thresholds"); t != s.keys.end()) {
      try {
        spec.thresholds = parse_thresholds(t->second);
      } catch (const FormatError& e) {
        throw FormatError(where + ": " + e.what());
      }
    }
    auto d = s.keys.find("descendants");
    if (k == 0 && d != s.keys.end()) throw FormatError(where + ": the first pass takes no descendants map");
    if (k > 0) {
      if (d == s.keys.end()) throw FormatError(where + ": pass needs a descendants map");
      spec.descendants = std::make_shared<const DescendantsMap>(
          read_descendants_file(resolve(d->second), *passes.back().grammar, *grammar));
    }
    passes.push_back(std::move(spec));
  }
  return Pipeline(std::move(passes), options);
}

// ---------------------------------------------------------------------------

CorpusTotals totals(std::span<const RunRecord> records) {
  CorpusTotals t;
  for (const auto& r : records) {
    t.entropy += r.entropy;
    t.productions += r.productions;
    t.elapsed += r.elapsed;
    t.retries += r.retries;
    t.failures += r.failed();
  }
  return t;
}

Measurement evaluate(Pipeline pipeline, std::span<const double> params, std::span<const Sentence> sentences) {
  if (sentences.empty()) throw Error("empty tuning corpus");
  pipeline.set_parameters(params);
  const auto records = pipeline.parse_corpus(sentences, false);
  const CorpusTotals t = totals(records);
  return {t.entropy, static_cast<double>(t.productions)};
}

std::vector<std::optional<Tree>> record_trees(std::span<const RunRecord> records) {
  std::vector<std::optional<Tree>> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.tree);
  return out;
}

std::vector<SweepRow> sweep(const Pipeline& pipeline, const std::string& name, std::span<const double> values,
                            std::span<const Sentence> sentences, std::span<const Tree> golds) {
  std::vector<SweepRow> rows;
  for (double v : values) {
    Pipeline p = pipeline;
    p.set_parameter(name, v);
    const auto records = p.parse_corpus(sentences);
    SweepRow row{v, totals(records), std::nullopt};
    if (!golds.empty()) {
      const auto trees = record_trees(records);
      row.accuracy = precision_recall(trees, golds);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep(std::ostream& out, const std::string& name, std::span<const SweepRow> rows) {
  out << name << "\tentropy\tproductions\telapsed\tretries\tfailures\tprecision\trecall\n";
  for (const auto& r : rows) {
    out << format_double(r.value) << '\t' << format_double(r.totals.entropy) << '\t' << r.totals.productions << '\t'
        << format_double(r.totals.elapsed) << '\t' << r.totals.retries << '\t' << r.totals.failures;
    if (r.accuracy)
      out << '\t' << format_double(r.accuracy->precision) << '\t' << format_double(r.accuracy->recall);
    else
      out << "\t\t";
    out << '\n';
  }
}

}  // namespace pcfgthresh
