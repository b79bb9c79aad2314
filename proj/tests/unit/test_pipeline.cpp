#include <filesystem>
#include <fstream>
#include <sstream>

#include "bundled.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_paths.hpp"

using namespace pcfgthresh;

namespace {

const Bundled& data() { return Bundled::get(PT_DATA_DIR); }

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("pcfgthresh_unit_" + name);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("sentence files keep blank lines aligned") {
  std::istringstream in("a b\n\n  c   d \n");
  const auto s = read_sentences(in);
  REQUIRE(s.size() == 3);
  CHECK(s[0].id == "1");
  CHECK(s[1].words.empty());
  CHECK(s[2].words == std::vector<std::string>{"c", "d"});

  const auto p = Pipeline::single(oracle::build(oracle::g1()));
  CHECK(p.parse_or_fail(s[1]).failed());
  CHECK(p.parse_or_fail(s[2]).failed());
  CHECK_THROWS_AS(p.parse(s[2]), ModelError);
  const RunRecord ok = p.parse({"7", {"a", "b"}});
  CHECK(ok.id == "7");
  CHECK(ok.entropy == 0.0);
  CHECK(ok.productions == 3);
}

TEST_CASE("parameter vectors") {
  const Bundled& b = data();
  Pipeline one = b.single({0.01, 0.02, 0, 0});
  CHECK(one.parameter_names() == std::vector<std::string>{"beam", "global"});
  CHECK(one.parameters() == std::vector<double>{0.01, 0.02});

  Pipeline two = b.two_pass(b.coarse, b.coarse_map, {0.1, 0, 0, 0}, {0.2, 0.3, 0.4, 0.5});
  CHECK(two.parameter_names() ==
        std::vector<std::string>{"p1.beam", "p1.global", "p2.beam", "p2.global", "p2.mpnode", "p2.mpprod"});
  CHECK(two.parameters() == std::vector<double>{0.1, 0, 0.2, 0.3, 0.4, 0.5});
  two.set_parameter("global", 0.05);
  two.set_parameter("p1.global", 0.06);
  CHECK(two.final_pass().thresholds.global == 0.05);
  CHECK(two.passes()[0].thresholds.global == 0.06);
  CHECK_THROWS_AS(two.set_parameter("width", 0.1), Error);
  CHECK_THROWS_AS(two.set_parameter("beam", 1.5), Error);
  const std::vector<double> short_vector{0.1};
  CHECK_THROWS_AS(two.set_parameters(short_vector), Error);
}

TEST_CASE("evaluate and sweep aggregate per-sentence parses") {
  const Bundled& b = data();
  const std::vector<Sentence> corpus(b.tune.begin(), b.tune.begin() + 10);
  const std::vector<Tree> golds(b.tune_gold.begin(), b.tune_gold.begin() + 10);
  const Pipeline base = b.single();

  double unpruned = 0.0;
  std::uint64_t unpruned_productions = 0;
  for (const auto& s : corpus) {
    const Chart c = parse_exhaustive(b.six, s.words);
    unpruned += c.entropy();
    unpruned_productions += c.stats().productions;
  }
  const std::vector<double> zero{0.0, 0.0};
  const Measurement m = evaluate(base, zero, corpus);
  CHECK(m.entropy == doctest::Approx(unpruned).epsilon(1e-12));
  CHECK(m.time == static_cast<double>(unpruned_productions));

  const std::vector<double> value{0.01};
  const auto rows = sweep(base, "beam", value, corpus, golds);
  REQUIRE(rows.size() == 1);
  Pipeline direct = base;
  direct.set_parameter("beam", 0.01);
  const auto records = direct.parse_corpus(corpus);
  const CorpusTotals t = totals(records);
  CHECK(rows[0].totals.entropy == t.entropy);
  CHECK(rows[0].totals.productions == t.productions);
  CHECK(rows[0].totals.failures == t.failures);
  REQUIRE(rows[0].accuracy.has_value());
  const auto trees = record_trees(records);
  const auto pr = precision_recall(trees, golds);
  CHECK(rows[0].accuracy->precision == pr.precision);
  CHECK(rows[0].accuracy->recall == pr.recall);

  std::ostringstream out;
  write_sweep(out, "beam", rows);
  CHECK(out.str().rfind("beam\t", 0) == 0);
}

TEST_CASE("pipeline files") {
  const Bundled& b = data();
  const auto dir = scratch_dir("pipeline");
  write_grammar_file((dir / "coarse.gr").string(), *b.coarse);
  write_grammar_file((dir / "six.gr").string(), *b.six);
  {
    std::ofstream out(dir / "coarse.desc");
    write_descendants(out, *b.coarse_map);
  }
  write_text(dir / "two.pipeline",
             "# coarse then fine\n[pass]\ngrammar = coarse.gr\nthresholds = beam=0.001\n\n"
             "[pass]\ngrammar = six.gr\ndescendants = coarse.desc\nthresholds = mpnode=1e-05 mpprod=1e-05\n");
  const Pipeline p = read_pipeline_file((dir / "two.pipeline").string());
  REQUIRE(p.passes().size() == 2);
  CHECK(p.passes()[0].thresholds.beam == 0.001);
  CHECK(p.final_pass().thresholds.mp_node == 1e-5);

  const Pipeline same = b.two_pass(b.coarse, b.coarse_map, {0.001, 0, 0, 0}, {0, 0, 1e-5, 1e-5});
  for (std::size_t i = 0; i < 5; ++i) {
    const RunRecord x = p.parse_or_fail(b.test[i]);
    const RunRecord y = same.parse_or_fail(b.test[i]);
    CHECK(x.entropy == y.entropy);
    CHECK(x.productions == y.productions);
    CHECK(x.tree == y.tree);
  }

  write_text(dir / "nodesc.pipeline", "[pass]\ngrammar = coarse.gr\n[pass]\ngrammar = six.gr\n");
  CHECK_THROWS_AS(read_pipeline_file((dir / "nodesc.pipeline").string()), FormatError);
  write_text(dir / "badkey.pipeline", "[pass]\ngrammar = six.gr\nwidth = 3\n");
  CHECK_THROWS_AS(read_pipeline_file((dir / "badkey.pipeline").string()), FormatError);
  write_text(dir / "missing.pipeline", "[pass]\ngrammar = nowhere.gr\n");
  CHECK_THROWS_AS(read_pipeline_file((dir / "missing.pipeline").string()), IoError);
  CHECK_THROWS_AS(read_pipeline_file((dir / "absent.pipeline").string()), IoError);
  std::filesystem::remove_all(dir);
}
