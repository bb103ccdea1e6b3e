#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "support.hpp"
#include "wtseq/pipeline.hpp"
#include "wtseq/report.hpp"

using namespace wtseq;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const fs::path& dir) {
  RunConfig cfg;
  cfg.seed = 99;
  cfg.output_dir = dir;
  cfg.synth_communities = 3;
  cfg.synth_devs = 18;
  cfg.synth_length = 600;
  cfg.min_activities = 200;
  cfg.null_replicates = 20;
  cfg.kmeans_restarts = 8;
  cfg.pattern_lengths = {2, 3};
  cfg.t_years = {0.5, 1.0, 2.0};
  return cfg;
}

// Synthesizes a small event log once per test binary.
const fs::path& synth_input() {
  static const fs::path path = [] {
    const auto dir = testing::scratch_dir("pipeline-input");
    std::ostringstream log;
    run(Stage::Synth, small_config(dir), log);
    return dir / "synth_events.jsonl";
  }();
  return path;
}

}  // namespace

TEST_CASE("stage names round trip") {
  for (auto s : {Stage::Ingest, Stage::Patterns, Stage::Fit, Stage::Validate, Stage::Cluster, Stage::Converge,
                 Stage::Networks, Stage::Survive, Stage::Synth, Stage::All})
    CHECK(parse_stage(to_string(s)) == s);
  CHECK_THROWS_AS(parse_stage("plot"), ConfigError);
}

TEST_CASE("all writes every report as csv and json") {
  const auto dir = testing::scratch_dir("pipeline-all");
  auto cfg = small_config(dir);
  cfg.inputs = {synth_input().string()};
  std::ostringstream log;
  run(Stage::All, cfg, log);
  for (const auto& name : stage_reports(Stage::All)) {
    INFO(name);
    REQUIRE(fs::exists(dir / (name + ".csv")));
    REQUIRE(fs::exists(dir / (name + ".json")));
    const auto csv = report::read_csv(dir / (name + ".csv"));
    const auto json = nlohmann::json::parse(testing::slurp(dir / (name + ".json")));
    CHECK(json["columns"].get<std::vector<std::string>>() == csv.columns);
    REQUIRE(json["rows"].size() == csv.rows.size());
    for (std::size_t i = 0; i < csv.rows.size(); ++i)
      for (const auto& col : csv.columns) {
        const auto& v = json["rows"][i][col];
        if (v.is_null()) CHECK(csv.rows[i].at(col).empty());
        else if (v.is_string()) CHECK(v.get<std::string>() == csv.rows[i].at(col));
        else if (v.is_number_integer()) CHECK(std::to_string(v.get<std::int64_t>()) == csv.rows[i].at(col));
        else CHECK(v.get<double>() == report::to_double(csv.rows[i].at(col)));
      }
  }
  const auto hmm = report::read_csv(dir / "hmm.csv");
  CHECK(hmm.columns == std::vector<std::string>{"community", "actor", "alpha", "beta", "alpha_plus_beta", "p_w", "p_t",
                                                 "n_activities"});
  CHECK(hmm.rows.size() == 18);
  const auto manifest = nlohmann::json::parse(testing::slurp(dir / "run_manifest.json"));
  CHECK(manifest["config"]["seed"] == "99");
  CHECK(manifest["stages"].size() == 8);
  CHECK(manifest["stages"][0]["inputs"][0]["fnv1a64"].get<std::string>().size() == 16);
  // Three thresholds: one hazards row per covariate and threshold.
  CHECK(report::read_csv(dir / "hazards.csv").rows.size() == 6);
}

TEST_CASE("outputs do not depend on the worker count") {
  const auto root = testing::scratch_dir("pipeline-threads");
  for (unsigned threads : {1U, 4U}) {
    auto cfg = small_config(root / std::to_string(threads));
    cfg.inputs = {synth_input().string()};
    cfg.threads = threads;
    std::ostringstream log;
    run(Stage::All, cfg, log);
  }
  for (const auto& entry : fs::directory_iterator(root / "1")) {
    INFO(entry.path().filename().string());
    CHECK(testing::slurp(entry.path()) == testing::slurp(root / "4" / entry.path().filename()));
  }
}

TEST_CASE("stages can run one at a time") {
  const auto dir = testing::scratch_dir("pipeline-steps");
  auto cfg = small_config(dir);
  cfg.inputs = {synth_input().string()};
  std::ostringstream log;
  CHECK_THROWS_AS(run(Stage::Validate, cfg, log), PrerequisiteError);
  run(Stage::Ingest, cfg, log);
  try {
    run(Stage::Validate, cfg, log);
    FAIL("expected a prerequisite error");
  } catch (const PrerequisiteError& e) {
    CHECK(e.stage() == "fit");
    CHECK(std::string(e.what()).find("run the 'fit' stage first") != std::string::npos);
  }
  CHECK_THROWS_AS(run(Stage::Survive, cfg, log), PrerequisiteError);
  run(Stage::Fit, cfg, log);
  run(Stage::Validate, cfg, log);
  run(Stage::Cluster, cfg, log);
  run(Stage::Survive, cfg, log);

  auto changed = cfg;
  changed.min_activities = 590;
  CHECK_THROWS_AS(run(Stage::Fit, changed, log), ConfigError);
}

TEST_CASE("stochastic stages need a seed") {
  const auto dir = testing::scratch_dir("pipeline-seed");
  auto cfg = small_config(dir);
  cfg.inputs = {synth_input().string()};
  std::ostringstream log;
  run(Stage::Ingest, cfg, log);
  cfg.seed.reset();
  CHECK_NOTHROW(run(Stage::Fit, cfg, log));
  CHECK_THROWS_AS(run(Stage::Patterns, cfg, log), ConfigError);
  CHECK_THROWS_AS(run(Stage::Synth, cfg, log), ConfigError);
}

TEST_CASE("bad input is reported") {
  const auto dir = testing::scratch_dir("pipeline-bad");
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"actor":"a","community":"c","kind":"work","ts":1})" << "\n{oops\n";
  }
  auto cfg = small_config(dir / "out");
  cfg.inputs = {(dir / "bad.jsonl").string()};
  std::ostringstream log;
  try {
    run(Stage::Ingest, cfg, log);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  cfg.inputs = {(dir / "missing.jsonl").string()};
  CHECK_THROWS(run(Stage::Ingest, cfg, log));
}

TEST_CASE("config text lists every option") {
  RunConfig cfg;
  cfg.seed = 3;
  cfg.xi_days = 7.0;
  cfg.pattern_lengths = {2, 3};
  const auto text = cfg.to_config_text();
  CHECK(text.find("seed = 3\n") != std::string::npos);
  CHECK(text.find("xi-days = 7\n") != std::string::npos);
  CHECK(text.find("pattern-lengths = 2,3\n") != std::string::npos);
  CHECK(text.find("output") == std::string::npos);
}
