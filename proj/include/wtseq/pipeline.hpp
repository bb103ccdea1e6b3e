#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wtseq {

enum class Stage { Ingest, Patterns, Fit, Validate, Cluster, Converge, Networks, Survive, Synth, All };

std::string to_string(Stage s);
Stage parse_stage(const std::string& name);

class PrerequisiteError : public std::runtime_error {
 public:
  PrerequisiteError(const std::string& stage, const std::string& missing)
      : std::runtime_error("missing " + missing + "; run the '" + stage + "' stage first"), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct RunConfig {
  std::vector<std::string> inputs;
  std::string alias_file;
  std::size_t min_activities = 500;
  std::size_t min_devs = 5;
  std::optional<double> xi_days;  // unbounded when absent
  int null_replicates = 100;
  std::vector<int> pattern_lengths{2};
  int k = 3;
  int kmeans_restarts = 32;
  std::vector<std::size_t> rho_grid;  // empty: 100-step grid up to the longest sequence
  std::size_t min_rho = 100;
  std::size_t first_prefix = 100;
  std::vector<double> t_years{1.0};
  std::optional<std::int64_t> now;  // default: latest timestamp in the data
  std::optional<std::uint64_t> seed;
  bool include_zero_pairs = false;
  bool filter_pre_trim = false;
  bool per_replicate_error = false;
  bool welch = false;
  bool spearman_permutation = false;
  bool per_community_cox = false;
  std::size_t min_per_month = 20;
  unsigned threads = 1;
  std::filesystem::path output_dir = "wtseq-out";

  // synth stage
  std::string synth_spec;  // JSON spec file; preset when empty
  int synth_communities = 14;
  int synth_devs = 120;
  std::size_t synth_length = 2000;

  /// key = value lines accepted by --config; round-trips through the CLI.
  std::string to_config_text() const;
};

/// Runs one stage (or every stage for Stage::All) and writes its reports and
/// run_manifest.json into config.output_dir. Progress lines go to `log`.
void run(Stage stage, const RunConfig& config, std::ostream& log);

/// Names of the report files (without extension) each stage writes.
std::vector<std::string> stage_reports(Stage stage);

}  // namespace wtseq
