// wtseq: command-line driver for the W-T sequence analysis pipeline.
//
//   wtseq synth --seed 7 -o out
//   wtseq all --input out/synth_events.jsonl --seed 7 -o out
//
// Options may also come from a key = value file passed with --config; flags on
// the command line win. WTSEQ_OUT_DIR sets the default output directory.

#include <cmath>
#include <iostream>

#include "CLI11.hpp"
#include "wtseq/ingest.hpp"
#include "wtseq/pipeline.hpp"

namespace {

constexpr const char* kStages[] = {"ingest",   "patterns", "fit",     "validate", "cluster",
                                   "converge", "networks", "survive", "synth",    "all"};

const char* kStageHelp(const std::string& s) {
  if (s == "ingest") return "Parse event logs, resolve aliases and build the cohort roster";
  if (s == "patterns") return "Count G-patterns and score enrichment against label shuffles";
  if (s == "fit") return "Estimate the two-state model (alpha, beta) per developer";
  if (s == "validate") return "Compare 3-pattern errors of the null and the fitted model";
  if (s == "cluster") return "k-means on fitted parameters; community centers and diversity";
  if (s == "converge") return "Inner/inter distances over prefixes, efficiency fit, monthly drift";
  if (s == "networks") return "Social and cooperative pair weights vs parameter distance";
  if (s == "survive") return "Developer metrics, censoring and Cox hazard ratios";
  if (s == "synth") return "Generate a synthetic event log with known ground truth";
  return "Run ingest through survive in order";
}

}  // namespace

int main(int argc, char** argv) {
  wtseq::RunConfig cfg;
  CLI::App app{"W-T sequence analysis of developer work and talk activity", "wtseq"};
  app.set_version_flag("--version", WTSEQ_VERSION);
  app.require_subcommand(1);
  app.set_config("--config", "", "Read options from a key = value file")->check(CLI::ExistingFile);

  std::string output_dir = cfg.output_dir.string();
  double xi_days = INFINITY;
  std::int64_t now = 0;
  std::uint64_t seed = 0;

  app.add_option("-i,--input", cfg.inputs, "Event log (.jsonl or .csv); repeatable")->delimiter(',');
  app.add_option("--alias-file", cfg.alias_file, "CSV of raw,canonical identity pairs")->check(CLI::ExistingFile);
  app.add_option("--min-activities", cfg.min_activities, "Minimum activities per developer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--min-devs", cfg.min_devs, "Minimum developers per community")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--xi-days", xi_days, "Maximum gap in days inside a counted pattern (inf = unbounded)")
      ->check(CLI::Validator(
          [](std::string& v) {
            double x = 0;
            return CLI::detail::lexical_cast(v, x) && x > 0 ? std::string() : std::string("must be a positive number");
          },
          "POSITIVE"))
      ->default_str("inf");
  app.add_option("--null-replicates", cfg.null_replicates, "Shuffled sequences per developer")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  app.add_option("--pattern-lengths", cfg.pattern_lengths, "Pattern lengths G to score")
      ->delimiter(',')
      ->check(CLI::Range(1, 20))
      ->capture_default_str();
  app.add_option("-k,--k", cfg.k, "Number of k-means clusters")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--kmeans-restarts", cfg.kmeans_restarts, "k-means++ restarts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--rho-grid", cfg.rho_grid, "Prefix lengths for the convergence analysis")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  app.add_option("--min-rho", cfg.min_rho, "Smallest allowed prefix length")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--first-prefix", cfg.first_prefix, "Prefix used for first-vs-full tests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--t-years", cfg.t_years, "Inactivity thresholds in years")
      ->delimiter(',')
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  auto* now_opt = app.add_option("--now", now, "Observation time, unix seconds (default: latest event)");
  auto* seed_opt = app.add_option("-s,--seed", seed, "Run seed; required by stochastic stages");
  app.add_flag("--include-zero-pairs", cfg.include_zero_pairs, "Keep zero-weight pairs in correlations");
  app.add_flag("--filter-pre-trim", cfg.filter_pre_trim, "Apply --min-activities before prefix trimming");
  app.add_flag("--per-replicate-error", cfg.per_replicate_error, "Average errors per replicate");
  app.add_flag("--welch", cfg.welch, "Use Welch's t-test instead of the pooled test");
  app.add_flag("--spearman-permutation", cfg.spearman_permutation, "Add permutation p-values for Spearman R");
  app.add_flag("--per-community-cox", cfg.per_community_cox, "Also fit Cox models per community");
  app.add_option("--min-per-month", cfg.min_per_month, "Activities needed to fit a calendar month")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("-j,--threads", cfg.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("-o,--output-dir", output_dir, "Directory for reports")->envname("WTSEQ_OUT_DIR")->capture_default_str();
  app.add_option("--synth-spec", cfg.synth_spec, "JSON generator spec (default: preset)")->check(CLI::ExistingFile);
  app.add_option("--synth-communities", cfg.synth_communities, "Preset: number of communities")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--synth-devs", cfg.synth_devs, "Preset: total developers")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--synth-length", cfg.synth_length, "Preset: activities per developer")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  for (const char* name : kStages) app.add_subcommand(name, kStageHelp(name))->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (std::isfinite(xi_days)) cfg.xi_days = xi_days;
  if (now_opt->count()) cfg.now = now;
  if (seed_opt->count()) cfg.seed = seed;
  cfg.output_dir = output_dir;
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    wtseq::run(wtseq::parse_stage(stage), cfg, std::cerr);
  } catch (const wtseq::PrerequisiteError& e) {
    std::cerr << "wtseq " << stage << ": " << e.what() << '\n';
    return 3;
  } catch (const wtseq::ConfigError& e) {
    std::cerr << "wtseq " << stage << ": configuration error: " << e.what() << '\n';
    return 2;
  } catch (const wtseq::ParseError& e) {
    std::cerr << "wtseq " << stage << ": input error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "wtseq " << stage << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
