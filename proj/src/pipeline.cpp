#include "wtseq/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "wtseq/community.hpp"
#include "wtseq/csv.hpp"
#include "wtseq/hmm.hpp"
#include "wtseq/ingest.hpp"
#include "wtseq/networks.hpp"
#include "wtseq/parallel.hpp"
#include "wtseq/patterns.hpp"
#include "wtseq/report.hpp"
#include "wtseq/rng.hpp"
#include "wtseq/survival.hpp"
#include "wtseq/synth.hpp"

#ifndef WTSEQ_VERSION
#define WTSEQ_VERSION "dev"
#endif

namespace wtseq {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using report::Cell;
using report::Table;

namespace {

constexpr const char* kEventsFile = "events.jsonl";

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

template <class T>
std::string join_numbers(const std::vector<T>& v) {
  std::vector<std::string> parts;
  for (const auto& x : v) {
    if constexpr (std::is_floating_point_v<T>) parts.push_back(csv::format_double(x));
    else parts.push_back(std::to_string(x));
  }
  return join(parts, ",");
}

std::string file_digest(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(ss.str())));
  return buf;
}

std::string month_label(int year, unsigned month) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
  return buf;
}

using DevKey = std::pair<std::string, std::string>;  // (community, actor)

struct DevRef {
  const Community* community;
  const Developer* dev;
};

std::vector<DevRef> flatten(const CommunityDataset& ds) {
  std::vector<DevRef> out;
  for (const auto& c : ds.communities)
    for (const auto& d : c.developers) out.push_back({&c, &d});
  return out;
}

class Runner {
 public:
  Runner(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log), out_(cfg.output_dir) {}

  void run(Stage stage) {
    fs::create_directories(out_);
    manifest_["tool"] = "wtseq";
    manifest_["version"] = WTSEQ_VERSION;
    manifest_["command"] = to_string(stage);
    manifest_["config"] = config_json();
    manifest_["stages"] = ordered_json::array();
    if (stage == Stage::All) {
      for (auto s : {Stage::Ingest, Stage::Patterns, Stage::Fit, Stage::Validate, Stage::Cluster, Stage::Converge,
                     Stage::Networks, Stage::Survive})
        run_stage(s);
    } else {
      run_stage(stage);
    }
    std::ofstream out(out_ / "run_manifest.json", std::ios::binary);
    out << manifest_.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write run_manifest.json");
  }

 private:
  const RunConfig& cfg_;
  std::ostream& log_;
  fs::path out_;
  ordered_json manifest_;
  ordered_json stage_info_;

  // lazily loaded inputs shared between stages of one run
  std::optional<std::vector<Event>> events_;
  std::optional<CommunityDataset> dataset_;
  std::optional<std::map<DevKey, HmmParams>> params_;

  ordered_json config_json() const {
    ordered_json c;
    std::istringstream lines(cfg_.to_config_text());
    std::string line;
    while (std::getline(lines, line)) {
      auto eq = line.find(" = ");
      if (eq != std::string::npos) c[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return c;
  }

  std::uint64_t seed_for(const char* stage) const {
    if (!cfg_.seed) throw ConfigError(std::string("--seed is required for the '") + stage + "' stage");
    return *cfg_.seed;
  }

  void write(const std::string& name, const Table& t) {
    for (const auto& p : report::write_table(out_, name, t))
      stage_info_["outputs"].push_back({{"file", p.filename().string()}, {"fnv1a64", file_digest(p)}});
  }

  void run_stage(Stage s) {
    const auto started = std::chrono::steady_clock::now();
    stage_info_ = ordered_json::object();
    stage_info_["stage"] = to_string(s);
    stage_info_["outputs"] = ordered_json::array();
    switch (s) {
      case Stage::Ingest: ingest(); break;
      case Stage::Patterns: patterns(); break;
      case Stage::Fit: fit(); break;
      case Stage::Validate: validate(); break;
      case Stage::Cluster: cluster(); break;
      case Stage::Converge: converge(); break;
      case Stage::Networks: networks(); break;
      case Stage::Survive: survive(); break;
      case Stage::Synth: synth(); break;
      case Stage::All: break;
    }
    manifest_["stages"].push_back(stage_info_);
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    log_ << "[" << to_string(s) << "] done in " << ms << " ms\n";
  }

  // ---- shared loading -------------------------------------------------

  CohortOptions cohort() const { return {cfg_.min_activities, cfg_.min_devs, cfg_.filter_pre_trim}; }

  const std::vector<Event>& events() {
    if (!events_) {
      const auto path = out_ / kEventsFile;
      if (!fs::exists(path)) throw PrerequisiteError("ingest", path.string());
      std::ifstream in(path, std::ios::binary);
      events_ = parse_events(in, EventFormat::Jsonl);
    }
    return *events_;
  }

  const CommunityDataset& dataset() {
    if (!dataset_) {
      dataset_ = build_dataset(filter_responses(events()), cohort());
      const auto roster_path = out_ / "roster.csv";
      if (!fs::exists(roster_path)) throw PrerequisiteError("ingest", roster_path.string());
      std::set<DevKey> expected, actual;
      for (const auto& row : report::read_csv(roster_path).rows) expected.emplace(row.at("community"), row.at("actor"));
      for (const auto& r : flatten(*dataset_)) actual.emplace(r.community->name, r.dev->actor);
      if (expected != actual)
        throw ConfigError("cohort options differ from the ones used by the ingest stage; re-run 'ingest'");
    }
    return *dataset_;
  }

  const std::map<DevKey, HmmParams>& fitted() {
    if (!params_) {
      const auto path = out_ / "hmm.csv";
      if (!fs::exists(path)) throw PrerequisiteError("fit", path.string());
      std::map<DevKey, HmmParams> m;
      for (const auto& row : report::read_csv(path).rows)
        m[{row.at("community"), row.at("actor")}] = {report::to_double(row.at("alpha")),
                                                     report::to_double(row.at("beta"))};
      params_ = std::move(m);
    }
    return *params_;
  }

  std::vector<ParamPoint> fitted_points() {
    std::vector<ParamPoint> pts;
    for (const auto& [key, p] : fitted()) pts.push_back({key.second, key.first, p});
    std::sort(pts.begin(), pts.end(), [](const ParamPoint& a, const ParamPoint& b) {
      return std::tie(a.community, a.actor) < std::tie(b.community, b.actor);
    });
    return pts;
  }

  // ---- stages ---------------------------------------------------------

  void ingest() {
    if (cfg_.inputs.empty()) throw ConfigError("ingest needs at least one --input file");
    std::vector<Event> all;
    auto& inputs = stage_info_["inputs"] = ordered_json::array();
    for (const auto& path : cfg_.inputs) {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read input " + path);
      const auto format = fs::path(path).extension() == ".csv" ? EventFormat::Csv : EventFormat::Jsonl;
      std::vector<Event> parsed;
      try {
        parsed = parse_events(in, format);
      } catch (const ParseError& err) {
        throw std::runtime_error(path + ": " + err.what());
      }
      inputs.push_back({{"path", path}, {"fnv1a64", file_digest(path)}, {"records", parsed.size()}});
      all.insert(all.end(), std::make_move_iterator(parsed.begin()), std::make_move_iterator(parsed.end()));
    }
    const auto n_records = all.size();
    AliasMap aliases;
    if (!cfg_.alias_file.empty()) {
      std::ifstream in(cfg_.alias_file, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read alias file " + cfg_.alias_file);
      aliases = AliasMap::parse_csv(in);
      stage_info_["alias_file"] = {{"path", cfg_.alias_file}, {"fnv1a64", file_digest(cfg_.alias_file)}};
    }
    auto resolved = sort_and_deduplicate(resolve_aliases(std::move(all), aliases));
    {
      std::ofstream out(out_ / kEventsFile, std::ios::binary);
      write_events(out, resolved, EventFormat::Jsonl);
    }
    stage_info_["outputs"].push_back({{"file", kEventsFile}, {"fnv1a64", file_digest(out_ / kEventsFile)}});
    const auto responses = filter_responses(resolved);
    events_ = std::move(resolved);
    dataset_ = build_dataset(responses, cohort());

    Table roster{{"community", "actor", "n_activities", "n_events", "first_ts", "last_ts"}, {}};
    for (const auto& r : flatten(*dataset_))
      roster.add({r.community->name, r.dev->actor, report::cell(r.dev->sequence.size()),
                  report::cell(r.dev->events.size()), r.dev->first_ts, r.dev->last_ts});
    write("roster", roster);
    stage_info_["records"] = n_records;
    stage_info_["after_dedup"] = events_->size();
    stage_info_["after_response_filter"] = responses.size();
    stage_info_["communities"] = dataset_->communities.size();
    stage_info_["developers"] = dataset_->developer_count();
    log_ << "[ingest] " << n_records << " records, " << dataset_->communities.size() << " communities, "
         << dataset_->developer_count() << " developers retained\n";
  }

  void patterns() {
    const auto seed = seed_for("patterns");
    const auto devs = flatten(dataset());
    const auto xi = gap_limit_days(cfg_.xi_days);
    std::vector<std::vector<EnrichmentResult>> results(devs.size());
    parallel_for(devs.size(), cfg_.threads, [&](std::size_t i) {
      for (int g : cfg_.pattern_lengths) {
        const auto sub = derive_seed(seed, {fnv1a("patterns"), fnv1a(devs[i].community->name),
                                            fnv1a(devs[i].dev->actor), static_cast<std::uint64_t>(g)});
        results[i].push_back(enrichment(devs[i].dev->sequence, g, cfg_.null_replicates, xi, sub));
      }
    });
    Table t{{"community", "actor", "G", "pattern", "observed", "null_mean", "null_std", "lambda_pct", "z",
             "replicates", "xi_days", "seed"},
            {}};
    struct Agg {
      double lambda_sum = 0;
      std::size_t n_lambda = 0, n_z = 0, n_z_gt5 = 0;
    };
    std::map<std::pair<int, std::string>, Agg> agg;
    const Cell xi_cell = cfg_.xi_days ? Cell(*cfg_.xi_days) : Cell(std::string("inf"));
    for (std::size_t i = 0; i < devs.size(); ++i)
      for (const auto& res : results[i])
        for (const auto& p : res.patterns) {
          t.add({devs[i].community->name, devs[i].dev->actor, static_cast<std::int64_t>(res.g), p.pattern,
                 report::cell(p.observed), p.null_mean, p.null_std, report::cell(p.lambda_pct), report::cell(p.z),
                 static_cast<std::int64_t>(res.replicates), xi_cell, std::to_string(res.seed)});
          auto& a = agg[{res.g, p.pattern}];
          if (p.lambda_pct) {
            a.lambda_sum += *p.lambda_pct;
            ++a.n_lambda;
          }
          if (p.z) {
            ++a.n_z;
            if (std::abs(*p.z) > 5.0) ++a.n_z_gt5;
          }
        }
    write("enrichment", t);
    Table s{{"G", "pattern", "mean_lambda_pct", "n_lambda", "n_z", "n_abs_z_gt_5"}, {}};
    for (const auto& [key, a] : agg)
      s.add({static_cast<std::int64_t>(key.first), key.second,
             report::cell(a.n_lambda ? std::optional<double>(a.lambda_sum / static_cast<double>(a.n_lambda))
                                     : std::nullopt),
             report::cell(a.n_lambda), report::cell(a.n_z), report::cell(a.n_z_gt5)});
    write("enrichment_summary", s);
  }

  void fit() {
    const auto devs = flatten(dataset());
    Table t{{"community", "actor", "alpha", "beta", "alpha_plus_beta", "p_w", "p_t", "n_activities"}, {}};
    Table excluded{{"community", "actor", "reason"}, {}};
    std::map<DevKey, HmmParams> params;
    for (const auto& r : devs) {
      try {
        const auto p = estimate(r.dev->sequence);
        std::optional<double> pw, pt;
        try {
          const auto ss = steady_state(p);
          pw = ss.p_work;
          pt = ss.p_talk;
        } catch (const SingularityError&) {
        }
        t.add({r.community->name, r.dev->actor, p.alpha, p.beta, p.alpha + p.beta, report::cell(pw),
               report::cell(pt), report::cell(r.dev->sequence.size())});
        params[{r.community->name, r.dev->actor}] = p;
      } catch (const EstimationError& err) {
        excluded.add({r.community->name, r.dev->actor, std::string(err.what())});
      }
    }
    write("hmm", t);
    write("hmm_exclusions", excluded);
    params_ = std::move(params);
  }

  void validate() {
    const auto seed = seed_for("validate");
    const auto& params = fitted();
    std::vector<DevRef> devs;
    for (const auto& r : flatten(dataset()))
      if (params.count({r.community->name, r.dev->actor})) devs.push_back(r);
    const auto aggregation = cfg_.per_replicate_error ? ErrorAggregation::PerReplicate : ErrorAggregation::MeanCounts;
    std::vector<std::optional<ValidationResult>> results(devs.size());
    parallel_for(devs.size(), cfg_.threads, [&](std::size_t i) {
      if (devs[i].dev->sequence.size() < 3) return;
      const auto sub =
          derive_seed(seed, {fnv1a("validate"), fnv1a(devs[i].community->name), fnv1a(devs[i].dev->actor)});
      results[i] = validate_three_patterns(devs[i].dev->sequence, cfg_.null_replicates, sub, aggregation);
    });
    Table t{{"community", "actor", "pattern", "observed", "null_mean", "model_mean", "e_star", "e_model"}, {}};
    std::vector<std::vector<double>> per_null(8), per_model(8);
    std::vector<double> dev_null, dev_model;
    for (std::size_t i = 0; i < devs.size(); ++i) {
      if (!results[i]) continue;
      for (std::size_t w = 0; w < 8; ++w) {
        const auto& p = results[i]->patterns[w];
        t.add({devs[i].community->name, devs[i].dev->actor, p.pattern, report::cell(p.observed), p.null_mean,
               p.model_mean, report::cell(p.e_null), report::cell(p.e_model)});
        if (p.e_null && p.e_model) {
          per_null[w].push_back(*p.e_null);
          per_model[w].push_back(*p.e_model);
        }
      }
      if (auto a = results[i]->mean_e_null(), b = results[i]->mean_e_model(); a && b) {
        dev_null.push_back(*a);
        dev_model.push_back(*b);
      }
    }
    write("validation", t);
    Table s{{"pattern", "n_developers", "mean_e_star", "mean_e_model", "t", "p", "test"}, {}};
    auto add_row = [&](const std::string& name, const std::vector<double>& a, const std::vector<double>& b) {
      std::optional<double> ma, mb, tt, pp;
      if (!a.empty()) {
        ma = stats::mean(a);
        mb = stats::mean(b);
      }
      if (a.size() >= 2) {
        const auto r = stats::ttest(b, a, stats::TTestVariant::Student, true);
        tt = r.statistic;
        pp = r.p;
      }
      s.add({name, report::cell(a.size()), report::cell(ma), report::cell(mb), report::cell(tt), report::cell(pp),
             std::string("paired two-sided t-test, e_model - e_star")});
    };
    for (std::size_t w = 0; w < 8; ++w) add_row(pattern_name(w, 3), per_null[w], per_model[w]);
    add_row("ALL", dev_null, dev_model);
    write("validation_summary", s);
  }

  void cluster() {
    const auto seed = seed_for("cluster");
    const auto pts = fitted_points();
    if (pts.empty()) throw std::runtime_error("cluster: no fitted developers");
    const auto assignment =
        kmeans(pts, {cfg_.k, cfg_.kmeans_restarts, 300, derive_seed(seed, {fnv1a("cluster")})});
    Table t{{"actor", "community", "alpha", "beta", "cluster"}, {}};
    for (std::size_t i = 0; i < pts.size(); ++i)
      t.add({pts[i].actor, pts[i].community, pts[i].params.alpha, pts[i].params.beta,
             static_cast<std::int64_t>(assignment.labels[i])});
    write("clusters", t);
    Table c{{"cluster", "alpha", "beta", "n"}, {}};
    for (int k = 0; k < assignment.k; ++k)
      c.add({static_cast<std::int64_t>(k), assignment.centroids[static_cast<std::size_t>(k)].alpha,
             assignment.centroids[static_cast<std::size_t>(k)].beta,
             static_cast<std::int64_t>(std::count(assignment.labels.begin(), assignment.labels.end(), k))});
    write("cluster_centroids", c);
    stage_info_["inertia"] = assignment.inertia;

    std::map<std::string, std::vector<ParamPoint>> by_community;
    for (const auto& p : pts) by_community[p.community].push_back(p);
    Table centers{{"community", "center_alpha", "center_beta", "diversity", "n_devs"}, {}};
    for (const auto& [name, members] : by_community) {
      const auto cd = center_and_diversity(members);
      centers.add({name, cd.center.alpha, cd.center.beta, cd.diversity, report::cell(members.size())});
    }
    write("community_centers", centers);
  }

  void converge() {
    fitted();
    const auto& ds = dataset();
    auto grid = cfg_.rho_grid.empty() ? default_prefix_grid(ds) : cfg_.rho_grid;
    std::erase_if(grid, [&](std::size_t r) { return r < cfg_.min_rho; });
    if (grid.empty()) throw ConfigError("converge: prefix grid is empty after applying min-rho");
    const auto series = prefix_convergence(ds, grid, cfg_.min_rho);
    Table t{{"rho", "scope", "mean_distance", "n_pairs"}, {}};
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (const auto& [name, pts] : series.inner)
        t.add({report::cell(grid[g]), name, report::cell(pts[g].mean_distance), report::cell(pts[g].n_pairs)});
      t.add({report::cell(grid[g]), std::string("INTER"), report::cell(series.inter[g].mean_distance),
             report::cell(series.inter[g].n_pairs)});
    }
    write("convergence", t);
    Table ex{{"rho", "community", "actor", "reason"}, {}};
    for (const auto& e : series.exclusions) ex.add({report::cell(e.prefix_length), e.community, e.actor, e.reason});
    write("convergence_exclusions", ex);

    const auto variant = cfg_.welch ? stats::TTestVariant::Welch : stats::TTestVariant::Student;
    Table tests{{"test", "statistic", "p", "df", "method", "n_a", "n_b"}, {}};
    for (const auto& nt : convergence_tests(ds, cfg_.first_prefix, variant))
      tests.add({nt.name, report::cell(nt.result.statistic), report::cell(nt.result.p), nt.result.df,
                 nt.result.method, report::cell(nt.n_a), report::cell(nt.n_b)});
    write("convergence_tests", tests);

    Table eff{{"scope", "epsilon", "sigma", "n"}, {}};
    for (auto rho : grid) {
      const auto pts = prefix_points(ds, rho);
      if (pts.empty()) continue;
      const auto f = efficiency_fit(pts);
      eff.add({std::to_string(rho), f.epsilon, f.sigma, report::cell(f.n)});
    }
    const auto full = fitted_points();
    if (!full.empty()) {
      const auto f = efficiency_fit(full);
      eff.add({std::string("full"), f.epsilon, f.sigma, report::cell(f.n)});
    }
    write("efficiency", eff);

    Table evo{{"community", "actor", "month", "n_activities", "alpha", "beta"}, {}};
    for (const auto& r : flatten(ds))
      for (const auto& m : monthly_evolution(r.dev->sequence, cfg_.min_per_month)) {
        std::optional<double> a, b;
        if (m.params) {
          a = m.params->alpha;
          b = m.params->beta;
        }
        evo.add({r.community->name, r.dev->actor, month_label(m.year, m.month), report::cell(m.n_activities),
                 report::cell(a), report::cell(b)});
      }
    write("evolution", evo);
  }

  void networks() {
    const auto& params = fitted();
    const auto& ds = dataset();
    Roster roster;
    for (const auto& r : flatten(ds))
      if (params.count({r.community->name, r.dev->actor})) roster[r.community->name].insert(r.dev->actor);
    std::uint64_t dangling = 0;
    const auto weights = pair_weights(events(), roster, &dangling);
    stage_info_["dangling_reply_references"] = dangling;
    Table w{{"community", "actor_a", "actor_b", "social_weight", "coop_weight"}, {}};
    std::map<PairKey, double> distances;
    for (const auto& pw : weights) {
      w.add({pw.pair.community, pw.pair.actor_a, pw.pair.actor_b, report::cell(pw.social_weight),
             report::cell(pw.coop_weight)});
      distances[pw.pair] = param_distance(params.at({pw.pair.community, pw.pair.actor_a}),
                                          params.at({pw.pair.community, pw.pair.actor_b}));
    }
    write("weights", w);

    CorrelationOptions opts;
    opts.include_zero_pairs = cfg_.include_zero_pairs;
    opts.permutation_p = cfg_.spearman_permutation;
    if (cfg_.spearman_permutation) opts.seed = derive_seed(seed_for("networks"), {fnv1a("networks")});
    Table c{{"community", "weight_kind", "method", "R", "p", "n_pairs"}, {}};
    Table perm{{"community", "weight_kind", "R", "permutation_p", "n_pairs"}, {}};
    std::vector<std::string> scopes;
    for (const auto& [name, _] : roster) scopes.push_back(name);
    scopes.push_back("ALL");
    for (const auto& scope : scopes) {
      std::vector<PairWeight> subset;
      for (const auto& pw : weights)
        if (scope == "ALL" || pw.pair.community == scope) subset.push_back(pw);
      for (auto kind : {WeightKind::Social, WeightKind::Coop})
        for (auto method : {CorrelationMethod::Pearson, CorrelationMethod::Spearman}) {
          try {
            const auto r = correlate_distance_weight(distances, subset, kind, method, opts, scope);
            c.add({scope, to_string(kind), to_string(method), report::cell(r.r), report::cell(r.p),
                   report::cell(r.n_pairs)});
            if (r.permutation_p)
              perm.add({scope, to_string(kind), report::cell(r.r), *r.permutation_p, report::cell(r.n_pairs)});
          } catch (const std::invalid_argument&) {
            c.add({scope, to_string(kind), to_string(method), std::monostate{}, std::monostate{},
                   std::int64_t{0}});
          }
        }
    }
    write("correlations", c);
    if (cfg_.spearman_permutation) write("correlations_permutation", perm);
  }

  void survive() {
    const auto& ds = dataset();
    const auto clusters_path = out_ / "clusters.csv";
    if (!fs::exists(clusters_path)) throw PrerequisiteError("cluster", clusters_path.string());
    std::map<DevKey, int> cluster_of;
    int k = 0;
    for (const auto& row : report::read_csv(clusters_path).rows) {
      const int c = std::stoi(row.at("cluster"));
      cluster_of[{row.at("community"), row.at("actor")}] = c;
      k = std::max(k, c + 1);
    }
    if (cfg_.t_years.empty()) throw ConfigError("survive needs at least one --t-years threshold");
    for (double t : cfg_.t_years)
      if (!(t > 0.0)) throw ConfigError("--t-years thresholds must be positive");
    const Timestamp now = cfg_.now.value_or(ds.max_timestamp());
    stage_info_["now"] = now;

    const auto contacts = first_contact_times(events(), roster_of(ds));
    std::vector<DeveloperMetrics> metrics;
    std::vector<int> labels;
    std::vector<Timestamp> last_seen;
    for (const auto& r : flatten(ds)) {
      auto it = cluster_of.find({r.community->name, r.dev->actor});
      if (it == cluster_of.end()) continue;
      auto ct = contacts.find({r.community->name, r.dev->actor});
      static const std::vector<Timestamp> none;
      metrics.push_back(developer_metrics(*r.dev, ct == contacts.end() ? none : ct->second));
      labels.push_back(it->second);
      last_seen.push_back(r.dev->last_ts);
    }

    const auto variant = cfg_.welch ? stats::TTestVariant::Welch : stats::TTestVariant::Student;
    Table m{{"actor", "community", "cluster", "x1", "x2", "x3", "x4", "x5", "censored"}, {}};
    Table tests{{"T_years", "property", "cluster_a", "cluster_b", "n_a", "n_b", "t", "p"}, {}};
    for (std::size_t ti = 0; ti < cfg_.t_years.size(); ++ti) {
      const double t_years = cfg_.t_years[ti];
      for (std::size_t i = 0; i < metrics.size(); ++i) metrics[i].censored = !has_left(last_seen[i], now, t_years);
      if (ti == 0)
        for (std::size_t i = 0; i < metrics.size(); ++i) {
          const auto& d = metrics[i];
          m.add({d.actor, d.community, static_cast<std::int64_t>(labels[i]), d.x1, d.x2, d.x3, d.x4, d.x5,
                 static_cast<std::int64_t>(*d.censored ? 1 : 0)});
        }
      for (const auto& row : cluster_comparisons(metrics, labels, k, variant))
        tests.add({t_years, row.property, static_cast<std::int64_t>(row.cluster_a),
                   static_cast<std::int64_t>(row.cluster_b), report::cell(row.n_a), report::cell(row.n_b),
                   report::cell(row.t), report::cell(row.p)});
    }
    write("metrics", m);
    write("cluster_tests", tests);

    Table h{{"covariate", "b", "se", "p", "eta", "n", "n_events", "T_years"}, {}};
    Table hc{{"community", "covariate", "b", "se", "p", "eta", "n", "n_events", "T_years"}, {}};
    auto& warnings = stage_info_["warnings"] = ordered_json::array();
    auto fit_rows = [&](const std::vector<SurvivalRecord>& records, double t_years, const std::string* community) {
      const auto n_events = static_cast<std::int64_t>(
          std::count_if(records.begin(), records.end(), [](const SurvivalRecord& r) { return r.event_observed; }));
      for (const char* cov : {"alpha", "beta"}) {
        std::vector<Cell> row;
        if (community) row.push_back(*community);
        row.push_back(std::string(cov));
        try {
          const auto fit = cox_fit(records, std::string(cov));
          row.insert(row.end(), {fit.b, fit.standard_error, fit.p, fit.eta});
        } catch (const std::exception& err) {
          row.insert(row.end(), {std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{}});
          warnings.push_back((community ? *community + ": " : std::string()) + cov + " @ T=" +
                             csv::format_double(t_years) + ": " + err.what());
        }
        row.insert(row.end(), {report::cell(records.size()), n_events, t_years});
        (community ? hc : h).add(std::move(row));
      }
    };
    for (double t_years : cfg_.t_years) {
      const auto records = survival_records(ds, now, t_years);
      fit_rows(records, t_years, nullptr);
      if (cfg_.per_community_cox)
        for (const auto& c : ds.communities) {
          std::vector<SurvivalRecord> sub;
          for (const auto& r : records)
            if (r.community == c.name) sub.push_back(r);
          fit_rows(sub, t_years, &c.name);
        }
    }
    write("hazards", h);
    if (cfg_.per_community_cox) write("hazards_by_community", hc);
  }

  void synth() {
    const auto seed = seed_for("synth");
    SynthSpec spec;
    if (!cfg_.synth_spec.empty()) {
      std::ifstream in(cfg_.synth_spec, std::ios::binary);
      if (!in) throw std::runtime_error("cannot read synth spec " + cfg_.synth_spec);
      std::ostringstream ss;
      ss << in.rdbuf();
      spec = SynthSpec::from_json(ss.str());
    } else {
      spec = SynthSpec::preset(cfg_.synth_communities, cfg_.synth_devs, cfg_.synth_length);
    }
    const auto data = generate_dataset(spec, derive_seed(seed, {fnv1a("synth")}));
    const auto events_path = out_ / "synth_events.jsonl";
    {
      std::ofstream out(events_path, std::ios::binary);
      write_events(out, data.events, EventFormat::Jsonl);
    }
    {
      std::ofstream out(out_ / "synth_manifest.json", std::ios::binary);
      out << data.manifest_json << '\n';
    }
    for (const char* f : {"synth_events.jsonl", "synth_manifest.json"})
      stage_info_["outputs"].push_back({{"file", f}, {"fnv1a64", file_digest(out_ / f)}});
    stage_info_["events"] = data.events.size();
    stage_info_["developers"] = data.truth.size();
    log_ << "[synth] " << data.events.size() << " events for " << data.truth.size() << " developers\n";
  }
};

}  // namespace

std::string to_string(Stage s) {
  switch (s) {
    case Stage::Ingest: return "ingest";
    case Stage::Patterns: return "patterns";
    case Stage::Fit: return "fit";
    case Stage::Validate: return "validate";
    case Stage::Cluster: return "cluster";
    case Stage::Converge: return "converge";
    case Stage::Networks: return "networks";
    case Stage::Survive: return "survive";
    case Stage::Synth: return "synth";
    case Stage::All: return "all";
  }
  return "?";
}

Stage parse_stage(const std::string& name) {
  for (auto s : {Stage::Ingest, Stage::Patterns, Stage::Fit, Stage::Validate, Stage::Cluster, Stage::Converge,
                 Stage::Networks, Stage::Survive, Stage::Synth, Stage::All})
    if (to_string(s) == name) return s;
  throw ConfigError("unknown subcommand '" + name + "'");
}

std::vector<std::string> stage_reports(Stage stage) {
  switch (stage) {
    case Stage::Ingest: return {"roster"};
    case Stage::Patterns: return {"enrichment", "enrichment_summary"};
    case Stage::Fit: return {"hmm", "hmm_exclusions"};
    case Stage::Validate: return {"validation", "validation_summary"};
    case Stage::Cluster: return {"clusters", "cluster_centroids", "community_centers"};
    case Stage::Converge:
      return {"convergence", "convergence_exclusions", "convergence_tests", "efficiency", "evolution"};
    case Stage::Networks: return {"weights", "correlations"};
    case Stage::Survive: return {"metrics", "cluster_tests", "hazards"};
    case Stage::Synth: return {};
    case Stage::All: {
      std::vector<std::string> all;
      for (auto s : {Stage::Ingest, Stage::Patterns, Stage::Fit, Stage::Validate, Stage::Cluster, Stage::Converge,
                     Stage::Networks, Stage::Survive}) {
        auto r = stage_reports(s);
        all.insert(all.end(), r.begin(), r.end());
      }
      return all;
    }
  }
  return {};
}

std::string RunConfig::to_config_text() const {
  std::ostringstream out;
  auto kv = [&](const char* k, const std::string& v) {
    if (!v.empty()) out << k << " = " << v << '\n';
  };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  kv("input", join(inputs, ","));
  kv("alias-file", alias_file);
  kv("min-activities", std::to_string(min_activities));
  kv("min-devs", std::to_string(min_devs));
  kv("xi-days", xi_days ? csv::format_double(*xi_days) : "inf");
  kv("null-replicates", std::to_string(null_replicates));
  kv("pattern-lengths", join_numbers(pattern_lengths));
  kv("k", std::to_string(k));
  kv("kmeans-restarts", std::to_string(kmeans_restarts));
  kv("rho-grid", join_numbers(rho_grid));
  kv("min-rho", std::to_string(min_rho));
  kv("first-prefix", std::to_string(first_prefix));
  kv("t-years", join_numbers(t_years));
  kv("now", now ? std::to_string(*now) : "");
  kv("seed", seed ? std::to_string(*seed) : "");
  kv("include-zero-pairs", flag(include_zero_pairs));
  kv("filter-pre-trim", flag(filter_pre_trim));
  kv("per-replicate-error", flag(per_replicate_error));
  kv("welch", flag(welch));
  kv("spearman-permutation", flag(spearman_permutation));
  kv("per-community-cox", flag(per_community_cox));
  kv("min-per-month", std::to_string(min_per_month));
  kv("synth-spec", synth_spec);
  kv("synth-communities", std::to_string(synth_communities));
  kv("synth-devs", std::to_string(synth_devs));
  kv("synth-length", std::to_string(synth_length));
  return out.str();
}

void run(Stage stage, const RunConfig& config, std::ostream& log) { Runner(config, log).run(stage); }

}  // namespace wtseq
