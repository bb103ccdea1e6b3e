#include "wtseq/community.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "wtseq/rng.hpp"

namespace wtseq {

double param_distance(const HmmParams& a, const HmmParams& b) {
  return std::hypot(a.alpha - b.alpha, a.beta - b.beta);
}

namespace {

double squared_distance(const HmmParams& a, const HmmParams& b) {
  const double da = a.alpha - b.alpha, db = a.beta - b.beta;
  return da * da + db * db;
}

int nearest(const HmmParams& p, const std::vector<HmmParams>& centroids) {
  int best = 0;
  double best_d = squared_distance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<HmmParams> plusplus_seeds(const std::vector<HmmParams>& pts, int k, Rng& rng) {
  std::vector<HmmParams> centroids;
  centroids.push_back(pts[rng.below(pts.size())]);
  std::vector<double> d2(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) d2[i] = squared_distance(pts[i], centroids[0]);
  while (static_cast<int>(centroids.size()) < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      pick = pts.size() - 1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        target -= d2[i];
        if (target < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      // guard against landing on an existing centroid through rounding
      if (d2[pick] == 0.0)
        pick = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    centroids.push_back(pts[pick]);
    for (std::size_t i = 0; i < pts.size(); ++i)
      d2[i] = std::min(d2[i], squared_distance(pts[i], centroids.back()));
  }
  return centroids;
}

struct LloydResult {
  std::vector<int> labels;
  std::vector<HmmParams> centroids;
  double inertia = 0.0;
};

LloydResult lloyd(const std::vector<HmmParams>& pts, std::vector<HmmParams> centroids, int max_iterations) {
  const auto k = centroids.size();
  std::vector<int> labels(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) labels[i] = nearest(pts[i], centroids);

  for (int iter = 0; iter < max_iterations; ++iter) {
    std::vector<double> sa(k, 0.0), sb(k, 0.0);
    std::vector<std::size_t> n(k, 0);
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const auto c = static_cast<std::size_t>(labels[i]);
      sa[c] += pts[i].alpha;
      sb[c] += pts[i].beta;
      ++n[c];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (n[c] > 0) centroids[c] = {sa[c] / static_cast<double>(n[c]), sb[c] / static_cast<double>(n[c])};
    // Empty cluster: move in the point farthest from its own centroid.
    for (std::size_t c = 0; c < k; ++c) {
      if (n[c] > 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto own = static_cast<std::size_t>(labels[i]);
        if (n[own] < 2) continue;
        const double d = squared_distance(pts[i], centroids[own]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --n[static_cast<std::size_t>(labels[far])];
      labels[far] = static_cast<int>(c);
      n[c] = 1;
      centroids[c] = pts[far];
    }
    bool changed = false;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const int c = nearest(pts[i], centroids);
      if (c != labels[i]) {
        labels[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
  }
  LloydResult res{std::move(labels), std::move(centroids), 0.0};
  for (std::size_t i = 0; i < pts.size(); ++i)
    res.inertia += squared_distance(pts[i], res.centroids[static_cast<std::size_t>(res.labels[i])]);
  return res;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_or_nan(const std::vector<double>& v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

ConvergencePoint summarize(const std::vector<double>& d) {
  if (d.empty()) return {std::nullopt, 0};
  return {mean_or_nan(d), d.size()};
}

}  // namespace

ClusterAssignment kmeans(const std::vector<ParamPoint>& points, const KMeansOptions& options) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (options.k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  std::vector<HmmParams> pts;
  pts.reserve(points.size());
  std::set<std::pair<double, double>> distinct;
  for (const auto& p : points) {
    pts.push_back(p.params);
    distinct.emplace(p.params.alpha, p.params.beta);
  }
  if (static_cast<std::size_t>(options.k) > distinct.size())
    throw std::invalid_argument("kmeans: k = " + std::to_string(options.k) + " exceeds the " +
                                std::to_string(distinct.size()) + " distinct points");

  LloydResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Rng rng(derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    auto res = lloyd(pts, plusplus_seeds(pts, options.k, rng), options.max_iterations);
    if (res.inertia < best.inertia) best = std::move(res);
  }

  std::vector<std::size_t> order(best.centroids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = best.centroids[a];
    const auto& cb = best.centroids[b];
    return std::tie(ca.alpha, ca.beta) < std::tie(cb.alpha, cb.beta);
  });
  std::vector<int> rename(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) rename[order[i]] = static_cast<int>(i);

  ClusterAssignment out;
  out.k = options.k;
  out.inertia = best.inertia;
  for (auto i : order) out.centroids.push_back(best.centroids[i]);
  for (int l : best.labels) out.labels.push_back(rename[static_cast<std::size_t>(l)]);
  return out;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("adjusted_rand_index: length mismatch");
  std::map<std::pair<int, int>, double> table;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double n) { return n * (n - 1.0) / 2.0; };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [_, n] : table) index += choose2(n);
  for (const auto& [_, n] : rows) sum_rows += choose2(n);
  for (const auto& [_, n] : cols) sum_cols += choose2(n);
  const double total = choose2(static_cast<double>(a.size()));
  const double expected = total > 0 ? sum_rows * sum_cols / total : 0.0;
  const double max_index = 0.5 * (sum_rows + sum_cols);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

CenterDiversity center_and_diversity(const std::vector<ParamPoint>& devs) {
  if (devs.empty()) throw std::invalid_argument("center_and_diversity: no developers");
  std::vector<double> as, bs;
  for (const auto& d : devs) {
    as.push_back(d.params.alpha);
    bs.push_back(d.params.beta);
  }
  CenterDiversity cd{{median(as), median(bs)}, 0.0};
  for (const auto& d : devs) cd.diversity += param_distance(d.params, cd.center);
  cd.diversity /= static_cast<double>(devs.size());
  return cd;
}

std::vector<double> PairDistances::all_inner() const {
  std::vector<double> out;
  for (const auto& [_, v] : inner) out.insert(out.end(), v.begin(), v.end());
  return out;
}

PairDistances pair_distances(const std::vector<ParamPoint>& points) {
  PairDistances pd;
  for (const auto& p : points) pd.inner[p.community];
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double d = param_distance(points[i].params, points[j].params);
      if (points[i].community == points[j].community)
        pd.inner[points[i].community].push_back(d);
      else
        pd.inter.push_back(d);
    }
  return pd;
}

std::vector<ParamPoint> prefix_points(const CommunityDataset& dataset, std::size_t prefix,
                                      std::vector<ConvergenceSeries::Exclusion>* exclusions) {
  std::vector<ParamPoint> out;
  for (const auto& c : dataset.communities)
    for (const auto& d : c.developers) {
      WtSequence head;
      const auto n = std::min(prefix, d.sequence.size());
      head.labels.assign(d.sequence.labels.begin(), d.sequence.labels.begin() + static_cast<std::ptrdiff_t>(n));
      head.timestamps.assign(d.sequence.timestamps.begin(),
                             d.sequence.timestamps.begin() + static_cast<std::ptrdiff_t>(n));
      try {
        out.push_back({d.actor, c.name, estimate(head)});
      } catch (const EstimationError& err) {
        if (exclusions) exclusions->push_back({prefix, c.name, d.actor, err.what()});
      }
    }
  return out;
}

std::vector<std::size_t> default_prefix_grid(const CommunityDataset& dataset, std::size_t step) {
  std::size_t longest = 0;
  for (const auto& c : dataset.communities)
    for (const auto& d : c.developers) longest = std::max(longest, d.sequence.size());
  std::vector<std::size_t> grid;
  for (std::size_t r = step; r <= longest; r += step) grid.push_back(r);
  if (grid.empty() || grid.back() != longest) grid.push_back(longest);
  return grid;
}

ConvergenceSeries prefix_convergence(const CommunityDataset& dataset, const std::vector<std::size_t>& grid,
                                     std::size_t min_prefix) {
  ConvergenceSeries series;
  for (auto rho : grid)
    if (rho < min_prefix)
      throw std::invalid_argument("prefix length " + std::to_string(rho) + " is below the minimum " +
                                  std::to_string(min_prefix));
  series.prefix_lengths = grid;
  for (const auto& c : dataset.communities) series.inner[c.name];
  for (auto rho : grid) {
    const auto pts = prefix_points(dataset, rho, &series.exclusions);
    const auto pd = pair_distances(pts);
    for (auto& [name, values] : series.inner) {
      auto it = pd.inner.find(name);
      values.push_back(it == pd.inner.end() ? ConvergencePoint{} : summarize(it->second));
    }
    series.inter.push_back(summarize(pd.inter));
  }
  return series;
}

std::vector<NamedTest> convergence_tests(const CommunityDataset& dataset, std::size_t first_prefix,
                                         stats::TTestVariant variant) {
  const auto full = prefix_points(dataset, std::numeric_limits<std::size_t>::max());
  const auto first = prefix_points(dataset, first_prefix);

  std::vector<NamedTest> out;
  auto add = [&](std::string name, const std::vector<double>& a, const std::vector<double>& b) {
    NamedTest t{std::move(name), {}, a.size(), b.size()};
    if (a.size() >= 2 && b.size() >= 2) {
      t.result = stats::ttest(a, b, variant);
    } else {
      t.result = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), 0.0,
                  "insufficient data"};
    }
    out.push_back(std::move(t));
  };

  const auto pd_full = pair_distances(full);
  const auto pd_first = pair_distances(first);
  add("inner_vs_inter_full", pd_full.all_inner(), pd_full.inter);
  add("inner_vs_inter_first", pd_first.all_inner(), pd_first.inter);
  add("inner_first_vs_full", pd_first.all_inner(), pd_full.all_inner());
  add("inter_first_vs_full", pd_first.inter, pd_full.inter);

  std::vector<double> a_first, a_full, b_first, b_full;
  for (const auto& p : first) {
    a_first.push_back(p.params.alpha);
    b_first.push_back(p.params.beta);
  }
  for (const auto& p : full) {
    a_full.push_back(p.params.alpha);
    b_full.push_back(p.params.beta);
  }
  add("alpha_first_vs_full", a_first, a_full);
  add("beta_first_vs_full", b_first, b_full);

  // Per-pair shrinkage needs the same developers on both sides.
  std::set<std::pair<std::string, std::string>> in_first;
  for (const auto& p : first) in_first.emplace(p.community, p.actor);
  std::vector<ParamPoint> full_common, first_common;
  for (const auto& p : full)
    if (in_first.count({p.community, p.actor})) full_common.push_back(p);
  std::set<std::pair<std::string, std::string>> in_full;
  for (const auto& p : full_common) in_full.emplace(p.community, p.actor);
  for (const auto& p : first)
    if (in_full.count({p.community, p.actor})) first_common.push_back(p);
  const auto pf = pair_distances(first_common);
  const auto pl = pair_distances(full_common);
  std::vector<double> inner_shrink, inter_shrink;
  const auto fi = pf.all_inner(), li = pl.all_inner();
  for (std::size_t i = 0; i < fi.size(); ++i) inner_shrink.push_back(fi[i] - li[i]);
  for (std::size_t i = 0; i < pf.inter.size(); ++i) inter_shrink.push_back(pf.inter[i] - pl.inter[i]);
  add("shrinkage_inner_vs_inter", inner_shrink, inter_shrink);
  return out;
}

EfficiencyFit efficiency_fit(const std::vector<ParamPoint>& points) {
  if (points.empty()) throw std::invalid_argument("efficiency_fit: no points");
  EfficiencyFit fit;
  fit.n = points.size();
  const double n = static_cast<double>(points.size());
  for (const auto& p : points) fit.epsilon += p.params.alpha + p.params.beta;
  fit.epsilon /= n;
  double ss = 0.0;
  for (const auto& p : points) {
    const double r = p.params.alpha + p.params.beta - fit.epsilon;
    ss += r * r;
  }
  fit.sigma = std::sqrt(ss / (2.0 * n));
  return fit;
}

std::vector<MonthlyPoint> monthly_evolution(const WtSequence& seq, std::size_t min_per_window) {
  using namespace std::chrono;
  std::vector<MonthlyPoint> out;
  if (seq.empty()) return out;
  auto month_index = [](Timestamp ts) {
    const year_month_day ymd{floor<days>(sys_seconds{seconds{ts}})};
    return static_cast<long>(static_cast<int>(ymd.year())) * 12 + static_cast<long>(static_cast<unsigned>(ymd.month())) - 1;
  };
  const long first = month_index(seq.timestamps.front());
  const long last = month_index(seq.timestamps.back());
  std::size_t i = 0;
  for (long m = first; m <= last; ++m) {
    MonthlyPoint point;
    point.year = static_cast<int>(m / 12);
    point.month = static_cast<unsigned>(m % 12) + 1;
    WtSequence window;
    while (i < seq.size() && month_index(seq.timestamps[i]) == m) {
      window.labels.push_back(seq.labels[i]);
      window.timestamps.push_back(seq.timestamps[i]);
      ++i;
    }
    point.n_activities = window.size();
    if (window.size() >= min_per_window && window.size() >= 2) {
      try {
        point.params = estimate(window);
      } catch (const EstimationError&) {
      }
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace wtseq
