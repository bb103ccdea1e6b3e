#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wtseq/hmm.hpp"
#include "wtseq/ingest.hpp"
#include "wtseq/stats.hpp"

namespace wtseq {

/// A developer located in the alpha-beta plane.
struct ParamPoint {
  std::string actor;
  std::string community;
  HmmParams params;
};

/// Euclidean distance in the alpha-beta plane.
double param_distance(const HmmParams& a, const HmmParams& b);

struct ClusterAssignment {
  int k = 0;
  std::vector<int> labels;  // parallel to the input points
  std::vector<HmmParams> centroids;
  double inertia = 0.0;
};

struct KMeansOptions {
  int k = 3;
  int restarts = 32;
  int max_iterations = 300;
  std::uint64_t seed = 0;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` by inertia.
/// Clusters are renumbered so centroids are ordered by ascending alpha
/// (then beta); with the default k = 3 on developer data this puts the
/// talk-leaning cluster first and the work-leaning cluster last.
ClusterAssignment kmeans(const std::vector<ParamPoint>& points, const KMeansOptions& options);

/// Adjusted Rand index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

struct CenterDiversity {
  HmmParams center;  // per-coordinate median
  double diversity = 0.0;  // mean distance to center
};

CenterDiversity center_and_diversity(const std::vector<ParamPoint>& devs);

/// Pairwise parameter distances split by community membership.
struct PairDistances {
  std::map<std::string, std::vector<double>> inner;  // per community
  std::vector<double> inter;
  std::vector<double> all_inner() const;
};

PairDistances pair_distances(const std::vector<ParamPoint>& points);

struct ConvergencePoint {
  std::optional<double> mean_distance;  // missing when there are no pairs
  std::size_t n_pairs = 0;
};

struct ConvergenceSeries {
  std::vector<std::size_t> prefix_lengths;
  std::map<std::string, std::vector<ConvergencePoint>> inner;
  std::vector<ConvergencePoint> inter;
  /// (prefix length, community, actor) for developers whose prefix could not be estimated.
  struct Exclusion {
    std::size_t prefix_length;
    std::string community;
    std::string actor;
    std::string reason;
  };
  std::vector<Exclusion> exclusions;
};

/// Developer parameters estimated from the first `prefix` labels of each
/// trimmed sequence (the whole sequence when it is shorter).
std::vector<ParamPoint> prefix_points(const CommunityDataset& dataset, std::size_t prefix,
                                      std::vector<ConvergenceSeries::Exclusion>* exclusions = nullptr);

inline constexpr std::size_t kDefaultMinPrefix = 100;

ConvergenceSeries prefix_convergence(const CommunityDataset& dataset, const std::vector<std::size_t>& grid,
                                     std::size_t min_prefix = kDefaultMinPrefix);

/// 100, 200, ... up to the longest sequence in the dataset.
std::vector<std::size_t> default_prefix_grid(const CommunityDataset& dataset, std::size_t step = 100);

struct NamedTest {
  std::string name;
  stats::TestResult result;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
};

/// Inner vs inter at full length, first-prefix vs full for inner and inter
/// distances and for alpha and beta, and the convergence-rate comparison
/// (per-pair shrinkage, inner vs inter).
std::vector<NamedTest> convergence_tests(const CommunityDataset& dataset, std::size_t first_prefix = 100,
                                         stats::TTestVariant variant = stats::TTestVariant::Student);

struct EfficiencyFit {
  double epsilon = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
};

/// Least-squares fit of the line alpha + beta = epsilon:
/// epsilon = mean(alpha + beta), sigma = sqrt(sum((alpha + beta - epsilon)^2) / 2N).
EfficiencyFit efficiency_fit(const std::vector<ParamPoint>& points);

struct MonthlyPoint {
  int year = 0;
  unsigned month = 0;  // 1..12
  std::size_t n_activities = 0;
  std::optional<HmmParams> params;  // gap when too few activities or degenerate
};

/// Buckets a sequence by UTC calendar month from its first to its last
/// activity, estimating parameters in each month with enough activities.
std::vector<MonthlyPoint> monthly_evolution(const WtSequence& seq, std::size_t min_per_window = 20);

}  // namespace wtseq
