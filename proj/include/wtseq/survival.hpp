#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wtseq/community.hpp"
#include "wtseq/ingest.hpp"

namespace wtseq {

/// Individual performance measures over the span of the trimmed sequence.
struct DeveloperMetrics {
  std::string actor;
  std::string community;
  double x1 = 0.0;  // work activities per day
  double x2 = 0.0;  // KLoC added per day
  double x3 = 0.0;  // talk activities per day
  double x4 = 0.0;  // new reply partners per week
  double x5 = 0.0;  // first to last raw activity, years
  std::optional<bool> censored;  // set once a leaving threshold is applied

  double property(int index) const;  // 1..5
};

/// `link_times` are the first-contact times of each reply partner.
DeveloperMetrics developer_metrics(const std::vector<Event>& events, const WtSequence& seq,
                                   const std::vector<Timestamp>& link_times, Timestamp first_raw,
                                   Timestamp last_raw);

DeveloperMetrics developer_metrics(const Developer& dev, const std::vector<Timestamp>& link_times);

struct SurvivalRecord {
  std::string actor;
  std::string community;
  double duration = 0.0;  // years
  bool event_observed = false;
  std::map<std::string, double> covariates;
};

/// A developer has left when `now - last activity >= threshold`.
bool has_left(Timestamp last_activity, Timestamp now, double threshold_years);

/// One record per developer whose full-sequence parameters can be
/// estimated; covariates "alpha" and "beta".
std::vector<SurvivalRecord> survival_records(const CommunityDataset& dataset, Timestamp now,
                                             double threshold_years);

class CoxError : public std::runtime_error {
 public:
  CoxError(const std::string& what, std::vector<std::vector<double>> trace = {})
      : std::runtime_error(what), trace_(std::move(trace)) {}
  const std::vector<std::vector<double>>& trace() const { return trace_; }

 private:
  std::vector<std::vector<double>> trace_;
};

struct HazardFit {
  std::string covariate;
  double b = 0.0;
  double standard_error = 0.0;
  double p = 1.0;    // two-sided Wald
  double eta = 1.0;  // exp(b)
};

struct CoxModel {
  std::vector<HazardFit> coefficients;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::size_t n = 0;
  std::size_t n_events = 0;
};

struct CoxOptions {
  int max_iterations = 50;
  double tolerance = 1e-10;
};

/// Breslow partial likelihood maximized by Newton iteration from b = 0.
CoxModel cox_fit(const std::vector<SurvivalRecord>& records, const std::vector<std::string>& covariates,
                 const CoxOptions& options = {});

HazardFit cox_fit(const std::vector<SurvivalRecord>& records, const std::string& covariate,
                  const CoxOptions& options = {});

/// Breslow log partial likelihood at coefficient vector `b`.
double cox_log_partial_likelihood(const std::vector<SurvivalRecord>& records,
                                  const std::vector<std::string>& covariates, const std::vector<double>& b);

struct ClusterComparison {
  std::string property;  // "X1".."X5"
  int cluster_a = 0;
  int cluster_b = 0;
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  std::optional<double> t;
  std::optional<double> p;
};

/// Two-sample t-test of each property between every pair of clusters.
/// `labels` is parallel to `metrics`; X5 only uses uncensored developers.
std::vector<ClusterComparison> cluster_comparisons(const std::vector<DeveloperMetrics>& metrics,
                                                   const std::vector<int>& labels, int k,
                                                   stats::TTestVariant variant = stats::TTestVariant::Student);

}  // namespace wtseq
