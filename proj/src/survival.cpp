#include "wtseq/survival.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "wtseq/hmm.hpp"
#include "wtseq/stats.hpp"

namespace wtseq {

double DeveloperMetrics::property(int index) const {
  switch (index) {
    case 1: return x1;
    case 2: return x2;
    case 3: return x3;
    case 4: return x4;
    case 5: return x5;
    default: throw std::out_of_range("property index must be 1..5");
  }
}

DeveloperMetrics developer_metrics(const std::vector<Event>& events, const WtSequence& seq,
                                   const std::vector<Timestamp>& link_times, Timestamp first_raw,
                                   Timestamp last_raw) {
  if (seq.empty()) throw std::invalid_argument("developer_metrics: empty sequence");
  DeveloperMetrics m;
  m.actor = seq.actor;
  m.community = seq.community;
  const Timestamp from = seq.timestamps.front(), to = seq.timestamps.back();
  const double span_days = std::max(1.0, static_cast<double>(to - from) / kSecondsPerDay);
  double work = 0, talk = 0, lines = 0;
  for (const auto& e : events) {
    if (e.ts < from || e.ts > to) continue;
    if (e.kind == Activity::Work) {
      work += 1;
      lines += static_cast<double>(e.lines_added);
    } else {
      talk += 1;
    }
  }
  double links = 0;
  for (auto t : link_times)
    if (t >= from && t <= to) links += 1;
  m.x1 = work / span_days;
  m.x2 = lines / 1000.0 / span_days;
  m.x3 = talk / span_days;
  m.x4 = links / (span_days / 7.0);
  m.x5 = static_cast<double>(last_raw - first_raw) / kSecondsPerYear;
  return m;
}

DeveloperMetrics developer_metrics(const Developer& dev, const std::vector<Timestamp>& link_times) {
  return developer_metrics(dev.events, dev.sequence, link_times, dev.first_ts, dev.last_ts);
}

bool has_left(Timestamp last_activity, Timestamp now, double threshold_years) {
  return static_cast<double>(now - last_activity) >= threshold_years * kSecondsPerYear;
}

std::vector<SurvivalRecord> survival_records(const CommunityDataset& dataset, Timestamp now,
                                             double threshold_years) {
  if (!(threshold_years > 0.0)) throw std::invalid_argument("leaving threshold must be positive");
  std::vector<SurvivalRecord> out;
  for (const auto& c : dataset.communities)
    for (const auto& d : c.developers) {
      HmmParams p;
      try {
        p = estimate(d.sequence);
      } catch (const EstimationError&) {
        continue;
      }
      SurvivalRecord r;
      r.actor = d.actor;
      r.community = c.name;
      r.duration = static_cast<double>(d.last_ts - d.first_ts) / kSecondsPerYear;
      r.event_observed = has_left(d.last_ts, now, threshold_years);
      r.covariates = {{"alpha", p.alpha}, {"beta", p.beta}};
      out.push_back(std::move(r));
    }
  return out;
}

namespace {

struct CoxData {
  std::vector<double> time;
  std::vector<bool> event;
  Eigen::MatrixXd x;              // centered covariates, one row per record
  std::vector<std::size_t> order;  // indices by descending time
};

CoxData prepare(const std::vector<SurvivalRecord>& records, const std::vector<std::string>& covariates) {
  const auto n = records.size();
  const auto p = covariates.size();
  CoxData d;
  d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < n; ++i) {
    d.time.push_back(records[i].duration);
    d.event.push_back(records[i].event_observed);
    for (std::size_t j = 0; j < p; ++j) {
      auto it = records[i].covariates.find(covariates[j]);
      if (it == records[i].covariates.end())
        throw CoxError("record '" + records[i].actor + "' lacks covariate '" + covariates[j] + "'");
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = it->second;
    }
  }
  // The partial likelihood is invariant to covariate location.
  if (n > 0) d.x.rowwise() -= d.x.colwise().mean();
  d.order.resize(n);
  std::iota(d.order.begin(), d.order.end(), 0);
  std::stable_sort(d.order.begin(), d.order.end(),
                   [&](std::size_t a, std::size_t b) { return d.time[a] > d.time[b]; });
  return d;
}

struct CoxEval {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
};

CoxEval evaluate(const CoxData& d, const Eigen::VectorXd& b) {
  const auto p = b.size();
  CoxEval ev{0.0, Eigen::VectorXd::Zero(p), Eigen::MatrixXd::Zero(p, p)};
  const Eigen::VectorXd eta = d.x * b;
  double s0 = 0.0;
  Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
  std::size_t i = 0;
  while (i < d.order.size()) {
    // Everyone tied at this time joins the risk set before its events are scored.
    std::size_t j = i;
    const double t = d.time[d.order[i]];
    while (j < d.order.size() && d.time[d.order[j]] == t) {
      const auto r = static_cast<Eigen::Index>(d.order[j]);
      const double w = std::exp(eta(r));
      const Eigen::VectorXd xr = d.x.row(r).transpose();
      s0 += w;
      s1 += w * xr;
      s2 += w * xr * xr.transpose();
      ++j;
    }
    const Eigen::VectorXd mean = s1 / s0;
    const Eigen::MatrixXd cov = s2 / s0 - mean * mean.transpose();
    for (std::size_t k = i; k < j; ++k) {
      const auto r = static_cast<Eigen::Index>(d.order[k]);
      if (!d.event[d.order[k]]) continue;
      ev.loglik += eta(r) - std::log(s0);
      ev.score += d.x.row(r).transpose() - mean;
      ev.information += cov;
    }
    i = j;
  }
  return ev;
}

}  // namespace

double cox_log_partial_likelihood(const std::vector<SurvivalRecord>& records,
                                  const std::vector<std::string>& covariates, const std::vector<double>& b) {
  if (b.size() != covariates.size()) throw std::invalid_argument("coefficient count mismatch");
  const auto d = prepare(records, covariates);
  const Eigen::VectorXd bv = Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  return evaluate(d, bv).loglik;
}

CoxModel cox_fit(const std::vector<SurvivalRecord>& records, const std::vector<std::string>& covariates,
                 const CoxOptions& options) {
  if (covariates.empty()) throw std::invalid_argument("cox_fit: no covariates");
  const auto d = prepare(records, covariates);
  const auto n_events = static_cast<std::size_t>(std::count(d.event.begin(), d.event.end(), true));
  if (n_events == 0) throw CoxError("cox_fit: no observed events");
  if (n_events < 2) throw CoxError("cox_fit: need at least 2 observed events");

  const auto p = static_cast<Eigen::Index>(covariates.size());
  Eigen::VectorXd b = Eigen::VectorXd::Zero(p);
  auto ev = evaluate(d, b);
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(ev.information(j, j) > 1e-12))
      throw CoxError("cox_fit: flat partial likelihood for '" + covariates[static_cast<std::size_t>(j)] +
                     "' (no covariate variation within risk sets at event times)");

  const Eigen::VectorXd initial_information = ev.information.diagonal();
  std::vector<std::vector<double>> trace;
  auto record = [&](const Eigen::VectorXd& v) { trace.emplace_back(v.data(), v.data() + v.size()); };
  record(b);
  bool converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    Eigen::LDLT<Eigen::MatrixXd> solver(ev.information);
    if (solver.info() != Eigen::Success || !solver.isPositive())
      throw CoxError("cox_fit: information matrix is not positive definite", trace);
    Eigen::VectorXd step = solver.solve(ev.score);
    const double full_step = step.cwiseAbs().maxCoeff();
    Eigen::VectorXd next = b + step;
    auto next_ev = evaluate(d, next);
    // Step halving keeps the iteration monotone in the log likelihood, up to
    // rounding noise in the likelihood sum.
    const double slack = 1e-10 * (1.0 + std::abs(ev.loglik));
    for (int h = 0; h < 30 && !(next_ev.loglik >= ev.loglik - slack); ++h) {
      step *= 0.5;
      next = b + step;
      next_ev = evaluate(d, next);
    }
    b = next;
    ev = std::move(next_ev);
    record(b);
    if (!std::isfinite(ev.loglik) || !b.allFinite()) break;
    if (full_step < options.tolerance) {
      converged = true;
      ++iter;
      break;
    }
  }
  if (!converged)
    throw CoxError("cox_fit: Newton iteration did not converge in " + std::to_string(options.max_iterations) +
                       " iterations",
                   trace);

  // Monotone likelihood: the estimate runs off while the information vanishes.
  for (Eigen::Index j = 0; j < p; ++j)
    if (!(ev.information(j, j) > 1e-8 * initial_information(j)))
      throw CoxError("cox_fit: coefficient for '" + covariates[static_cast<std::size_t>(j)] +
                         "' diverges (separation in the data)",
                     trace);
  Eigen::LDLT<Eigen::MatrixXd> solver(ev.information);
  const Eigen::MatrixXd inverse = solver.solve(Eigen::MatrixXd::Identity(p, p));
  CoxModel model;
  model.log_likelihood = ev.loglik;
  model.iterations = iter;
  model.n = records.size();
  model.n_events = n_events;
  for (Eigen::Index j = 0; j < p; ++j) {
    HazardFit h;
    h.covariate = covariates[static_cast<std::size_t>(j)];
    h.b = b(j);
    h.standard_error = std::sqrt(inverse(j, j));
    h.p = stats::normal_two_sided_p(h.b / h.standard_error);
    h.eta = std::exp(h.b);
    model.coefficients.push_back(h);
  }
  return model;
}

HazardFit cox_fit(const std::vector<SurvivalRecord>& records, const std::string& covariate,
                  const CoxOptions& options) {
  return cox_fit(records, std::vector<std::string>{covariate}, options).coefficients.front();
}

std::vector<ClusterComparison> cluster_comparisons(const std::vector<DeveloperMetrics>& metrics,
                                                   const std::vector<int>& labels, int k,
                                                   stats::TTestVariant variant) {
  if (metrics.size() != labels.size()) throw std::invalid_argument("cluster_comparisons: size mismatch");
  std::vector<ClusterComparison> out;
  for (int prop = 1; prop <= 5; ++prop) {
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      if (prop == 5 && metrics[i].censored.value_or(false)) continue;
      if (labels[i] < 0 || labels[i] >= k) throw std::out_of_range("cluster label out of range");
      groups[static_cast<std::size_t>(labels[i])].push_back(metrics[i].property(prop));
    }
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) {
        const auto& ga = groups[static_cast<std::size_t>(a)];
        const auto& gb = groups[static_cast<std::size_t>(b)];
        ClusterComparison row{"X" + std::to_string(prop), a, b, ga.size(), gb.size(), std::nullopt, std::nullopt};
        if (ga.size() >= 2 && gb.size() >= 2) {
          const auto t = stats::ttest(ga, gb, variant);
          row.t = t.statistic;
          row.p = t.p;
        }
        out.push_back(std::move(row));
      }
  }
  return out;
}

}  // namespace wtseq
