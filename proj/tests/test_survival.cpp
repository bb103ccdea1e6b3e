#include <cmath>
#include <numbers>

#include "doctest.h"
#include "support.hpp"
#include "wtseq/survival.hpp"

using namespace wtseq;

namespace {

SurvivalRecord rec(double t, bool event, double x) {
  SurvivalRecord r;
  r.duration = t;
  r.event_observed = event;
  r.covariates["x"] = x;
  return r;
}

// Breslow log partial likelihood by explicit risk sets.
double loglik_oracle(const std::vector<SurvivalRecord>& rs, double b) {
  double ll = 0;
  for (const auto& ri : rs) {
    if (!ri.event_observed) continue;
    double den = 0;
    for (const auto& rj : rs)
      if (rj.duration >= ri.duration) den += std::exp(b * rj.covariates.at("x"));
    ll += b * ri.covariates.at("x") - std::log(den);
  }
  return ll;
}

}  // namespace

TEST_CASE("rate metrics") {
  WtSequence seq = WtSequence::from_string("WWWWWWWWWT");
  for (std::size_t i = 0; i < seq.size(); ++i) seq.timestamps[i] = static_cast<Timestamp>(i) * 5 * kSecondsPerDay / 9;
  std::vector<Event> events;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    Event e{"a", "c", seq.labels[i], seq.timestamps[i], {}, 0, {}, {}};
    if (e.kind == Activity::Work) e.lines_added = i < 3 ? 2500 : 0;
    else e.reply_to = "m";
    events.push_back(e);
  }
  auto m = developer_metrics(events, seq, {}, seq.timestamps.front(), seq.timestamps.back());
  CHECK(m.x1 == doctest::Approx(9.0 / 5.0));
  CHECK(m.x2 == doctest::Approx(7.5 / 5.0));
  CHECK(m.x3 == doctest::Approx(1.0 / 5.0));
  CHECK(m.x4 == 0.0);
  CHECK(m.x5 == doctest::Approx(5.0 / 365.25));
  auto linked = developer_metrics(events, seq, {seq.timestamps[1], seq.timestamps.back() + 1}, 0, 1);
  CHECK(linked.x4 == doctest::Approx(1.0 / (5.0 / 7.0)));
}

TEST_CASE("ten work events over five days") {
  WtSequence seq;
  std::vector<Event> events;
  for (int i = 0; i < 10; ++i) {
    const Timestamp ts = static_cast<Timestamp>(i) * 5 * kSecondsPerDay / 9;
    seq.labels.push_back(Activity::Work);
    seq.timestamps.push_back(ts);
    events.push_back({"a", "c", Activity::Work, ts, {"f"}, i < 1 ? 3000 : 0, {}, {}});
  }
  auto m = developer_metrics(events, seq, {}, 0, seq.timestamps.back());
  CHECK(m.x1 == doctest::Approx(2.0));
  CHECK(m.x2 == doctest::Approx(3.0 / 5.0));
}

TEST_CASE("span shorter than a day uses one day") {
  auto seq = WtSequence::from_string("WT");
  seq.timestamps = {0, 60};
  std::vector<Event> events{{"a", "c", Activity::Work, 0, {}, 0, {}, {}}, {"a", "c", Activity::Talk, 60, {}, 0, {}, "m"}};
  CHECK(developer_metrics(events, seq, {}, 0, 60).x1 == doctest::Approx(1.0));
}

TEST_CASE("leaving rule") {
  const Timestamp now = 2000000000;
  CHECK(has_left(now - 2 * kSecondsPerYear, now, 1.0));
  CHECK_FALSE(has_left(now - 30 * kSecondsPerDay, now, 1.0));
  CHECK(has_left(now - kSecondsPerYear, now, 1.0));
}

TEST_CASE("log partial likelihood") {
  std::vector<SurvivalRecord> rs{rec(1, true, 0), rec(2, true, 1), rec(3, false, 1), rec(4, true, 0),
                                 rec(2, true, 0), rec(5, false, 0)};
  for (double b : {-1.0, 0.0, 0.4, 2.0})
    CHECK(cox_log_partial_likelihood(rs, {"x"}, {b}) == doctest::Approx(loglik_oracle(rs, b)));
  // b = 0: -sum over events of log(risk set size)
  CHECK(cox_log_partial_likelihood(rs, {"x"}, {0.0}) ==
        doctest::Approx(-(std::log(6.0) + 2 * std::log(5.0) + std::log(2.0))));
}

TEST_CASE("cox fit maximizes the likelihood") {
  Rng rng(8);
  std::vector<SurvivalRecord> rs;
  for (int i = 0; i < 200; ++i) {
    const double x = rng.normal();
    rs.push_back(rec(rng.exponential(std::exp(0.5 * x)), rng.bernoulli(0.8), x));
  }
  auto fit = cox_fit(rs, std::string("x"));
  CHECK(fit.eta == std::exp(fit.b));
  const double h = 1e-4;
  CHECK(loglik_oracle(rs, fit.b) >= loglik_oracle(rs, fit.b + h));
  CHECK(loglik_oracle(rs, fit.b) >= loglik_oracle(rs, fit.b - h));
  // Information by finite differences of the oracle.
  const double info = -(loglik_oracle(rs, fit.b + h) - 2 * loglik_oracle(rs, fit.b) + loglik_oracle(rs, fit.b - h)) / (h * h);
  CHECK(fit.standard_error == doctest::Approx(1.0 / std::sqrt(info)).epsilon(1e-3));
  CHECK(fit.p == doctest::Approx(stats::normal_two_sided_p(fit.b / fit.standard_error)));
}

TEST_CASE("two covariates") {
  Rng rng(12);
  std::vector<SurvivalRecord> rs;
  for (int i = 0; i < 400; ++i) {
    SurvivalRecord r;
    const double a = rng.normal(), b = rng.normal();
    r.duration = rng.exponential(std::exp(0.7 * a - 0.4 * b));
    r.event_observed = true;
    r.covariates = {{"a", a}, {"b", b}};
    rs.push_back(r);
  }
  auto m = cox_fit(rs, std::vector<std::string>{"a", "b"});
  REQUIRE(m.coefficients.size() == 2);
  CHECK(std::abs(m.coefficients[0].b - 0.7) < 0.3);
  CHECK(std::abs(m.coefficients[1].b + 0.4) < 0.3);
  CHECK(m.n_events == 400);
}

TEST_CASE("cox errors") {
  CHECK_THROWS_AS(cox_fit({rec(1, false, 0), rec(2, false, 1)}, std::string("x")), CoxError);
  CHECK_THROWS_AS(cox_fit({rec(1, true, 0), rec(2, false, 1)}, std::string("x")), CoxError);
  CHECK_THROWS_AS(cox_fit({rec(1, true, 1), rec(2, true, 1), rec(3, true, 1)}, std::string("x")), CoxError);
  // Perfect separation drives b to infinity.
  try {
    cox_fit({rec(1, true, 1), rec(2, true, 1), rec(3, true, 0), rec(4, true, 0)}, std::string("x"));
    FAIL("expected non-convergence");
  } catch (const CoxError& e) {
    CHECK_FALSE(e.trace().empty());
  }
}

TEST_CASE("cluster comparisons") {
  std::vector<DeveloperMetrics> ms;
  std::vector<int> labels;
  Rng rng(1);
  for (int i = 0; i < 6; ++i) {
    DeveloperMetrics m;
    m.x1 = i < 3 ? rng.normal(0, 1e-3) : rng.normal(10, 1e-3);
    m.x2 = 1.0;
    m.x5 = i;
    m.censored = i % 3 == 0;
    ms.push_back(m);
    labels.push_back(i < 3 ? 0 : 1);
  }
  DeveloperMetrics lonely;
  ms.push_back(lonely);
  labels.push_back(2);
  auto rows = cluster_comparisons(ms, labels, 3);
  REQUIRE(rows.size() == 15);
  CHECK(rows[0].property == "X1");
  CHECK(*rows[0].p < 0.01);
  CHECK_FALSE(rows[1].p);  // cluster 2 has one member
  CHECK(*rows[3].t == doctest::Approx(0.0));
  CHECK(*rows[3].p == doctest::Approx(1.0));
  CHECK(rows[12].property == "X5");
  CHECK(rows[12].n_a == 2);
  CHECK(rows[12].n_b == 2);
}
