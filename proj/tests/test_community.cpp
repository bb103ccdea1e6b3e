#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "wtseq/community.hpp"
#include "wtseq/synth.hpp"

using namespace wtseq;

namespace {

ParamPoint pt(double a, double b, std::string community = "c", std::string actor = "x") {
  return {std::move(actor), std::move(community), {a, b}};
}

}  // namespace

TEST_CASE("parameter distance") {
  CHECK(param_distance({0, 0}, {1, 1}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(param_distance({0.3, 0.3}, {0.3, 0.3}) == 0.0);
  CHECK(param_distance({0.2, 0.4}, {0.5, 0.8}) == doctest::Approx(0.5));
}

TEST_CASE("k-means with one cluster is the mean") {
  std::vector<ParamPoint> pts{pt(0.1, 0.2), pt(0.3, 0.6), pt(0.8, 0.1)};
  auto a = kmeans(pts, {1, 4, 100, 1});
  CHECK(a.centroids[0].alpha == doctest::Approx(0.4));
  CHECK(a.centroids[0].beta == doctest::Approx(0.3));
  CHECK(a.labels == std::vector<int>{0, 0, 0});
  auto same = kmeans({pt(0.5, 0.5), pt(0.5, 0.5)}, {1, 4, 100, 1});
  CHECK(same.inertia == 0.0);
}

TEST_CASE("k-means rejects k above the number of distinct points") {
  CHECK_THROWS(kmeans({pt(0.5, 0.5), pt(0.5, 0.5), pt(0.1, 0.1)}, {3, 4, 100, 1}));
}

TEST_CASE("k-means recovers blobs and orders clusters by alpha") {
  const HmmParams centers[3] = {{0.9, 0.4}, {0.3, 0.9}, {0.65, 0.75}};
  Rng rng(2);
  std::vector<ParamPoint> pts;
  std::vector<int> truth;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 40; ++i) {
      pts.push_back(pt(rng.normal(centers[c].alpha, 0.02), rng.normal(centers[c].beta, 0.02)));
      truth.push_back(c);
    }
  auto a = kmeans(pts, {3, 16, 300, 5});
  CHECK(adjusted_rand_index(a.labels, truth) == doctest::Approx(1.0));
  CHECK(a.centroids[0].alpha < a.centroids[1].alpha);
  CHECK(a.centroids[1].alpha < a.centroids[2].alpha);
  CHECK(a.labels[0] == 2);
  CHECK(a.labels[40] == 0);
  auto b = kmeans(pts, {3, 16, 300, 5});
  CHECK(a.labels == b.labels);
}

TEST_CASE("adjusted rand index") {
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  // Standard example: ARI of {0,0,1,1} vs {0,1,0,1} is -0.5.
  CHECK(adjusted_rand_index({0, 0, 1, 1}, {0, 1, 0, 1}) == doctest::Approx(-0.5));
}

TEST_CASE("center and diversity") {
  auto one = center_and_diversity({pt(0.6, 0.7)});
  CHECK(one.center.alpha == 0.6);
  CHECK(one.center.beta == 0.7);
  CHECK(one.diversity == 0.0);
  auto cd = center_and_diversity({pt(0.0, 0.0), pt(0.2, 1.0), pt(0.4, 0.0), pt(1.0, 0.4)});
  CHECK(cd.center.alpha == doctest::Approx(0.3));
  CHECK(cd.center.beta == doctest::Approx(0.2));
  const double expected = (std::hypot(0.3, 0.2) + std::hypot(0.1, 0.8) + std::hypot(0.1, 0.2) + std::hypot(0.7, 0.2)) / 4;
  CHECK(cd.diversity == doctest::Approx(expected));
}

TEST_CASE("pair distances split inner and inter") {
  auto pd = pair_distances({pt(0, 0, "a", "1"), pt(0, 1, "a", "2"), pt(1, 0, "b", "3")});
  REQUIRE(pd.inner.at("a").size() == 1);
  CHECK(pd.inner.at("a")[0] == doctest::Approx(1.0));
  CHECK(pd.inner.at("b").empty());
  CHECK(pd.inter.size() == 2);
}

TEST_CASE("efficiency fit") {
  auto one = efficiency_fit({pt(0.6, 0.7)});
  CHECK(one.epsilon == doctest::Approx(1.3));
  CHECK(one.sigma == 0.0);
  auto two = efficiency_fit({pt(0.6, 0.6), pt(0.8, 0.8)});
  CHECK(two.epsilon == doctest::Approx(1.4));
  CHECK(two.sigma == doctest::Approx(std::sqrt(0.02)));
  auto null_line = efficiency_fit({pt(0.2, 0.8), pt(0.5, 0.5), pt(0.9, 0.1)});
  CHECK(null_line.epsilon == doctest::Approx(1.0));
  CHECK(null_line.sigma == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("identical sequences have zero distances at every prefix") {
  std::vector<Event> events;
  std::string labels;
  for (int i = 0; i < 400; ++i) labels += (i / 3) % 2 ? 'T' : 'W';
  labels = "T" + labels;
  for (const char* comm : {"a", "b"})
    for (int d = 0; d < 3; ++d)
      for (std::size_t i = 0; i < labels.size(); ++i) {
        Event e{std::string(comm) + std::to_string(d), comm, labels[i] == 'W' ? Activity::Work : Activity::Talk,
                static_cast<Timestamp>(i), {}, 0, {}, {}};
        if (e.kind == Activity::Talk) e.reply_to = "m";
        events.push_back(e);
      }
  auto ds = build_dataset(events, {100, 2, false});
  auto series = prefix_convergence(ds, {100, 200, 400});
  for (const auto& [name, points] : series.inner)
    for (const auto& p : points) CHECK(*p.mean_distance == doctest::Approx(0.0));
  for (const auto& p : series.inter) CHECK(*p.mean_distance == doctest::Approx(0.0));
  CHECK_THROWS(prefix_convergence(ds, {50}));
  auto grid = default_prefix_grid(ds);
  CHECK(grid.front() == 100);
  CHECK(grid.back() == 400);
}

TEST_CASE("separated communities: inner below inter and tests agree") {
  SynthSpec spec;
  for (int c = 0; c < 2; ++c) {
    SynthCommunity sc;
    sc.name = c ? "b" : "a";
    sc.center = c ? HmmParams{0.8, 0.3} : HmmParams{0.3, 0.8};
    sc.spread = 0.02;
    sc.length_min = sc.length_max = 1500;
    spec.communities.push_back(sc);
  }
  auto data = generate_dataset(spec, 4);
  auto ds = build_dataset(filter_responses(data.events), {100, 5, false});
  auto series = prefix_convergence(ds, {100, 500, 1400});
  for (std::size_t g = 0; g < 3; ++g)
    for (const auto& [name, pts] : series.inner) CHECK(*pts[g].mean_distance < *series.inter[g].mean_distance);
  auto tests = convergence_tests(ds, 100);
  REQUIRE(tests.size() == 7);
  CHECK(tests[0].name == "inner_vs_inter_full");
  CHECK(tests[0].result.statistic < 0);
  CHECK(tests[0].result.p < 1e-6);
}

TEST_CASE("degenerate prefixes are excluded and recorded") {
  std::vector<Event> events;
  for (int d = 0; d < 2; ++d) {
    const std::string actor = "d" + std::to_string(d);
    // T, then 150 W, then alternating: the first 100 trimmed labels are all W.
    events.push_back({actor, "c", Activity::Talk, 0, {}, 0, {}, "m"});
    for (int i = 1; i <= 150; ++i) events.push_back({actor, "c", Activity::Work, i, {}, 0, {}, {}});
    for (int i = 151; i < 400; ++i) {
      Event e{actor, "c", i % 2 ? Activity::Talk : Activity::Work, i, {}, 0, {}, {}};
      if (e.kind == Activity::Talk) e.reply_to = "m";
      events.push_back(e);
    }
  }
  auto ds = build_dataset(events, {100, 2, false});
  std::vector<ConvergenceSeries::Exclusion> ex;
  CHECK(prefix_points(ds, 100, &ex).empty());
  CHECK(ex.size() == 2);
  auto series = prefix_convergence(ds, {100, 300});
  CHECK_FALSE(series.inner.at("c")[0].mean_distance);
  CHECK(series.inner.at("c")[1].mean_distance);
}

TEST_CASE("monthly evolution") {
  const Timestamp jan = 1104537600;  // 2005-01-01
  SUBCASE("one month gives one point") {
    std::string s;
    for (int i = 0; i < 60; ++i) s += i % 3 ? 'W' : 'T';
    auto seq = WtSequence::from_string(s);
    for (std::size_t i = 0; i < seq.size(); ++i) seq.timestamps[i] = jan + static_cast<Timestamp>(i) * 3600;
    auto m = monthly_evolution(seq);
    REQUIRE(m.size() == 1);
    CHECK(m[0].year == 2005);
    CHECK(m[0].month == 1);
    CHECK(m[0].params);
  }
  SUBCASE("pure work month is a gap") {
    std::string s = "TW";
    for (int i = 0; i < 40; ++i) s += 'W';
    s += "TWTWTWTWTWTWTWTWTWTWTWTW";
    auto seq = WtSequence::from_string(s);
    for (std::size_t i = 0; i < seq.size(); ++i)
      seq.timestamps[i] = (i >= 2 && i < 42 ? jan + 40 * kSecondsPerDay : jan + 70 * kSecondsPerDay) + static_cast<Timestamp>(i);
    seq.timestamps[0] = jan;
    seq.timestamps[1] = jan + 1;
    auto m = monthly_evolution(seq, 20);
    REQUIRE(m.size() == 3);
    CHECK_FALSE(m[0].params);  // January: 2 activities
    CHECK(m[1].month == 2);
    CHECK_FALSE(m[1].params);  // February: pure work
    CHECK(m[2].params);
  }
  SUBCASE("regime switch at a month boundary") {
    auto a = generate({0.5, 0.5}, 1000, Activity::Work, 1);
    auto b = generate({0.9, 0.9}, 1000, a.labels.back(), 2);
    WtSequence seq;
    for (std::size_t i = 0; i < 1000; ++i) {
      seq.labels.push_back(a.labels[i]);
      seq.timestamps.push_back(jan + static_cast<Timestamp>(i) * 2000);
    }
    for (std::size_t i = 0; i < 1000; ++i) {
      seq.labels.push_back(b.labels[i]);
      seq.timestamps.push_back(jan + 31 * kSecondsPerDay + static_cast<Timestamp>(i) * 2000);
    }
    auto m = monthly_evolution(seq);
    REQUIRE(m.size() == 2);
    CHECK(std::abs(m[0].params->alpha - 0.5) < 0.05);
    CHECK(std::abs(m[0].params->beta - 0.5) < 0.05);
    CHECK(std::abs(m[1].params->alpha - 0.9) < 0.05);
    CHECK(std::abs(m[1].params->beta - 0.9) < 0.05);
  }
}
