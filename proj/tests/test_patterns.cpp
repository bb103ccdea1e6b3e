#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "support.hpp"
#include "wtseq/patterns.hpp"

using namespace wtseq;

namespace {

std::map<std::string, std::uint64_t> by_name(const PatternCounts& c) {
  std::map<std::string, std::uint64_t> m;
  for (std::size_t w = 0; w < c.counts.size(); ++w) m[pattern_name(w, c.g)] = c.counts[w];
  return m;
}

// Window-by-window count, written independently of the rolling counter.
std::map<std::string, std::uint64_t> naive_counts(const WtSequence& s, int g, GapLimit xi) {
  std::map<std::string, std::uint64_t> m;
  const auto str = s.label_string();
  for (std::size_t i = 0; i + static_cast<std::size_t>(g) <= s.size(); ++i) {
    bool linked = true;
    for (int k = 1; k < g && xi; ++k)
      linked = linked && s.timestamps[i + k] - s.timestamps[i + k - 1] <= *xi;
    if (linked) ++m[str.substr(i, static_cast<std::size_t>(g))];
  }
  return m;
}

}  // namespace

TEST_CASE("pattern names follow the word index") {
  CHECK(pattern_name(0, 2) == "WW");
  CHECK(pattern_name(1, 2) == "WT");
  CHECK(pattern_name(2, 2) == "TW");
  CHECK(pattern_name(3, 2) == "TT");
  CHECK(pattern_name(6, 3) == "TTW");
  for (std::size_t w = 0; w < 16; ++w) CHECK(pattern_index(pattern_name(w, 4)) == w);
}

TEST_CASE("figure one counts") {
  auto c = count_patterns(WtSequence::from_string(testing::kFigureOneSequence), 2);
  CHECK(c.at("WW") == 8);
  CHECK(c.at("WT") == 5);
  CHECK(c.at("TW") == 5);
  CHECK(c.at("TT") == 6);
  CHECK(c.total_windows == 24);
}

TEST_CASE("small hand-counted sequence") {
  auto c = count_patterns(WtSequence::from_string("WWTWTT"), 2);
  CHECK(c.at("WW") == 1);
  CHECK(c.at("WT") == 2);
  CHECK(c.at("TW") == 1);
  CHECK(c.at("TT") == 1);
}

TEST_CASE("sequence shorter than G counts nothing") {
  auto c = count_patterns(WtSequence::from_string("WT"), 3);
  CHECK(c.total_windows == 0);
  CHECK(std::all_of(c.counts.begin(), c.counts.end(), [](auto v) { return v == 0; }));
  CHECK_THROWS(count_patterns(WtSequence::from_string("WT"), 0));
}

TEST_CASE("gap limit drops windows with a long gap") {
  auto s = WtSequence::from_string("WT");
  s.timestamps = {0, static_cast<Timestamp>(10 * kSecondsPerDay)};
  auto c = count_patterns(s, 2, gap_limit_days(7.0));
  CHECK(c.total_windows == 0);
  CHECK(count_patterns(s, 2, gap_limit_days(10.0)).at("WT") == 1);
}

TEST_CASE("rolling counter matches window enumeration") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = testing::random_sequence(1 + rng.below(80), rng.uniform(), rng.next());
    Timestamp t = 0;
    for (auto& ts : s.timestamps) ts = t += static_cast<Timestamp>(rng.below(5));
    const int g = 1 + static_cast<int>(rng.below(5));
    const GapLimit xi = rng.bernoulli(0.5) ? GapLimit(2) : std::nullopt;
    auto got = by_name(count_patterns(s, g, xi));
    auto want = naive_counts(s, g, xi);
    for (const auto& [name, n] : got) CHECK(n == (want.count(name) ? want[name] : 0));
  }
}

TEST_CASE("shuffles preserve the multiset and are reproducible") {
  auto s = WtSequence::from_string("WWTT");
  auto a = shuffle_labels(s, 5);
  CHECK(std::count(a.labels.begin(), a.labels.end(), Activity::Work) == 2);
  CHECK(shuffle_labels(s, 5).labels == a.labels);
  CHECK(shuffle_labels(WtSequence::from_string("W"), 5).label_string() == "W");
}

TEST_CASE("shuffle is uniform over arrangements") {
  std::map<std::string, int> seen;
  auto s = WtSequence::from_string("WWTT");
  for (std::uint64_t i = 0; i < 6000; ++i) ++seen[shuffle_labels(s, i).label_string()];
  CHECK(seen.size() == 6);
  for (const auto& [k, n] : seen) CHECK(std::abs(n - 1000) < 120);
}

TEST_CASE("enrichment against the exact null of WWTT") {
  // The six arrangements of WWTT contain WW once in three of them: mean 0.5.
  auto e = enrichment(WtSequence::from_string("WWTT"), 2, 4000, std::nullopt, 3);
  CHECK(e["WW"].observed == 1);
  CHECK(e["WW"].null_mean == doctest::Approx(0.5).epsilon(0.05));
  CHECK(*e["WW"].lambda_pct == doctest::Approx(100.0).epsilon(0.1));
}

TEST_CASE("null mean of WW matches n_W (n_W - 1) / L") {
  auto s = testing::random_sequence(300, 0.6, 9);
  const double nw = static_cast<double>(std::count(s.labels.begin(), s.labels.end(), Activity::Work));
  const double L = static_cast<double>(s.size());
  auto ens = null_ensemble(s, 2, 2000, std::nullopt, 4);
  const double expected = nw * (nw - 1.0) / L;
  CHECK(ens.mean[0] == doctest::Approx(expected).epsilon(0.01));
}

TEST_CASE("undefined enrichment values are missing") {
  auto e = enrichment(WtSequence::from_string("WWWW"), 2, 10, std::nullopt, 1);
  CHECK_FALSE(e["TT"].lambda_pct);
  CHECK_FALSE(e["TT"].z);
  CHECK(*e["WW"].lambda_pct == doctest::Approx(0.0));
  CHECK_FALSE(e["WW"].z);
  CHECK_THROWS(enrichment(WtSequence::from_string("WT"), 2, 1, std::nullopt, 1));
}

TEST_CASE("enrichment replicates are seed-determined") {
  auto s = testing::random_sequence(500, 0.5, 2);
  auto a = enrichment(s, 3, 20, std::nullopt, 77);
  auto b = enrichment(s, 3, 20, std::nullopt, 77);
  for (std::size_t w = 0; w < 8; ++w) {
    CHECK(a.patterns[w].null_mean == b.patterns[w].null_mean);
    CHECK(a.patterns[w].null_std == b.patterns[w].null_std);
  }
}
