#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "json.hpp"
#include "wtseq/community.hpp"
#include "wtseq/networks.hpp"
#include "wtseq/synth.hpp"

using namespace wtseq;

namespace {

SynthSpec two_communities(double spread, DriftKind drift = DriftKind::None, double rate = 0.0) {
  SynthSpec spec;
  for (int c = 0; c < 2; ++c) {
    SynthCommunity sc;
    sc.name = c ? "beta" : "alpha";
    sc.n_devs = 6;
    sc.center = c ? HmmParams{0.8, 0.4} : HmmParams{0.4, 0.8};
    sc.spread = spread;
    sc.drift = drift;
    sc.drift_rate = rate;
    sc.length_min = sc.length_max = 3000;
    spec.communities.push_back(sc);
  }
  return spec;
}

}  // namespace

TEST_CASE("spec validation") {
  SynthSpec empty;
  CHECK_THROWS(empty.validate());
  auto spec = two_communities(0.05);
  CHECK_NOTHROW(spec.validate());
  spec.communities[0].spread = 0.2;  // 0.8 + 0.6 leaves (0, 1)
  CHECK_THROWS(spec.validate());
  spec = two_communities(0.05);
  spec.communities[1].length_min = 1;
  CHECK_THROWS(generate_dataset(spec, 1));
}

TEST_CASE("spec json round trip") {
  auto spec = two_communities(0.03, DriftKind::TowardCenter, 1e-4);
  auto back = SynthSpec::from_json(spec.to_json());
  CHECK(back.to_json() == spec.to_json());
  CHECK(back.communities[0].drift == DriftKind::TowardCenter);
}

TEST_CASE("drift interpolation") {
  auto p = drifted_params({0.2, 0.4}, {0.6, 0.8}, 0.01, 50);
  CHECK(p.alpha == doctest::Approx(0.4));
  CHECK(p.beta == doctest::Approx(0.6));
  auto end = drifted_params({0.2, 0.4}, {0.6, 0.8}, 0.01, 500);
  CHECK(end.alpha == doctest::Approx(0.6));
}

TEST_CASE("generation is reproducible and well formed") {
  auto spec = two_communities(0.05);
  auto a = generate_dataset(spec, 42);
  auto b = generate_dataset(spec, 42);
  CHECK(a.events == b.events);
  CHECK(a.manifest_json == b.manifest_json);
  CHECK(generate_dataset(spec, 43).events != a.events);

  std::map<std::string, Timestamp> last;
  std::set<std::string> ids;
  for (const auto& e : a.events) {
    if (e.message_id) ids.insert(*e.message_id);
    if (e.actor.find("-announce") != std::string::npos) continue;
    CHECK(e.actor == normalize_identity(e.actor));
    auto [it, fresh] = last.emplace(e.actor, e.ts);
    if (!fresh) {
      CHECK(e.ts > it->second);
      it->second = e.ts;
    }
    if (e.kind == Activity::Talk) {
      REQUIRE(e.reply_to);
    } else {
      CHECK_FALSE(e.files.empty());
    }
  }
  for (const auto& e : a.events)
    if (e.reply_to) CHECK(ids.count(*e.reply_to) == 1);
  auto manifest = nlohmann::json::parse(a.manifest_json);
  CHECK(manifest["developers"].size() == 12);
  CHECK(manifest["seed"] == 42);
}

TEST_CASE("without spread every developer sits at the center") {
  auto spec = two_communities(0.0);
  auto data = generate_dataset(spec, 5);
  auto ds = build_dataset(filter_responses(data.events), {100, 5, false});
  REQUIRE(ds.developer_count() == 12);
  for (const auto& c : ds.communities) {
    const auto center = c.name == "alpha" ? HmmParams{0.4, 0.8} : HmmParams{0.8, 0.4};
    for (const auto& d : c.developers) {
      auto p = estimate(d.sequence);
      CHECK(std::abs(p.alpha - center.alpha) < 0.05);
      CHECK(std::abs(p.beta - center.beta) < 0.05);
    }
  }
}

TEST_CASE("drift toward the center shrinks inner distances") {
  auto spec = two_communities(0.06, DriftKind::TowardCenter, 3e-4);
  double first = 0, last = 0;
  for (std::uint64_t s = 0; s < 4; ++s) {
    auto data = generate_dataset(spec, s);
    auto ds = build_dataset(filter_responses(data.events), {100, 5, false});
    auto series = prefix_convergence(ds, {500, 2900});
    for (const auto& [name, pts] : series.inner) {
      first += *pts[0].mean_distance;
      last += *pts[1].mean_distance;
    }
  }
  CHECK(last < first);
  for (const auto& t : generate_dataset(spec, 0).truth) {
    CHECK(t.target == spec.communities[t.community == "beta"].center);
    CHECK(t.trajectory.back().second.alpha == doctest::Approx(drifted_params(t.initial, t.target, 3e-4, t.length - 1).alpha));
  }
}

TEST_CASE("disjoint file pools give zero cross-community overlap") {
  auto data = generate_dataset(two_communities(0.05), 8);
  std::map<std::string, std::set<std::string>> files;
  for (const auto& e : data.events)
    for (const auto& f : e.files) files[e.community].insert(f);
  for (const auto& f : files["alpha"]) CHECK(files["beta"].count(f) == 0);
  CHECK(jaccard(files["alpha"], files["beta"]) == 0.0);
}

TEST_CASE("preset") {
  auto spec = SynthSpec::preset(14, 120, 2000);
  CHECK(spec.communities.size() == 14);
  int devs = 0;
  for (const auto& c : spec.communities) devs += c.n_devs;
  CHECK(devs == 120);
  CHECK_NOTHROW(spec.validate());
}
