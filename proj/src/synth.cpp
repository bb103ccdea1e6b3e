#include "wtseq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <tuple>

#include "json.hpp"
#include "wtseq/rng.hpp"

namespace wtseq {

namespace {

using ordered_json = nlohmann::ordered_json;

const char* drift_name(DriftKind k) {
  switch (k) {
    case DriftKind::None: return "none";
    case DriftKind::TowardCenter: return "toward_center";
    case DriftKind::TowardGlobal: return "toward_global";
  }
  return "none";
}

DriftKind parse_drift(const std::string& s) {
  if (s == "none") return DriftKind::None;
  if (s == "toward_center") return DriftKind::TowardCenter;
  if (s == "toward_global") return DriftKind::TowardGlobal;
  throw std::invalid_argument("unknown drift kind '" + s + "'");
}

ordered_json params_json(const HmmParams& p) { return ordered_json::array({p.alpha, p.beta}); }

double clamp_param(double v) { return std::clamp(v, 0.02, 0.98); }

std::string dev_name(const std::string& community, int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "dev%03d", i);
  return community + "-" + buf;
}

struct PendingTalk {
  Timestamp ts;
  std::size_t event_index;
  int dev;
};

}  // namespace

void SynthSpec::validate() const {
  if (communities.empty()) throw std::invalid_argument("synth spec: no communities");
  if (!(join_window_years >= 0.0)) throw std::invalid_argument("synth spec: join_window_years must be >= 0");
  if (!(survival_base_rate > 0.0)) throw std::invalid_argument("synth spec: survival_base_rate must be > 0");
  if (!(min_duration_years > 0.0)) throw std::invalid_argument("synth spec: min_duration_years must be > 0");
  if (start < 1) throw std::invalid_argument("synth spec: start must be positive");
  for (const auto& c : communities) {
    const std::string where = "synth spec community '" + c.name + "': ";
    if (c.name.empty()) throw std::invalid_argument("synth spec: community without a name");
    if (c.n_devs < 1) throw std::invalid_argument(where + "n_devs must be >= 1");
    for (double v : {c.center.alpha, c.center.beta})
      if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument(where + "center must lie inside (0, 1)");
    if (!(c.spread >= 0.0)) throw std::invalid_argument(where + "spread must be >= 0");
    for (double v : {c.center.alpha, c.center.beta})
      if (v - 3.0 * c.spread <= 0.0 || v + 3.0 * c.spread >= 1.0)
        throw std::invalid_argument(where + "center +/- 3 spread must stay inside (0, 1)");
    if (!(c.drift_rate >= 0.0)) throw std::invalid_argument(where + "drift_rate must be >= 0");
    if (c.length_min < 2 || c.length_max < c.length_min)
      throw std::invalid_argument(where + "need 2 <= length_min <= length_max");
    if (c.file_pool < 1) throw std::invalid_argument(where + "file_pool must be >= 1");
    if (!(c.files_per_dev > 0.0 && c.files_per_dev <= 1.0))
      throw std::invalid_argument(where + "files_per_dev must lie in (0, 1]");
    if (!(c.reply_density >= 0.0 && c.reply_density <= 1.0))
      throw std::invalid_argument(where + "reply_density must lie in [0, 1]");
  }
}

SynthSpec SynthSpec::preset(int n_communities, int total_devs, std::size_t length) {
  if (n_communities < 1 || total_devs < n_communities)
    throw std::invalid_argument("preset needs at least one developer per community");
  SynthSpec spec;
  for (int c = 0; c < n_communities; ++c) {
    SynthCommunity sc;
    char buf[16];
    std::snprintf(buf, sizeof buf, "proj%02d", c);
    sc.name = buf;
    sc.n_devs = total_devs / n_communities + (c < total_devs % n_communities ? 1 : 0);
    const double f = n_communities == 1 ? 0.5 : static_cast<double>(c) / (n_communities - 1);
    sc.center = {0.35 + 0.5 * f, 0.88 - 0.43 * f};
    sc.spread = 0.03;
    sc.length_min = length * 9 / 10;
    sc.length_max = length * 11 / 10;
    spec.communities.push_back(sc);
  }
  spec.survival_beta_coef = -2.0;
  return spec;
}

std::string SynthSpec::to_json() const {
  ordered_json j;
  j["start"] = start;
  j["join_window_years"] = join_window_years;
  j["survival_base_rate"] = survival_base_rate;
  j["survival_beta_coef"] = survival_beta_coef;
  j["min_duration_years"] = min_duration_years;
  auto& arr = j["communities"] = ordered_json::array();
  for (const auto& c : communities) {
    ordered_json cj;
    cj["name"] = c.name;
    cj["n_devs"] = c.n_devs;
    cj["center"] = params_json(c.center);
    cj["spread"] = c.spread;
    cj["drift"] = drift_name(c.drift);
    cj["drift_rate"] = c.drift_rate;
    cj["length_min"] = c.length_min;
    cj["length_max"] = c.length_max;
    cj["file_pool"] = c.file_pool;
    cj["files_per_dev"] = c.files_per_dev;
    cj["reply_density"] = c.reply_density;
    arr.push_back(cj);
  }
  return j.dump(2);
}

SynthSpec SynthSpec::from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SynthSpec spec;
  spec.start = j.value("start", spec.start);
  spec.join_window_years = j.value("join_window_years", spec.join_window_years);
  spec.survival_base_rate = j.value("survival_base_rate", spec.survival_base_rate);
  spec.survival_beta_coef = j.value("survival_beta_coef", spec.survival_beta_coef);
  spec.min_duration_years = j.value("min_duration_years", spec.min_duration_years);
  for (const auto& cj : j.at("communities")) {
    SynthCommunity c;
    c.name = cj.at("name").get<std::string>();
    c.n_devs = cj.value("n_devs", c.n_devs);
    if (cj.contains("center")) c.center = {cj["center"].at(0).get<double>(), cj["center"].at(1).get<double>()};
    c.spread = cj.value("spread", c.spread);
    c.drift = parse_drift(cj.value("drift", std::string("none")));
    c.drift_rate = cj.value("drift_rate", c.drift_rate);
    c.length_min = cj.value("length_min", c.length_min);
    c.length_max = cj.value("length_max", c.length_max);
    c.file_pool = cj.value("file_pool", c.file_pool);
    c.files_per_dev = cj.value("files_per_dev", c.files_per_dev);
    c.reply_density = cj.value("reply_density", c.reply_density);
    spec.communities.push_back(c);
  }
  return spec;
}

HmmParams drifted_params(const HmmParams& initial, const HmmParams& target, double rate, std::size_t k) {
  const double f = std::min(1.0, rate * static_cast<double>(k));
  return {initial.alpha + (target.alpha - initial.alpha) * f, initial.beta + (target.beta - initial.beta) * f};
}

SynthDataset generate_dataset(const SynthSpec& spec, std::uint64_t seed) {
  spec.validate();
  HmmParams global{0.0, 0.0};
  for (const auto& c : spec.communities) {
    global.alpha += c.center.alpha / static_cast<double>(spec.communities.size());
    global.beta += c.center.beta / static_cast<double>(spec.communities.size());
  }

  SynthDataset out;
  for (const auto& c : spec.communities) {
    const std::uint64_t ctag = fnv1a(c.name);
    const std::string root_actor = c.name + "-announce";
    const std::string root_id = "root@" + c.name;
    const Timestamp root_ts = spec.start - 1;
    std::vector<Event> events;
    events.push_back({root_actor, c.name, Activity::Talk, root_ts, {}, 0, root_id, std::nullopt});

    std::vector<PendingTalk> talks;
    std::vector<std::string> pool;
    for (int f = 0; f < c.file_pool; ++f) pool.push_back(c.name + "/src/File" + std::to_string(f) + ".java");

    for (int i = 0; i < c.n_devs; ++i) {
      Rng rng(derive_seed(seed, {ctag, static_cast<std::uint64_t>(i)}));
      DeveloperTruth t;
      t.actor = dev_name(c.name, i);
      t.community = c.name;
      t.initial = {clamp_param(c.center.alpha + c.spread * rng.normal()),
                   clamp_param(c.center.beta + c.spread * rng.normal())};
      t.target = c.drift == DriftKind::TowardCenter   ? c.center
                 : c.drift == DriftKind::TowardGlobal ? global
                                                      : t.initial;
      t.drift_rate = c.drift == DriftKind::None ? 0.0 : c.drift_rate;
      t.length = c.length_min + rng.below(c.length_max - c.length_min + 1);
      const auto ss = steady_state(t.initial);
      t.first_label = rng.bernoulli(ss.p_work) ? Activity::Work : Activity::Talk;
      t.join_ts = spec.start + static_cast<Timestamp>(rng.uniform() * spec.join_window_years * kSecondsPerYear);
      const double rate = spec.survival_base_rate * std::exp(spec.survival_beta_coef * t.initial.beta);
      t.duration_years = std::max(spec.min_duration_years, rng.exponential(rate));

      // developer's own slice of the file pool
      std::vector<std::size_t> files(pool.size());
      for (std::size_t f = 0; f < files.size(); ++f) files[f] = f;
      for (std::size_t f = files.size(); f > 1; --f) std::swap(files[f - 1], files[rng.below(f)]);
      files.resize(std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(c.files_per_dev * pool.size()))));

      // gaps normalized so the stream spans exactly duration_years
      std::vector<double> gaps(t.length - 1);
      double gap_sum = 0.0;
      for (auto& g : gaps) gap_sum += (g = rng.exponential(1.0));
      const double span = t.duration_years * kSecondsPerYear;

      Activity cur = t.first_label;
      double clock = static_cast<double>(t.join_ts);
      Timestamp prev_ts = -1;
      const std::size_t checkpoints = 4;
      for (std::size_t k = 0; k < t.length; ++k) {
        const auto p = drifted_params(t.initial, t.target, t.drift_rate, k);
        if (k > 0) {
          const double stay = cur == Activity::Work ? p.alpha : p.beta;
          if (!rng.bernoulli(stay)) cur = cur == Activity::Work ? Activity::Talk : Activity::Work;
          clock += gaps[k - 1] / gap_sum * span;
        }
        if (k % std::max<std::size_t>(1, t.length / checkpoints) == 0 || k + 1 == t.length)
          t.trajectory.emplace_back(k, p);
        const Timestamp ts = std::max(prev_ts + 1, static_cast<Timestamp>(clock));
        prev_ts = ts;
        Event e{t.actor, c.name, cur, ts, {}, 0, std::nullopt, std::nullopt};
        if (cur == Activity::Work) {
          const auto n_files = 1 + rng.below(3);
          for (std::uint64_t f = 0; f < n_files; ++f) e.files.push_back(pool[files[rng.below(files.size())]]);
          std::sort(e.files.begin(), e.files.end());
          e.files.erase(std::unique(e.files.begin(), e.files.end()), e.files.end());
          e.lines_added = static_cast<std::int64_t>(1 + rng.below(400));
        } else {
          e.message_id = t.actor + "." + std::to_string(k) + "@" + c.name;
          talks.push_back({ts, events.size(), i});
        }
        events.push_back(std::move(e));
      }
      out.truth.push_back(std::move(t));
    }

    // Reply wiring: each talk answers the latest earlier message of a
    // random neighbour, or the list root when there is none.
    Rng wiring(derive_seed(seed, {ctag, 0xfeedULL}));
    std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(c.n_devs));
    for (int a = 0; a < c.n_devs; ++a)
      for (int b = a + 1; b < c.n_devs; ++b)
        if (wiring.bernoulli(c.reply_density)) {
          neighbours[static_cast<std::size_t>(a)].push_back(b);
          neighbours[static_cast<std::size_t>(b)].push_back(a);
        }
    std::stable_sort(talks.begin(), talks.end(),
                     [](const PendingTalk& x, const PendingTalk& y) { return x.ts < y.ts; });
    std::vector<std::optional<std::string>> latest(static_cast<std::size_t>(c.n_devs));
    std::size_t k = 0;
    while (k < talks.size()) {
      // messages at the same second cannot answer each other
      std::size_t end = k;
      while (end < talks.size() && talks[end].ts == talks[k].ts) ++end;
      for (std::size_t m = k; m < end; ++m) {
        const auto& nb = neighbours[static_cast<std::size_t>(talks[m].dev)];
        std::optional<std::string> parent;
        if (!nb.empty()) parent = latest[static_cast<std::size_t>(nb[wiring.below(nb.size())])];
        events[talks[m].event_index].reply_to = parent.value_or(root_id);
      }
      for (std::size_t m = k; m < end; ++m)
        latest[static_cast<std::size_t>(talks[m].dev)] = events[talks[m].event_index].message_id;
      k = end;
    }
    out.events.insert(out.events.end(), std::make_move_iterator(events.begin()),
                      std::make_move_iterator(events.end()));
  }

  std::stable_sort(out.events.begin(), out.events.end(), [](const Event& a, const Event& b) {
    return std::tie(a.ts, a.community, a.actor) < std::tie(b.ts, b.community, b.actor);
  });

  ordered_json m;
  m["seed"] = seed;
  m["spec"] = ordered_json::parse(spec.to_json());
  auto& devs = m["developers"] = ordered_json::array();
  for (const auto& t : out.truth) {
    ordered_json d;
    d["actor"] = t.actor;
    d["community"] = t.community;
    d["initial"] = params_json(t.initial);
    d["target"] = params_json(t.target);
    d["drift_rate"] = t.drift_rate;
    d["length"] = t.length;
    d["first_label"] = std::string(1, to_char(t.first_label));
    d["join_ts"] = t.join_ts;
    d["duration_years"] = t.duration_years;
    auto& traj = d["trajectory"] = ordered_json::array();
    for (const auto& [idx, p] : t.trajectory) traj.push_back({{"index", idx}, {"alpha", p.alpha}, {"beta", p.beta}});
    devs.push_back(d);
  }
  out.manifest_json = m.dump(2);
  return out;
}

}  // namespace wtseq
