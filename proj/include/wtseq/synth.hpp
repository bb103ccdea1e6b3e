#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wtseq/hmm.hpp"
#include "wtseq/ingest.hpp"

namespace wtseq {

enum class DriftKind { None, TowardCenter, TowardGlobal };

struct SynthCommunity {
  std::string name;
  int n_devs = 8;
  HmmParams center{0.7, 0.6};
  double spread = 0.05;  // sd of per-developer parameter offsets
  DriftKind drift = DriftKind::None;
  double drift_rate = 0.0;  // fraction of the way to the target per activity
  std::size_t length_min = 2000;
  std::size_t length_max = 2000;
  int file_pool = 60;
  double files_per_dev = 0.3;  // fraction of the pool each developer touches
  double reply_density = 0.5;  // probability of a reply edge between two developers
};

struct SynthSpec {
  std::vector<SynthCommunity> communities;
  Timestamp start = 1104537600;  // 2005-01-01
  double join_window_years = 4.0;
  /// Leaving rate per year = survival_base_rate * exp(survival_beta_coef * beta).
  double survival_base_rate = 0.4;
  double survival_beta_coef = 0.0;
  double min_duration_years = 0.25;

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const;

  /// `n_communities` communities with `total_devs` developers spread evenly
  /// and centers spaced across the talk / balanced / work regions.
  static SynthSpec preset(int n_communities, int total_devs, std::size_t length);

  static SynthSpec from_json(const std::string& text);
  std::string to_json() const;
};

struct DeveloperTruth {
  std::string actor;
  std::string community;
  HmmParams initial;
  HmmParams target;
  double drift_rate = 0.0;
  std::size_t length = 0;
  Activity first_label = Activity::Work;
  Timestamp join_ts = 0;
  double duration_years = 0.0;
  std::vector<std::pair<std::size_t, HmmParams>> trajectory;  // (activity index, params)
};

struct SynthDataset {
  std::vector<Event> events;
  std::vector<DeveloperTruth> truth;
  std::string manifest_json;
};

/// Parameters in effect at activity `k` of a drifting developer.
HmmParams drifted_params(const HmmParams& initial, const HmmParams& target, double rate, std::size_t k);

SynthDataset generate_dataset(const SynthSpec& spec, std::uint64_t seed);

}  // namespace wtseq
