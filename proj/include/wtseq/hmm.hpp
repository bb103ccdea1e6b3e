#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "wtseq/ingest.hpp"
#include "wtseq/patterns.hpp"

namespace wtseq {

/// Self-transition probabilities of the two-state work/talk chain.
struct HmmParams {
  double alpha = 0.5;  // P(W | W)
  double beta = 0.5;   // P(T | T)

  double efficiency() const { return alpha + beta; }
  friend bool operator==(const HmmParams&, const HmmParams&) = default;
};

class EstimationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kSingularityTolerance = 1e-9;

/// alpha = M1 / (M1 + M2), beta = M4 / (M3 + M4) from 2-pattern counts.
/// Throws EstimationError when a state is never left from (M1 + M2 == 0 or
/// M3 + M4 == 0), or when both states are absorbing (M2 == M3 == 0).
HmmParams estimate(const PatternCounts& counts);

/// Convenience: count unthresholded 2-patterns, then estimate.
HmmParams estimate(const WtSequence& seq);

struct SteadyState {
  double p_work = 0.5;
  double p_talk = 0.5;
};

SteadyState steady_state(const HmmParams& p);

struct TwoPatternProbs {
  double ww = 0.25, wt = 0.25, tw = 0.25, tt = 0.25;
};

TwoPatternProbs two_pattern_probs(const HmmParams& p);

/// Draws a label sequence from the chain. Timestamps are 0, 1, 2, ...
WtSequence generate(const HmmParams& p, std::size_t length, Activity initial, std::uint64_t seed);

enum class ErrorAggregation {
  MeanCounts,    // average replicate counts, then apply the relative error
  PerReplicate,  // apply the relative error per replicate, then average
};

struct ThreePatternError {
  std::string pattern;
  std::uint64_t observed = 0;
  double null_mean = 0.0;
  double model_mean = 0.0;
  std::optional<double> e_null;   // missing when observed == 0
  std::optional<double> e_model;  // missing when observed == 0
};

struct ValidationResult {
  HmmParams params;
  std::array<ThreePatternError, 8> patterns;

  /// Means over defined patterns; nullopt when none are defined.
  std::optional<double> mean_e_null() const;
  std::optional<double> mean_e_model() const;
};

/// Compares 3-pattern counts of `seq` against label shuffles and against
/// chains generated from the parameters estimated on `seq` (same length,
/// same first label). Shuffle r uses derive_seed(seed, {0, r}); model
/// replicate r uses derive_seed(seed, {1, r}).
ValidationResult validate_three_patterns(const WtSequence& seq, int replicates = 100,
                                         std::uint64_t seed = 0,
                                         ErrorAggregation aggregation = ErrorAggregation::MeanCounts);

}  // namespace wtseq
