#include "wtseq/hmm.hpp"

#include <cmath>
#include <vector>

#include "wtseq/rng.hpp"

namespace wtseq {

HmmParams estimate(const PatternCounts& counts) {
  if (counts.g != 2) throw std::invalid_argument("estimate needs 2-pattern counts");
  const auto m1 = counts.counts[0], m2 = counts.counts[1], m3 = counts.counts[2], m4 = counts.counts[3];
  if (m1 + m2 == 0)
    throw EstimationError("degenerate sequence: no transitions out of the work state");
  if (m3 + m4 == 0)
    throw EstimationError("degenerate sequence: no transitions out of the talk state");
  if (m2 == 0 && m3 == 0)
    throw EstimationError("degenerate sequence: work and talk are never adjacent");
  return {static_cast<double>(m1) / static_cast<double>(m1 + m2),
          static_cast<double>(m4) / static_cast<double>(m3 + m4)};
}

HmmParams estimate(const WtSequence& seq) { return estimate(count_patterns(seq, 2)); }

namespace {

double check_denominator(const HmmParams& p) {
  if (!(p.alpha >= 0.0 && p.alpha <= 1.0 && p.beta >= 0.0 && p.beta <= 1.0))
    throw std::invalid_argument("HMM parameters must lie in [0, 1]");
  if (p.alpha + p.beta >= 2.0 - kSingularityTolerance)
    throw SingularityError("steady state undefined for alpha + beta = 2");
  return 2.0 - p.alpha - p.beta;
}

}  // namespace

SteadyState steady_state(const HmmParams& p) {
  const double d = check_denominator(p);
  const double pw = (1.0 - p.beta) / d;
  return {pw, 1.0 - pw};
}

TwoPatternProbs two_pattern_probs(const HmmParams& p) {
  const double d = check_denominator(p);
  const double switch_prob = (1.0 - p.alpha) * (1.0 - p.beta) / d;
  return {p.alpha * (1.0 - p.beta) / d, switch_prob, switch_prob, (1.0 - p.alpha) * p.beta / d};
}

WtSequence generate(const HmmParams& p, std::size_t length, Activity initial, std::uint64_t seed) {
  if (length == 0) throw std::invalid_argument("generate: length must be >= 1");
  WtSequence seq;
  seq.labels.resize(length);
  seq.timestamps.resize(length);
  Rng rng(seed);
  Activity cur = initial;
  for (std::size_t i = 0; i < length; ++i) {
    if (i > 0) {
      const double stay = cur == Activity::Work ? p.alpha : p.beta;
      if (!(rng.uniform() < stay)) cur = cur == Activity::Work ? Activity::Talk : Activity::Work;
    }
    seq.labels[i] = cur;
    seq.timestamps[i] = static_cast<Timestamp>(i);
  }
  return seq;
}

namespace {

std::optional<double> mean_defined(const std::array<ThreePatternError, 8>& pats,
                                   std::optional<double> ThreePatternError::*field) {
  double sum = 0.0;
  int n = 0;
  for (const auto& p : pats)
    if (p.*field) {
      sum += *(p.*field);
      ++n;
    }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

std::optional<double> ValidationResult::mean_e_null() const {
  return mean_defined(patterns, &ThreePatternError::e_null);
}

std::optional<double> ValidationResult::mean_e_model() const {
  return mean_defined(patterns, &ThreePatternError::e_model);
}

ValidationResult validate_three_patterns(const WtSequence& seq, int replicates, std::uint64_t seed,
                                         ErrorAggregation aggregation) {
  if (seq.size() < 3) throw std::invalid_argument("validation needs at least 3 activities");
  if (replicates < 1) throw std::invalid_argument("validation needs at least 1 replicate");
  ValidationResult res;
  res.params = estimate(seq);
  const auto observed = count_patterns(seq, 3);

  std::array<double, 8> null_sum{}, model_sum{}, null_err{}, model_err{};
  for (int r = 0; r < replicates; ++r) {
    const auto ur = static_cast<std::uint64_t>(r);
    const auto shuffled = count_patterns(shuffle_labels(seq, derive_seed(seed, {0, ur})), 3);
    const auto modeled =
        count_patterns(generate(res.params, seq.size(), seq.labels.front(), derive_seed(seed, {1, ur})), 3);
    for (std::size_t w = 0; w < 8; ++w) {
      const auto obs = static_cast<double>(observed.counts[w]);
      null_sum[w] += static_cast<double>(shuffled.counts[w]);
      model_sum[w] += static_cast<double>(modeled.counts[w]);
      if (obs > 0) {
        null_err[w] += std::abs(static_cast<double>(shuffled.counts[w]) - obs) / obs;
        model_err[w] += std::abs(static_cast<double>(modeled.counts[w]) - obs) / obs;
      }
    }
  }
  for (std::size_t w = 0; w < 8; ++w) {
    auto& p = res.patterns[w];
    p.pattern = pattern_name(w, 3);
    p.observed = observed.counts[w];
    p.null_mean = null_sum[w] / replicates;
    p.model_mean = model_sum[w] / replicates;
    if (p.observed == 0) continue;
    const auto obs = static_cast<double>(p.observed);
    if (aggregation == ErrorAggregation::MeanCounts) {
      p.e_null = std::abs(p.null_mean - obs) / obs;
      p.e_model = std::abs(p.model_mean - obs) / obs;
    } else {
      p.e_null = null_err[w] / replicates;
      p.e_model = model_err[w] / replicates;
    }
  }
  return res;
}

}  // namespace wtseq
