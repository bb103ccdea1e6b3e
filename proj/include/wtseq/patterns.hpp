#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wtseq/ingest.hpp"

namespace wtseq {

/// Maximum gap between consecutive activities inside a counted window.
/// nullopt means unbounded.
using GapLimit = std::optional<Timestamp>;

inline GapLimit gap_limit_days(std::optional<double> days) {
  if (!days) return std::nullopt;
  return static_cast<Timestamp>(*days * kSecondsPerDay);
}

/// Word index of a G-pattern: first label is the most significant bit,
/// W = 0 and T = 1. For G = 2 this gives WW, WT, TW, TT = M1..M4.
std::string pattern_name(std::size_t word, int g);
std::size_t pattern_index(std::string_view name);

struct PatternCounts {
  int g = 2;
  std::vector<std::uint64_t> counts;  // size 2^g
  std::uint64_t total_windows = 0;

  std::uint64_t operator[](std::size_t word) const { return counts[word]; }
  std::uint64_t at(std::string_view name) const { return counts.at(pattern_index(name)); }
};

PatternCounts count_patterns(const WtSequence& seq, int g, GapLimit xi = std::nullopt);

/// Uniform random permutation of the labels; timestamps stay in place.
WtSequence shuffle_labels(const WtSequence& seq, std::uint64_t seed);

struct NullEnsemble {
  int g = 2;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::vector<double> mean;
  std::vector<double> std;  // sample standard deviation (divisor replicates - 1)
};

NullEnsemble null_ensemble(const WtSequence& seq, int g, int replicates, GapLimit xi,
                           std::uint64_t seed);

struct PatternEnrichment {
  std::string pattern;
  std::uint64_t observed = 0;
  double null_mean = 0.0;
  double null_std = 0.0;
  std::optional<double> lambda_pct;  // missing when null_mean == 0
  std::optional<double> z;           // missing when null_std == 0
};

struct EnrichmentResult {
  int g = 2;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::vector<PatternEnrichment> patterns;  // indexed by word

  const PatternEnrichment& operator[](std::string_view name) const {
    return patterns.at(pattern_index(name));
  }
};

/// Compares observed pattern counts against `replicates` label shuffles.
/// Replicate r uses derive_seed(seed, {r}). The same gap limit applies to
/// observed and shuffled counting.
EnrichmentResult enrichment(const WtSequence& seq, int g, int replicates = 100,
                            GapLimit xi = std::nullopt, std::uint64_t seed = 0);

}  // namespace wtseq
