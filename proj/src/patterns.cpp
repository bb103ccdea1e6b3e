#include "wtseq/patterns.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "wtseq/rng.hpp"

namespace wtseq {

std::string pattern_name(std::size_t word, int g) {
  std::string s(static_cast<std::size_t>(g), 'W');
  for (int i = 0; i < g; ++i)
    if (word >> (g - 1 - i) & 1U) s[static_cast<std::size_t>(i)] = 'T';
  return s;
}

std::size_t pattern_index(std::string_view name) {
  std::size_t word = 0;
  for (char c : name) {
    if (c != 'W' && c != 'T') throw std::invalid_argument("pattern must be over {W,T}");
    word = word << 1 | (c == 'T' ? 1U : 0U);
  }
  return word;
}

PatternCounts count_patterns(const WtSequence& seq, int g, GapLimit xi) {
  if (g < 1 || g > 20) throw std::invalid_argument("pattern length must be in [1, 20]");
  if (xi && *xi <= 0) throw std::invalid_argument("gap limit must be positive");
  PatternCounts pc;
  pc.g = g;
  pc.counts.assign(std::size_t{1} << g, 0);
  const auto n = seq.labels.size();
  const auto width = static_cast<std::size_t>(g);
  if (n < width) return pc;

  const std::size_t mask = (std::size_t{1} << g) - 1;
  std::size_t word = 0;
  // Number of trailing labels joined by in-limit gaps, capped at g.
  std::size_t run = 0;
  for (std::size_t i = 0; i < n; ++i) {
    word = (word << 1 | static_cast<std::size_t>(seq.labels[i])) & mask;
    const bool linked = i > 0 && (!xi || seq.timestamps[i] - seq.timestamps[i - 1] <= *xi);
    run = linked ? std::min(run + 1, width) : 1;
    if (i + 1 >= width && run >= width) {
      ++pc.counts[word];
      ++pc.total_windows;
    }
  }
  return pc;
}

WtSequence shuffle_labels(const WtSequence& seq, std::uint64_t seed) {
  WtSequence out = seq;
  Rng rng(seed);
  auto& labels = out.labels;
  for (std::size_t i = labels.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(labels[i - 1], labels[j]);
  }
  return out;
}

NullEnsemble null_ensemble(const WtSequence& seq, int g, int replicates, GapLimit xi,
                           std::uint64_t seed) {
  if (replicates < 2) throw std::invalid_argument("null ensemble needs at least 2 replicates");
  const std::size_t words = std::size_t{1} << g;
  NullEnsemble ens{g, replicates, seed, std::vector<double>(words, 0.0), std::vector<double>(words, 0.0)};
  std::vector<std::vector<double>> samples(words, std::vector<double>(static_cast<std::size_t>(replicates)));
  for (int r = 0; r < replicates; ++r) {
    const auto shuffled = shuffle_labels(seq, derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    const auto pc = count_patterns(shuffled, g, xi);
    for (std::size_t w = 0; w < words; ++w)
      samples[w][static_cast<std::size_t>(r)] = static_cast<double>(pc.counts[w]);
  }
  for (std::size_t w = 0; w < words; ++w) {
    double sum = 0.0;
    for (double v : samples[w]) sum += v;
    const double mean = sum / replicates;
    double ss = 0.0;
    for (double v : samples[w]) ss += (v - mean) * (v - mean);
    ens.mean[w] = mean;
    ens.std[w] = std::sqrt(ss / (replicates - 1));
  }
  return ens;
}

EnrichmentResult enrichment(const WtSequence& seq, int g, int replicates, GapLimit xi,
                            std::uint64_t seed) {
  if (seq.empty()) throw std::invalid_argument("enrichment of an empty sequence");
  const auto observed = count_patterns(seq, g, xi);
  const auto ens = null_ensemble(seq, g, replicates, xi, seed);
  EnrichmentResult res{g, replicates, seed, {}};
  for (std::size_t w = 0; w < observed.counts.size(); ++w) {
    PatternEnrichment pe;
    pe.pattern = pattern_name(w, g);
    pe.observed = observed.counts[w];
    pe.null_mean = ens.mean[w];
    pe.null_std = ens.std[w];
    const double diff = static_cast<double>(pe.observed) - pe.null_mean;
    if (pe.null_mean > 0.0) pe.lambda_pct = diff / pe.null_mean * 100.0;
    if (pe.null_std > 0.0) pe.z = diff / pe.null_std;
    res.patterns.push_back(std::move(pe));
  }
  return res;
}

}  // namespace wtseq
