#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "wtseq/ingest.hpp"
#include "wtseq/stats.hpp"

namespace wtseq {

/// community -> actors that survived the cohort filters
using Roster = std::map<std::string, std::set<std::string>>;

Roster roster_of(const CommunityDataset& dataset);

/// Unordered developer pair within a community; actor_a < actor_b.
struct PairKey {
  std::string community;
  std::string actor_a;
  std::string actor_b;

  static PairKey make(std::string community, std::string x, std::string y);
  friend auto operator<=>(const PairKey&, const PairKey&) = default;
};

struct PairWeight {
  PairKey pair;
  std::uint64_t social_weight = 0;
  std::optional<double> coop_weight;  // missing when neither actor touched a file
};

struct SocialWeights {
  std::map<PairKey, std::uint64_t> weights;
  /// reply_to values that match no known message in the community
  std::uint64_t dangling_references = 0;
};

/// Undirected count of reply emails between roster members.
SocialWeights social_weights(const std::vector<Event>& events, const Roster& roster);

/// Jaccard similarity of the file sets two developers committed to.
std::map<PairKey, double> cooperative_weights(const std::vector<Event>& events, const Roster& roster);

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// Every within-community roster pair with both weights attached.
std::vector<PairWeight> pair_weights(const std::vector<Event>& events, const Roster& roster,
                                     std::uint64_t* dangling_references = nullptr);

/// For each roster actor, the first time each reply partner (either
/// direction) interacted with them. Keyed by (community, actor).
std::map<std::pair<std::string, std::string>, std::vector<Timestamp>> first_contact_times(
    const std::vector<Event>& events, const Roster& roster);

enum class WeightKind { Social, Coop };
enum class CorrelationMethod { Pearson, Spearman };

std::string to_string(WeightKind k);
std::string to_string(CorrelationMethod m);

struct CorrelationResult {
  std::string community;  // or "ALL"
  WeightKind kind = WeightKind::Social;
  CorrelationMethod method = CorrelationMethod::Pearson;
  std::optional<double> r;
  std::optional<double> p;
  std::size_t n_pairs = 0;
  std::optional<double> permutation_p;
};

struct CorrelationOptions {
  bool include_zero_pairs = false;
  bool permutation_p = false;  // Spearman only
  int permutations = 10000;
  std::uint64_t seed = 0;
};

/// Correlates parameter distance with pair weight over pairs present in
/// both maps. Throws std::invalid_argument when fewer than 3 pairs remain.
CorrelationResult correlate_distance_weight(const std::map<PairKey, double>& distances,
                                            const std::vector<PairWeight>& weights, WeightKind kind,
                                            CorrelationMethod method, const CorrelationOptions& options = {},
                                            std::string label = "ALL");

}  // namespace wtseq
