#include "wtseq/networks.hpp"

#include <algorithm>
#include <stdexcept>

namespace wtseq {

namespace {

// message_id -> author, per community
using Authors = std::map<std::string, std::map<std::string, std::string>>;

Authors message_authors(const std::vector<Event>& events) {
  Authors authors;
  for (const auto& e : events)
    if (e.kind == Activity::Talk && e.message_id) authors[e.community].emplace(*e.message_id, e.actor);
  return authors;
}

bool on_roster(const Roster& roster, const std::string& community, const std::string& actor) {
  auto it = roster.find(community);
  return it != roster.end() && it->second.count(actor) > 0;
}

}  // namespace

Roster roster_of(const CommunityDataset& dataset) {
  Roster roster;
  for (const auto& c : dataset.communities)
    for (const auto& d : c.developers) roster[c.name].insert(d.actor);
  return roster;
}

PairKey PairKey::make(std::string community, std::string x, std::string y) {
  if (y < x) std::swap(x, y);
  return {std::move(community), std::move(x), std::move(y)};
}

SocialWeights social_weights(const std::vector<Event>& events, const Roster& roster) {
  const auto authors = message_authors(events);
  SocialWeights out;
  for (const auto& e : events) {
    if (e.kind != Activity::Talk || !e.reply_to) continue;
    auto cit = authors.find(e.community);
    const std::string* parent = nullptr;
    if (cit != authors.end()) {
      auto mit = cit->second.find(*e.reply_to);
      if (mit != cit->second.end()) parent = &mit->second;
    }
    if (!parent) {
      ++out.dangling_references;
      continue;
    }
    if (*parent == e.actor) continue;
    if (!on_roster(roster, e.community, e.actor) || !on_roster(roster, e.community, *parent)) continue;
    ++out.weights[PairKey::make(e.community, e.actor, *parent)];
  }
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const auto& f : a) inter += b.count(f);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) throw std::invalid_argument("jaccard of two empty sets");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::map<PairKey, double> cooperative_weights(const std::vector<Event>& events, const Roster& roster) {
  std::map<std::string, std::map<std::string, std::set<std::string>>> files;
  for (const auto& [community, actors] : roster)
    for (const auto& a : actors) files[community][a];
  for (const auto& e : events) {
    if (e.kind != Activity::Work || !on_roster(roster, e.community, e.actor)) continue;
    files[e.community][e.actor].insert(e.files.begin(), e.files.end());
  }
  std::map<PairKey, double> out;
  for (const auto& [community, by_actor] : files)
    for (auto i = by_actor.begin(); i != by_actor.end(); ++i)
      for (auto j = std::next(i); j != by_actor.end(); ++j) {
        if (i->second.empty() && j->second.empty()) continue;
        out[PairKey::make(community, i->first, j->first)] = jaccard(i->second, j->second);
      }
  return out;
}

std::vector<PairWeight> pair_weights(const std::vector<Event>& events, const Roster& roster,
                                     std::uint64_t* dangling_references) {
  const auto social = social_weights(events, roster);
  const auto coop = cooperative_weights(events, roster);
  if (dangling_references) *dangling_references = social.dangling_references;
  std::vector<PairWeight> out;
  for (const auto& [community, actors] : roster)
    for (auto i = actors.begin(); i != actors.end(); ++i)
      for (auto j = std::next(i); j != actors.end(); ++j) {
        PairWeight w{PairKey::make(community, *i, *j), 0, std::nullopt};
        if (auto it = social.weights.find(w.pair); it != social.weights.end()) w.social_weight = it->second;
        if (auto it = coop.find(w.pair); it != coop.end()) w.coop_weight = it->second;
        out.push_back(std::move(w));
      }
  return out;
}

std::map<std::pair<std::string, std::string>, std::vector<Timestamp>> first_contact_times(
    const std::vector<Event>& events, const Roster& roster) {
  const auto authors = message_authors(events);
  std::map<std::pair<std::string, std::string>, std::map<std::string, Timestamp>> first;
  auto note = [&](const std::string& community, const std::string& actor, const std::string& partner,
                  Timestamp ts) {
    if (!on_roster(roster, community, actor)) return;
    auto [it, inserted] = first[{community, actor}].emplace(partner, ts);
    if (!inserted) it->second = std::min(it->second, ts);
  };
  for (const auto& e : events) {
    if (e.kind != Activity::Talk || !e.reply_to) continue;
    auto cit = authors.find(e.community);
    if (cit == authors.end()) continue;
    auto mit = cit->second.find(*e.reply_to);
    if (mit == cit->second.end() || mit->second == e.actor) continue;
    note(e.community, e.actor, mit->second, e.ts);
    note(e.community, mit->second, e.actor, e.ts);
  }
  std::map<std::pair<std::string, std::string>, std::vector<Timestamp>> out;
  for (const auto& [key, partners] : first) {
    auto& times = out[key];
    for (const auto& [_, ts] : partners) times.push_back(ts);
    std::sort(times.begin(), times.end());
  }
  return out;
}

std::string to_string(WeightKind k) { return k == WeightKind::Social ? "social" : "coop"; }
std::string to_string(CorrelationMethod m) { return m == CorrelationMethod::Pearson ? "pearson" : "spearman"; }

CorrelationResult correlate_distance_weight(const std::map<PairKey, double>& distances,
                                            const std::vector<PairWeight>& weights, WeightKind kind,
                                            CorrelationMethod method, const CorrelationOptions& options,
                                            std::string label) {
  std::vector<double> rho, w;
  for (const auto& pw : weights) {
    auto it = distances.find(pw.pair);
    if (it == distances.end()) continue;
    double value;
    if (kind == WeightKind::Social) {
      value = static_cast<double>(pw.social_weight);
    } else {
      if (!pw.coop_weight) continue;
      value = *pw.coop_weight;
    }
    if (!options.include_zero_pairs && value <= 0.0) continue;
    rho.push_back(it->second);
    w.push_back(value);
  }
  if (rho.size() < 3)
    throw std::invalid_argument("correlation for " + label + " needs at least 3 pairs, have " +
                                std::to_string(rho.size()));
  CorrelationResult res{std::move(label), kind, method, std::nullopt, std::nullopt, rho.size(), std::nullopt};
  const auto c = method == CorrelationMethod::Pearson ? stats::pearson(rho, w) : stats::spearman(rho, w);
  if (c.r) {
    res.r = c.r;
    res.p = c.test.p;
  }
  if (method == CorrelationMethod::Spearman && options.permutation_p && c.r)
    res.permutation_p = stats::spearman_permutation_p(rho, w, options.permutations, options.seed);
  return res;
}

}  // namespace wtseq
