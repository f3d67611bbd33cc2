#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <string>

#include "corelate/error.hpp"
#include "corelate/ingest.hpp"

namespace corelate {

// Inclusive range of per-user activity that survives the reaction filter.
struct ActivityBand {
  std::uint64_t lower = 3;
  std::uint64_t upper = std::numeric_limits<std::uint64_t>::max();
  double coverage = 0.999;

  void validate() const {
    if (lower < 1) throw DomainError("activity band: lower must be >= 1");
    if (upper < lower) throw DomainError("activity band: upper must be >= lower");
    if (!(coverage > 0.0 && coverage <= 1.0)) throw DomainError("activity band: coverage must be in (0, 1]");
  }
};

using ReactionTypeSet = std::set<ReactionType>;

inline ReactionTypeSet default_negative_types() { return {ReactionType::Angry, ReactionType::Sad}; }

inline ReactionDataset drop_negative(const ReactionDataset& reactions, const ReactionTypeSet& negative_types) {
  if (negative_types.empty()) return reactions;
  return reactions.filtered([&](const Reaction& r) { return !negative_types.contains(r.type); });
}

using UserCounts = std::map<std::string, std::uint64_t>;

// A user's activity is the number of distinct businesses reacted to.
inline UserCounts user_reaction_counts(const ReactionDataset& reactions) {
  UserCounts counts;
  for (const auto& [user, businesses] : reactions.user_index()) counts.emplace(user, businesses.size());
  return counts;
}

// Smallest x such that the reactions of users with lower <= count <= x make up
// at least `coverage` of the reactions of users with count >= lower.
inline std::uint64_t compute_upper_bound(const UserCounts& reaction_counts, std::uint64_t lower, double coverage) {
  if (lower < 1) throw DomainError("compute_upper_bound: lower must be >= 1");
  if (!(coverage > 0.0 && coverage <= 1.0)) throw DomainError("compute_upper_bound: coverage must be in (0, 1]");
  std::map<std::uint64_t, std::uint64_t> mass;  // count value -> reactions at that value
  std::uint64_t total = 0;
  for (const auto& [user, c] : reaction_counts) {
    if (c < lower) continue;
    mass[c] += c;
    total += c;
  }
  if (total == 0) return lower;
  std::uint64_t acc = 0;
  for (const auto& [value, m] : mass) {
    acc += m;
    if (static_cast<long double>(acc) / static_cast<long double>(total) >= static_cast<long double>(coverage)) {
      return value;
    }
  }
  return mass.rbegin()->first;
}

// Removes users whose activity lies outside the band, with all their reactions.
inline ReactionDataset apply_band(const ReactionDataset& reactions, const ActivityBand& band) {
  band.validate();
  const auto counts = user_reaction_counts(reactions);
  return reactions.filtered([&](const Reaction& r) {
    const auto c = counts.at(r.user_id);
    return c >= band.lower && c <= band.upper;
  });
}

struct ReactionFilterConfig {
  std::uint64_t min_reactions = 3;
  double coverage = 0.999;
  ReactionTypeSet negative_types = default_negative_types();
};

struct ReactionFilterResult {
  ReactionDataset reactions;
  ActivityBand band;
  std::size_t negative_removed = 0;
  std::size_t users_before = 0;
  std::size_t users_removed = 0;
  std::size_t reactions_removed_by_band = 0;
};

// Negative removal first, then the activity band computed on what remains.
inline ReactionFilterResult filter_reactions(const ReactionDataset& reactions, const ReactionFilterConfig& config) {
  ReactionFilterResult out;
  auto positive = drop_negative(reactions, config.negative_types);
  out.negative_removed = reactions.size() - positive.size();
  out.band.lower = config.min_reactions;
  out.band.coverage = config.coverage;
  out.band.upper = compute_upper_bound(user_reaction_counts(positive), config.min_reactions, config.coverage);
  out.band.validate();
  out.reactions = apply_band(positive, out.band);
  out.users_before = positive.user_index().size();
  out.users_removed = out.users_before - out.reactions.user_index().size();
  out.reactions_removed_by_band = positive.size() - out.reactions.size();
  return out;
}

}  // namespace corelate
