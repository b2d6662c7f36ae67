#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "forumsim/rational.hpp"
#include "forumsim/types.hpp"

namespace forumsim {

/// Whose stances form the group when the majority is taken for a post.
enum class MajorityScope {
  Inclusive,  ///< every agent's latest stance, the actor's previous one included
  Exclusive,  ///< everyone except the acting agent
};

/// Unique mode of `stances`; nullopt when two or more stances share the
/// maximal count. Throws DomainError on empty input.
std::optional<Stance> majority_stance(std::span<const Stance> stances);

/// A change conforms when it strictly reduces the distance to an existing
/// majority.
bool is_conforming_change(Stance old_stance, Stance new_stance, std::optional<Stance> majority);

struct StanceChangeEvent {
  std::string agent;
  int round = 0;
  Stance old_stance = Stance::Neutral;
  Stance new_stance = Stance::Neutral;
  std::optional<Stance> majority_at_event;
  bool conforming = false;

  bool operator==(const StanceChangeEvent&) const = default;
};

struct ConformityResult {
  std::int64_t opportunities = 0;
  std::int64_t conforming_count = 0;
  Rational rate;
  /// Only opportunities where the stance actually moved.
  std::vector<StanceChangeEvent> changes;
};

/// Conformity rate over every (agent, round >= 2) slot of a complete
/// transcript. The majority is recomputed right before each post from the
/// latest declared stances.
ConformityResult conformity_rate(const Transcript& t, MajorityScope scope = MajorityScope::Inclusive);

/// Expected absolute stance, in [0, 2].
Rational polarization_index(const StanceDistribution& d);

struct PolarizationChange {
  Rational signed_change;
  Rational abs_change;

  bool operator==(const PolarizationChange&) const = default;
};

/// Last minus first. Throws DomainError for fewer than two entries.
PolarizationChange polarization_change(std::span<const Rational> series);

/// 1 - |S - O| / (S + O) with S = p(+1) + p(+2), O = p(-1) + p(-2); 0 when
/// nobody holds a non-neutral stance.
Rational fragmentation_index(const StanceDistribution& d);

struct TrialMetrics {
  std::int64_t opportunities = 0;
  std::int64_t conforming_count = 0;
  Rational conformity_rate;
  std::vector<Rational> polarization_series;
  Rational delta_p_signed;
  Rational delta_p_abs;
  std::vector<Rational> fragmentation_series;
  std::int64_t fallback_stance_count = 0;

  bool operator==(const TrialMetrics&) const = default;
};

/// Throws DomainError unless `t` is complete.
TrialMetrics compute_trial_metrics(const Transcript& t,
                                   MajorityScope scope = MajorityScope::Inclusive);

}  // namespace forumsim
