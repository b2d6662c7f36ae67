#include "forumsim/metrics.hpp"

#include <algorithm>
#include <map>

#include "forumsim/errors.hpp"
#include "forumsim/orchestrator.hpp"

namespace forumsim {

std::optional<Stance> majority_stance(std::span<const Stance> stances) {
  if (stances.empty()) throw DomainError("majority of an empty stance list is undefined");
  std::array<int, 5> counts{};
  for (Stance s : stances) ++counts[index_of(s)];
  const int top = *std::max_element(counts.begin(), counts.end());
  if (std::count(counts.begin(), counts.end(), top) != 1) return std::nullopt;
  const auto idx = static_cast<std::size_t>(std::find(counts.begin(), counts.end(), top) - counts.begin());
  return kAllStances[idx];
}

bool is_conforming_change(Stance old_stance, Stance new_stance, std::optional<Stance> majority) {
  return majority && old_stance != new_stance &&
         stance_distance(new_stance, *majority) < stance_distance(old_stance, *majority);
}

ConformityResult conformity_rate(const Transcript& t, MajorityScope scope) {
  if (!t.complete()) {
    throw DomainError("conformity rate needs a complete transcript ('" + t.trial_id + "')");
  }
  std::map<std::string_view, std::size_t> slot;
  for (std::size_t i = 0; i < t.personas.size(); ++i) slot[t.personas[i].id] = i;

  std::vector<Stance> latest(t.personas.size(), Stance::Neutral);
  std::vector<Stance> group;
  group.reserve(t.personas.size());

  ConformityResult out;
  out.opportunities =
      static_cast<std::int64_t>(t.personas.size()) * static_cast<std::int64_t>(t.rounds_total - 1);

  for (const Post& p : t.posts) {
    const auto it = slot.find(p.author);
    if (it == slot.end()) throw DomainError("post by unknown author '" + p.author + "'");
    const std::size_t me = it->second;
    if (p.round >= 2) {
      group.clear();
      for (std::size_t j = 0; j < latest.size(); ++j) {
        if (scope == MajorityScope::Exclusive && j == me) continue;
        group.push_back(latest[j]);
      }
      const auto majority = majority_stance(group);
      const Stance old_stance = latest[me];
      const bool conforming = is_conforming_change(old_stance, p.declared_stance, majority);
      if (conforming) ++out.conforming_count;
      if (old_stance != p.declared_stance) {
        out.changes.push_back({p.author, p.round, old_stance, p.declared_stance, majority, conforming});
      }
    }
    latest[me] = p.declared_stance;
  }
  out.rate = Rational(out.conforming_count, out.opportunities);
  return out;
}

Rational polarization_index(const StanceDistribution& d) {
  std::int64_t weighted = 0;
  for (Stance s : kAllStances) weighted += std::abs(value(s)) * d.count(s);
  return Rational(weighted, d.total());
}

PolarizationChange polarization_change(std::span<const Rational> series) {
  if (series.size() < 2) {
    throw DomainError("polarization change needs at least two rounds, got " +
                      std::to_string(series.size()));
  }
  const Rational delta = series.back() - series.front();
  return {delta, abs(delta)};
}

Rational fragmentation_index(const StanceDistribution& d) {
  const std::int64_t support = d.count(Stance::Support) + d.count(Stance::StronglySupport);
  const std::int64_t oppose = d.count(Stance::Oppose) + d.count(Stance::StronglyOppose);
  if (support + oppose == 0) return Rational(0);
  return Rational(1) - Rational(std::abs(support - oppose), support + oppose);
}

TrialMetrics compute_trial_metrics(const Transcript& t, MajorityScope scope) {
  const auto summaries = round_summaries(t);
  const auto cr = conformity_rate(t, scope);

  TrialMetrics m;
  m.opportunities = cr.opportunities;
  m.conforming_count = cr.conforming_count;
  m.conformity_rate = cr.rate;
  for (const auto& s : summaries) {
    m.polarization_series.push_back(polarization_index(s.distribution));
    m.fragmentation_series.push_back(fragmentation_index(s.distribution));
  }
  const auto dp = polarization_change(m.polarization_series);
  m.delta_p_signed = dp.signed_change;
  m.delta_p_abs = dp.abs_change;
  m.fallback_stance_count = std::count_if(t.posts.begin(), t.posts.end(), [](const Post& p) {
    return p.stance_source == StanceSource::FallbackPrevious;
  });
  return m;
}

}  // namespace forumsim
