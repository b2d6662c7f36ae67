#include "forumsim/types.hpp"

#include "forumsim/errors.hpp"

namespace forumsim {

std::string_view to_string(StanceSource s) noexcept {
  switch (s) {
    case StanceSource::Parsed: return "parsed";
    case StanceSource::FallbackPrevious: return "fallback_previous";
    case StanceSource::Scripted: return "scripted";
  }
  return "scripted";
}

std::optional<StanceSource> stance_source_from_string(std::string_view s) noexcept {
  if (s == "parsed") return StanceSource::Parsed;
  if (s == "fallback_previous") return StanceSource::FallbackPrevious;
  if (s == "scripted") return StanceSource::Scripted;
  return std::nullopt;
}

std::string topic_announcement(const Topic& topic) {
  return "Today's forum topic: " + topic.question;
}

std::array<Rational, 5> StanceDistribution::proportions() const {
  std::array<Rational, 5> out;
  for (Stance s : kAllStances) out[index_of(s)] = proportion(s);
  return out;
}

StanceDistribution distribution_from_stances(std::span<const Stance> stances) {
  if (stances.empty()) {
    throw DomainError("cannot build a stance distribution from an empty list");
  }
  StanceDistribution d;
  for (Stance s : stances) ++d.counts_[index_of(s)];
  d.total_ = static_cast<std::int64_t>(stances.size());
  return d;
}

}  // namespace forumsim
