#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace forumsim {

/// Five-point ordinal opinion on the discussion topic.
enum class Stance : std::int8_t {
  StronglyOppose = -2,
  Oppose = -1,
  Neutral = 0,
  Support = 1,
  StronglySupport = 2,
};

inline constexpr std::array<Stance, 5> kAllStances = {
    Stance::StronglyOppose, Stance::Oppose, Stance::Neutral, Stance::Support,
    Stance::StronglySupport};

constexpr int value(Stance s) noexcept { return static_cast<int>(s); }

/// Position of the stance in kAllStances (0 for StronglyOppose .. 4).
constexpr std::size_t index_of(Stance s) noexcept {
  return static_cast<std::size_t>(value(s) + 2);
}

/// Throws DomainError for values outside [-2, 2].
Stance stance_from_value(int v);

/// Human label, e.g. "Strongly Support".
std::string_view label(Stance s) noexcept;

/// Enumerator-style name, e.g. "StronglySupport".
std::string_view name(Stance s) noexcept;

/// Accepts any label spelling: "Strongly Support", "strongly_support",
/// "STRONGLYSUPPORT", "strongly-support".
std::optional<Stance> parse_label(std::string_view text);

constexpr int stance_distance(Stance a, Stance b) noexcept {
  const int d = value(a) - value(b);
  return d < 0 ? -d : d;
}

constexpr Stance negate(Stance s) noexcept { return static_cast<Stance>(-value(s)); }

/// Moves `s` by `delta` levels, clamped to the scale.
constexpr Stance shift_clamped(Stance s, int delta) noexcept {
  int v = value(s) + delta;
  v = v < -2 ? -2 : (v > 2 ? 2 : v);
  return static_cast<Stance>(v);
}

}  // namespace forumsim
