#include "forumsim/stance.hpp"

#include <cctype>
#include <string>

#include "forumsim/errors.hpp"

namespace forumsim {

Stance stance_from_value(int v) {
  if (v < -2 || v > 2) {
    throw DomainError("stance value " + std::to_string(v) + " is outside the scale [-2, +2]");
  }
  return static_cast<Stance>(v);
}

std::string_view label(Stance s) noexcept {
  switch (s) {
    case Stance::StronglyOppose: return "Strongly Oppose";
    case Stance::Oppose: return "Oppose";
    case Stance::Neutral: return "Neutral";
    case Stance::Support: return "Support";
    case Stance::StronglySupport: return "Strongly Support";
  }
  return "Neutral";
}

std::string_view name(Stance s) noexcept {
  switch (s) {
    case Stance::StronglyOppose: return "StronglyOppose";
    case Stance::Oppose: return "Oppose";
    case Stance::Neutral: return "Neutral";
    case Stance::Support: return "Support";
    case Stance::StronglySupport: return "StronglySupport";
  }
  return "Neutral";
}

std::optional<Stance> parse_label(std::string_view text) {
  std::string folded;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      folded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (c != ' ' && c != '_' && c != '-' && c != '\t') {
      return std::nullopt;
    }
  }
  if (folded == "stronglyoppose") return Stance::StronglyOppose;
  if (folded == "oppose") return Stance::Oppose;
  if (folded == "neutral") return Stance::Neutral;
  if (folded == "support") return Stance::Support;
  if (folded == "stronglysupport") return Stance::StronglySupport;
  return std::nullopt;
}

}  // namespace forumsim
