#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forumsim/rational.hpp"
#include "forumsim/stance.hpp"

namespace forumsim {

struct Persona {
  std::string id;
  std::string display_name;
  std::string demographics;
  std::string communicative_style;
  Stance initial_stance = Stance::Neutral;
  std::string receptiveness;

  bool operator==(const Persona&) const = default;
};

struct Topic {
  std::string id;
  std::string question;

  bool operator==(const Topic&) const = default;
};

/// Citation of an earlier post, identified by (round, author).
struct Reference {
  int round = 0;
  std::string author;

  bool operator==(const Reference&) const = default;
};

enum class StanceSource : std::uint8_t { Parsed, FallbackPrevious, Scripted };

std::string_view to_string(StanceSource s) noexcept;
std::optional<StanceSource> stance_source_from_string(std::string_view s) noexcept;

struct Post {
  std::string trial_id;
  int round = 0;
  std::string author;
  /// Global position within the trial. The manager's announcement is 0, so
  /// posts start at 1.
  std::uint64_t sequence = 0;
  std::string body;
  Stance declared_stance = Stance::Neutral;
  std::vector<Reference> references;
  StanceSource stance_source = StanceSource::Scripted;

  bool operator==(const Post&) const = default;
};

/// Complete or partial log of one trial.
struct Transcript {
  std::string trial_id;
  Topic topic;
  std::vector<Persona> personas;
  int rounds_total = 5;
  std::vector<Post> posts;
  std::uint64_t seed = 0;
  std::string backend_descriptor;

  // Experiment context carried so reports can be rebuilt from transcripts.
  std::string experiment;
  std::string group_label;
  int attempts = 1;
  /// Set when the trial aborted; such transcripts are never complete.
  std::optional<std::string> abort_reason;

  std::size_t expected_post_count() const noexcept {
    return personas.size() * static_cast<std::size_t>(rounds_total);
  }
  bool complete() const noexcept {
    return !abort_reason && posts.size() == expected_post_count();
  }

  bool operator==(const Transcript&) const = default;
};

/// The manager's opening message (sequence 0 metadata, never a Post).
std::string topic_announcement(const Topic& topic);

/// Fraction of agents at each stance, kept as exact counts.
class StanceDistribution {
 public:
  StanceDistribution() = default;

  std::int64_t count(Stance s) const noexcept { return counts_[index_of(s)]; }
  std::int64_t total() const noexcept { return total_; }
  Rational proportion(Stance s) const { return Rational(count(s), total_); }
  std::array<Rational, 5> proportions() const;

  bool operator==(const StanceDistribution&) const = default;

 private:
  friend StanceDistribution distribution_from_stances(std::span<const Stance>);
  std::array<std::int64_t, 5> counts_{};
  std::int64_t total_ = 0;
};

/// Throws DomainError on an empty list.
StanceDistribution distribution_from_stances(std::span<const Stance> stances);

}  // namespace forumsim
