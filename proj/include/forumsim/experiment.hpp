#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "forumsim/metrics.hpp"
#include "forumsim/orchestrator.hpp"
#include "forumsim/types.hpp"

namespace forumsim {

class EndpointRegistry;

struct ExperimentConfig {
  std::string name = "experiment";
  /// Template; trial_id and seed are filled in per repetition.
  TrialConfig trial;
  int repetitions = 25;
  std::uint64_t master_seed = 0;
  int parallelism = 1;
  std::string group_label;
  /// Extra attempts for a trial whose backend failed (same seed).
  int retry_budget = 0;
  MajorityScope majority_scope = MajorityScope::Inclusive;
};

std::vector<std::string> validate_experiment(const ExperimentConfig& cfg,
                                             const EndpointRegistry* endpoints = nullptr);

/// splitmix64_mix(master_seed ^ (trial_index * 0x9E3779B97F4A7C15)).
/// Published and stable: transcripts can be regenerated from the master seed.
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index);

/// "trial_007"; zero padded to at least three digits.
std::string trial_id_for(std::size_t index, std::size_t repetitions);

struct TrialOutcome {
  Transcript transcript;
  std::vector<StructuralWarning> warnings;
  /// Present only for complete transcripts.
  std::optional<TrialMetrics> metrics;

  bool complete() const noexcept { return metrics.has_value(); }
};

struct SummaryStats {
  Rational mean;
  /// Sample standard deviation; 0 for a single value.
  double std_dev = 0.0;
  Rational min;
  Rational max;

  bool operator==(const SummaryStats&) const = default;
};

/// Computed over complete trials only.
struct Aggregates {
  std::size_t complete_trials = 0;
  SummaryStats conformity_rate;
  /// Total conforming changes over total opportunities.
  Rational pooled_conformity_rate;
  SummaryStats delta_p_abs;
  SummaryStats delta_p_signed;
  SummaryStats fragmentation_final;
  SummaryStats polarization_final;
  std::int64_t fallback_stances = 0;

  bool operator==(const Aggregates&) const = default;
};

using StanceProportions = std::array<Rational, 5>;

struct ExperimentResult {
  std::string name;
  std::string group_label;
  int rounds_total = 0;
  /// In trial-index order.
  std::vector<TrialOutcome> trials;
  std::optional<Aggregates> aggregates;
  /// Per round, mean over complete trials of each stance's proportion.
  std::vector<StanceProportions> mean_stance_proportions;
  std::size_t incomplete_trial_count = 0;

  std::size_t complete_trial_count() const noexcept { return trials.size() - incomplete_trial_count; }
};

/// Every trial failed. The result (with all partial transcripts) is attached
/// so it can still be persisted.
class ExperimentError : public std::runtime_error {
 public:
  explicit ExperimentError(ExperimentResult result);
  const ExperimentResult& result() const noexcept { return result_; }

 private:
  ExperimentResult result_;
};

/// Runs repetition `index` (with retries) in isolation.
TrialOutcome run_single_trial(const ExperimentConfig& cfg, std::size_t index,
                              const EndpointRegistry* endpoints);

/// Reference path: trials one after another in index order.
std::vector<TrialOutcome> run_trials_serial(const ExperimentConfig& cfg,
                                            const EndpointRegistry* endpoints);

/// OpenMP over trials, `cfg.parallelism` threads. Output is in index order and
/// identical to the serial path.
std::vector<TrialOutcome> run_trials_parallel(const ExperimentConfig& cfg,
                                              const EndpointRegistry* endpoints);

/// Metrics for each complete transcript (nullopt for incomplete ones).
std::vector<std::optional<TrialMetrics>> compute_metrics_serial(std::span<const Transcript> transcripts,
                                                                MajorityScope scope);
std::vector<std::optional<TrialMetrics>> compute_metrics_parallel(
    std::span<const Transcript> transcripts, MajorityScope scope, int threads);

/// Mean p_r(s) over trials. All transcripts must be complete with equal
/// rounds_total (DomainError otherwise).
std::vector<StanceProportions> aggregate_stance_timeseries(std::span<const Transcript> transcripts);

/// Deterministic reduce in trial-index order.
ExperimentResult summarize(std::string name, std::string group_label, std::vector<TrialOutcome> trials);

/// Validates, runs every repetition, aggregates. Throws ConfigError before
/// any trial when the config is invalid and ExperimentError when no trial
/// completed.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const EndpointRegistry* endpoints = nullptr);

}  // namespace forumsim
