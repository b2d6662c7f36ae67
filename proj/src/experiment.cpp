#include "forumsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include <omp.h>

#include "forumsim/errors.hpp"
#include "forumsim/llm_client.hpp"
#include "forumsim/rng.hpp"

namespace forumsim {

namespace {

SummaryStats summarize_values(std::vector<Rational> values) {
  // Sorted so the floating-point sum does not depend on trial order.
  std::sort(values.begin(), values.end());
  SummaryStats s;
  Rational sum(0);
  for (const auto& v : values) sum += v;
  s.mean = sum / static_cast<std::int64_t>(values.size());
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  if (values.size() > 1) {
    const double mean = to_double(s.mean);
    double ss = 0.0;
    for (const auto& v : values) {
      const double d = to_double(v) - mean;
      ss += d * d;
    }
    s.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

TrialConfig trial_config_for(const ExperimentConfig& cfg, std::size_t index) {
  TrialConfig t = cfg.trial;
  t.trial_id = trial_id_for(index, static_cast<std::size_t>(cfg.repetitions));
  t.seed = derive_trial_seed(cfg.master_seed, index);
  t.experiment = cfg.name;
  t.group_label = cfg.group_label;
  return t;
}

}  // namespace

std::vector<std::string> validate_experiment(const ExperimentConfig& cfg,
                                             const EndpointRegistry* endpoints) {
  auto problems = validate_trial_config(cfg.trial);
  if (cfg.name.empty()) problems.emplace_back("experiment name must be non-empty");
  if (cfg.repetitions < 1) problems.emplace_back("repetitions must be >= 1");
  if (cfg.parallelism < 1) problems.emplace_back("parallelism must be >= 1");
  if (cfg.retry_budget < 0) problems.emplace_back("retry_budget must be >= 0");
  for (const auto& [id, spec] : cfg.trial.backends) {
    if (const auto* b = std::get_if<LlmBinding>(&spec)) {
      if (!endpoints || !endpoints->find(b->endpoint)) {
        problems.push_back("persona '" + id + "' uses unknown endpoint '" + b->endpoint + "'");
      }
    }
  }
  return problems;
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t trial_index) {
  return derive_seed(master_seed, trial_index);
}

std::string trial_id_for(std::size_t index, std::size_t repetitions) {
  const std::size_t width = std::max<std::size_t>(3, std::to_string(repetitions > 0 ? repetitions - 1 : 0).size());
  std::string digits = std::to_string(index);
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  return "trial_" + digits;
}

ExperimentError::ExperimentError(ExperimentResult result)
    : std::runtime_error("all " + std::to_string(result.trials.size()) + " trials of experiment '" +
                         result.name + "' failed"),
      result_(std::move(result)) {}

TrialOutcome run_single_trial(const ExperimentConfig& cfg, std::size_t index,
                              const EndpointRegistry* endpoints) {
  const TrialConfig tcfg = trial_config_for(cfg, index);
  TrialOutcome out;
  for (int attempt = 0; attempt <= cfg.retry_budget; ++attempt) {
    try {
      TrialRun run = run_trial(tcfg, endpoints);
      out.transcript = std::move(run.transcript);
      out.warnings = std::move(run.warnings);
    } catch (const std::exception& e) {
      out.transcript = Transcript{};
      out.transcript.trial_id = tcfg.trial_id;
      out.transcript.topic = tcfg.topic;
      out.transcript.personas = tcfg.personas;
      out.transcript.rounds_total = tcfg.rounds_total;
      out.transcript.seed = tcfg.seed;
      out.transcript.experiment = tcfg.experiment;
      out.transcript.group_label = tcfg.group_label;
      out.transcript.abort_reason = e.what();
      out.warnings.clear();
    }
    out.transcript.attempts = attempt + 1;
    if (out.transcript.complete()) break;
  }
  if (out.transcript.complete()) {
    out.metrics = compute_trial_metrics(out.transcript, cfg.majority_scope);
  }
  return out;
}

std::vector<TrialOutcome> run_trials_serial(const ExperimentConfig& cfg,
                                            const EndpointRegistry* endpoints) {
  std::vector<TrialOutcome> out;
  out.reserve(static_cast<std::size_t>(cfg.repetitions));
  for (int i = 0; i < cfg.repetitions; ++i) {
    out.push_back(run_single_trial(cfg, static_cast<std::size_t>(i), endpoints));
  }
  return out;
}

std::vector<TrialOutcome> run_trials_parallel(const ExperimentConfig& cfg,
                                              const EndpointRegistry* endpoints) {
  const int n = cfg.repetitions;
  std::vector<TrialOutcome> out(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(cfg.parallelism, 1))
  for (int i = 0; i < n; ++i) {
    // run_single_trial turns trial failures into outcomes, so nothing escapes
    // the parallel region.
    out[static_cast<std::size_t>(i)] = run_single_trial(cfg, static_cast<std::size_t>(i), endpoints);
  }
  return out;
}

std::vector<std::optional<TrialMetrics>> compute_metrics_serial(std::span<const Transcript> transcripts,
                                                                MajorityScope scope) {
  std::vector<std::optional<TrialMetrics>> out;
  out.reserve(transcripts.size());
  for (const auto& t : transcripts) {
    out.push_back(t.complete() ? std::optional(compute_trial_metrics(t, scope)) : std::nullopt);
  }
  return out;
}

std::vector<std::optional<TrialMetrics>> compute_metrics_parallel(
    std::span<const Transcript> transcripts, MajorityScope scope, int threads) {
  const auto n = static_cast<std::int64_t>(transcripts.size());
  std::vector<std::optional<TrialMetrics>> out(transcripts.size());
  std::vector<std::exception_ptr> errors(transcripts.size());
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      if (transcripts[k].complete()) out[k] = compute_trial_metrics(transcripts[k], scope);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<StanceProportions> aggregate_stance_timeseries(std::span<const Transcript> transcripts) {
  if (transcripts.empty()) return {};
  const int rounds = transcripts.front().rounds_total;
  std::vector<StanceProportions> sums(static_cast<std::size_t>(rounds));
  for (auto& row : sums) row.fill(Rational(0));

  for (const auto& t : transcripts) {
    if (t.rounds_total != rounds) {
      throw DomainError("cannot average stance series over different rounds_total (" +
                        std::to_string(rounds) + " vs " + std::to_string(t.rounds_total) + ")");
    }
    const auto summaries = round_summaries(t);
    for (const auto& s : summaries) {
      auto& row = sums[static_cast<std::size_t>(s.round - 1)];
      for (Stance st : kAllStances) row[index_of(st)] += s.distribution.proportion(st);
    }
  }
  const auto n = static_cast<std::int64_t>(transcripts.size());
  for (auto& row : sums) {
    for (auto& v : row) v /= n;
  }
  return sums;
}

ExperimentResult summarize(std::string name, std::string group_label, std::vector<TrialOutcome> trials) {
  ExperimentResult r;
  r.name = std::move(name);
  r.group_label = std::move(group_label);
  r.trials = std::move(trials);

  std::vector<Transcript> complete;
  std::vector<Rational> cr, dp_abs, dp_signed, f_final, p_final;
  std::int64_t conforming = 0;
  std::int64_t opportunities = 0;
  std::int64_t fallbacks = 0;
  for (const auto& t : r.trials) {
    if (!t.complete()) {
      ++r.incomplete_trial_count;
      continue;
    }
    const TrialMetrics& m = *t.metrics;
    complete.push_back(t.transcript);
    cr.push_back(m.conformity_rate);
    dp_abs.push_back(m.delta_p_abs);
    dp_signed.push_back(m.delta_p_signed);
    f_final.push_back(m.fragmentation_series.back());
    p_final.push_back(m.polarization_series.back());
    conforming += m.conforming_count;
    opportunities += m.opportunities;
    fallbacks += m.fallback_stance_count;
  }
  if (!r.trials.empty()) r.rounds_total = r.trials.front().transcript.rounds_total;
  if (complete.empty()) return r;

  Aggregates a;
  a.complete_trials = complete.size();
  a.conformity_rate = summarize_values(cr);
  a.pooled_conformity_rate = Rational(conforming, opportunities);
  a.delta_p_abs = summarize_values(dp_abs);
  a.delta_p_signed = summarize_values(dp_signed);
  a.fragmentation_final = summarize_values(f_final);
  a.polarization_final = summarize_values(p_final);
  a.fallback_stances = fallbacks;
  r.aggregates = a;
  r.rounds_total = complete.front().rounds_total;
  r.mean_stance_proportions = aggregate_stance_timeseries(complete);
  return r;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const EndpointRegistry* endpoints) {
  if (auto problems = validate_experiment(cfg, endpoints); !problems.empty()) {
    throw ConfigError(std::move(problems));
  }
  auto outcomes = cfg.parallelism > 1 ? run_trials_parallel(cfg, endpoints)
                                      : run_trials_serial(cfg, endpoints);
  auto result = summarize(cfg.name, cfg.group_label, std::move(outcomes));
  if (result.complete_trial_count() == 0) throw ExperimentError(std::move(result));
  return result;
}

}  // namespace forumsim
