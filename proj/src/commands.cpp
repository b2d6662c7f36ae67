#include "forumsim/commands.hpp"

#include <ostream>

#include "forumsim/config.hpp"
#include "forumsim/errors.hpp"
#include "forumsim/persistence.hpp"

namespace forumsim::cli {

namespace fs = std::filesystem;

namespace {

std::string red(const Io& io, std::string_view s) {
  return io.color ? "\x1b[31m" + std::string(s) + "\x1b[0m" : std::string(s);
}

void print_problems(const Io& io, const ConfigError& e) {
  io.err << red(io, "error:") << " invalid configuration (" << e.problems().size() << " problem"
         << (e.problems().size() == 1 ? "" : "s") << ")\n";
  for (const auto& p : e.problems()) io.err << "  - " << p << "\n";
}

/// Analysis options for analyze/report: only majority_scope is meaningful.
std::optional<MajorityScope> analysis_scope(std::span<const std::string> overrides, const Io& io) {
  MajorityScope scope = MajorityScope::Inclusive;
  for (const auto& o : overrides) {
    if (o == "majority_scope=inclusive") {
      scope = MajorityScope::Inclusive;
    } else if (o == "majority_scope=exclusive") {
      scope = MajorityScope::Exclusive;
    } else {
      io.err << red(io, "error:") << " override '" << o
             << "' is not supported here (only majority_scope=inclusive|exclusive)\n";
      return std::nullopt;
    }
  }
  return scope;
}

bool has_transcripts(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return false;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".jsonl") return true;
  }
  return false;
}

void persist(const ExperimentResult& result, const fs::path& out_dir) {
  for (const auto& t : result.trials) {
    write_transcript(t.transcript, out_dir / (t.transcript.trial_id + ".jsonl"));
  }
}

void print_warnings(const ExperimentResult& result, const Io& io) {
  std::size_t total = 0;
  for (const auto& t : result.trials) total += t.warnings.size();
  if (total == 0) return;
  io.err << "warning: " << total << " structural warning" << (total == 1 ? "" : "s")
         << " across trials\n";
  if (io.verbosity < 1) return;
  for (const auto& t : result.trials) {
    for (const auto& w : t.warnings) {
      io.err << "  " << t.transcript.trial_id << " round " << w.round << " " << w.agent << ": "
             << to_string(w.kind) << " (" << w.detail << ")\n";
    }
  }
}

std::optional<ExperimentResult> load_result(const fs::path& dir, MajorityScope scope, const Io& io) {
  TranscriptLoad load;
  try {
    load = read_transcript_dir(dir);
  } catch (const IoError& e) {
    io.err << red(io, "error:") << " " << e.what() << "\n";
    return std::nullopt;
  }
  for (const auto& [path, why] : load.failures) {
    io.err << "warning: skipping unreadable transcript " << path.string() << ": " << why << "\n";
  }
  if (load.transcripts.empty()) {
    io.err << red(io, "error:") << " no readable transcripts in " << dir.string() << "\n";
    return std::nullopt;
  }
  try {
    return result_from_transcripts(std::move(load.transcripts), scope);
  } catch (const DomainError& e) {
    io.err << red(io, "error:") << " " << e.what() << "\n";
    return std::nullopt;
  }
}

}  // namespace

int cmd_run(const fs::path& config_path, const fs::path& out_dir, std::span<const std::string> overrides,
            const Io& io) {
  ExperimentSetup setup;
  try {
    setup = load_setup(config_path, overrides);
  } catch (const ConfigError& e) {
    print_problems(io, e);
    return kExitConfigError;
  }
  if (has_transcripts(out_dir)) {
    io.err << red(io, "error:") << " " << out_dir.string()
           << " already holds transcripts; choose an empty output directory\n";
    return kExitConfigError;
  }

  const auto registry = make_registry(setup);
  const ExperimentConfig& cfg = setup.experiment;
  if (io.verbosity > 0) {
    io.err << "running '" << cfg.name << "': " << cfg.repetitions << " trials, "
           << cfg.trial.personas.size() << " agents, " << cfg.trial.rounds_total << " rounds, "
           << cfg.parallelism << " thread(s)\n";
  }

  ExperimentResult result;
  int status = kExitOk;
  try {
    result = run_experiment(cfg, &registry);
  } catch (const ConfigError& e) {
    print_problems(io, e);
    return kExitConfigError;
  } catch (const ExperimentError& e) {
    result = e.result();
    status = kExitAllTrialsFailed;
  }

  try {
    persist(result, out_dir);
    if (status == kExitOk) render_report(result, kAllReportFormats, out_dir, cfg.majority_scope);
  } catch (const IoError& e) {
    io.err << red(io, "error:") << " " << e.what() << "\n";
    return kExitConfigError;
  }

  for (const auto& t : result.trials) {
    if (t.transcript.attempts > 1) {
      io.err << "note: " << t.transcript.trial_id << " needed " << t.transcript.attempts << " attempts\n";
    }
    if (!t.complete()) {
      io.err << "warning: " << t.transcript.trial_id << " incomplete: "
             << t.transcript.abort_reason.value_or("missing posts") << "\n";
    }
  }
  print_warnings(result, io);

  if (status == kExitAllTrialsFailed) {
    io.err << red(io, "error:") << " all " << result.trials.size()
           << " trials failed; partial transcripts written to " << out_dir.string() << "\n";
    return status;
  }
  io.out << render_text(result, cfg.majority_scope);
  return kExitOk;
}

int cmd_analyze(const fs::path& transcript_dir, const fs::path& out_dir,
                std::span<const std::string> overrides, const Io& io) {
  const auto scope = analysis_scope(overrides, io);
  if (!scope) return kExitConfigError;
  auto result = load_result(transcript_dir, *scope, io);
  if (!result) return kExitConfigError;
  if (result->complete_trial_count() == 0) {
    io.err << red(io, "error:") << " no complete transcripts to analyze\n";
    return kExitAllTrialsFailed;
  }
  try {
    render_report(*result, kAllReportFormats, out_dir, *scope);
  } catch (const IoError& e) {
    io.err << red(io, "error:") << " " << e.what() << "\n";
    return kExitConfigError;
  }
  print_warnings(*result, io);
  io.out << render_text(*result, *scope);
  return kExitOk;
}

int cmd_report(const fs::path& transcript_dir, const fs::path& out_dir,
               std::span<const ReportFormat> formats, std::span<const std::string> overrides,
               const Io& io) {
  const auto scope = analysis_scope(overrides, io);
  if (!scope) return kExitConfigError;
  auto result = load_result(transcript_dir, *scope, io);
  if (!result) return kExitConfigError;
  if (result->complete_trial_count() == 0) {
    io.err << red(io, "error:") << " no complete transcripts to report on\n";
    return kExitAllTrialsFailed;
  }
  try {
    for (const auto& path : render_report(*result, formats, out_dir, *scope)) {
      io.out << path.string() << "\n";
    }
  } catch (const IoError& e) {
    io.err << red(io, "error:") << " " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitOk;
}

int cmd_validate_config(const fs::path& config_path, std::span<const std::string> overrides, bool probe,
                        const Io& io) {
  ExperimentSetup setup;
  try {
    setup = load_setup(config_path, overrides);
  } catch (const ConfigError& e) {
    print_problems(io, e);
    return kExitConfigError;
  }

  if (probe) {
    std::vector<std::string> problems;
    const auto registry = make_registry(setup);
    for (const auto& [name, ep] : setup.endpoints) {
      auto client = registry.find(name);
      if (!client) continue;
      EndpointConfig quick = ep;
      quick.max_retries = 0;
      quick.max_tokens = 8;
      try {
        const std::vector<ChatMessage> ping = {{Role::User, "Reply with the single word: ok"}};
        chat_complete(quick, ping);
        io.out << "endpoint '" << name << "' reachable\n";
      } catch (const std::exception& e) {
        problems.push_back("endpoint '" + name + "' unreachable: " + e.what());
      }
    }
    if (!problems.empty()) {
      print_problems(io, ConfigError(std::move(problems)));
      return kExitConfigError;
    }
  }

  const auto& e = setup.experiment;
  io.out << "config ok: '" << e.name << "', " << e.trial.personas.size() << " personas, "
         << e.trial.rounds_total << " rounds, " << e.repetitions << " repetitions\n";
  return kExitOk;
}

int cmd_personas(const Io& io) {
  io.out << default_personas_document().dump(2) << "\n";
  return kExitOk;
}

}  // namespace forumsim::cli
