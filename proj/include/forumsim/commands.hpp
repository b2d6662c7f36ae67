#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "forumsim/report.hpp"

namespace forumsim::cli {

/// Stable exit-status contract.
enum ExitStatus : int {
  kExitOk = 0,
  kExitConfigError = 1,  ///< bad config / nothing readable / usage error
  kExitAllTrialsFailed = 2,
};

struct Io {
  std::ostream& out;
  std::ostream& err;
  int verbosity = 0;
  bool color = false;
};

/// Runs the experiment, writes `<out_dir>/<trial_id>.jsonl` for every trial
/// and `<out_dir>/report.{txt,csv,json,svg}`, prints the aggregate table.
int cmd_run(const std::filesystem::path& config_path, const std::filesystem::path& out_dir,
            std::span<const std::string> overrides, const Io& io);

/// Recomputes everything from the transcripts in `transcript_dir` and writes
/// all report formats to `out_dir`.
int cmd_analyze(const std::filesystem::path& transcript_dir, const std::filesystem::path& out_dir,
                std::span<const std::string> overrides, const Io& io);

/// Like analyze, but only the requested formats and no table on stdout.
int cmd_report(const std::filesystem::path& transcript_dir, const std::filesystem::path& out_dir,
               std::span<const ReportFormat> formats, std::span<const std::string> overrides,
               const Io& io);

/// Lists every problem. With `probe`, also sends one tiny request to each
/// endpoint the personas use.
int cmd_validate_config(const std::filesystem::path& config_path, std::span<const std::string> overrides,
                        bool probe, const Io& io);

/// Prints the default persona set as an editable config fragment.
int cmd_personas(const Io& io);

}  // namespace forumsim::cli
