#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>

#include "forumsim/commands.hpp"
#include "forumsim/config.hpp"

namespace {

bool stderr_wants_color() {
  const char* no_color = std::getenv("NO_COLOR");
  return (no_color == nullptr || *no_color == '\0') && ::isatty(STDERR_FILENO);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace forumsim;

  CLI::App app{"forumsim: round-robin forum simulations with conformity, polarization and fragmentation metrics"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v", verbosity, "More diagnostics on stderr (-vv for even more)");

  std::string config_path;
  std::string out_dir;
  std::string in_dir;
  std::vector<std::string> overrides;
  std::vector<std::string> formats;
  bool probe = false;

  auto* run = app.add_subcommand("run", "Run an experiment, persist transcripts and reports");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Experiment output directory (default: runs/<name>)");
  run->add_option("--set", overrides, "Override a documented key, key=value (repeatable)");

  auto* analyze = app.add_subcommand("analyze", "Recompute metrics and reports from stored transcripts");
  analyze->add_option("dir", in_dir, "Directory of <trial_id>.jsonl transcripts")->required();
  analyze->add_option("--out", out_dir, "Where to write report.* (default: the transcript directory)");
  analyze->add_option("--set", overrides, "majority_scope=inclusive|exclusive");

  auto* report = app.add_subcommand("report", "Render selected report formats from stored transcripts");
  report->add_option("dir", in_dir, "Directory of <trial_id>.jsonl transcripts")->required();
  report->add_option("--out", out_dir, "Where to write report.* (default: the transcript directory)");
  report->add_option("--format", formats, "txt, csv, json, svg (repeatable; default all)")->delimiter(',');
  report->add_option("--set", overrides, "majority_scope=inclusive|exclusive");

  auto* validate = app.add_subcommand("validate-config", "Check a config and list every problem");
  validate->add_option("--config", config_path, "Experiment config (JSON)")->required();
  validate->add_option("--set", overrides, "Override a documented key, key=value (repeatable)");
  validate->add_flag("--probe", probe, "Also send one small request to each endpoint in use");

  auto* personas = app.add_subcommand("personas", "Print the built-in default persona set");

  CLI11_PARSE(app, argc, argv);

  const cli::Io io{std::cout, std::cerr, verbosity, stderr_wants_color()};

  if (run->parsed()) {
    if (out_dir.empty()) {
      // Default needs the experiment name, so peek at the config first.
      try {
        out_dir = "runs/" + load_setup(config_path, overrides).experiment.name;
      } catch (const std::exception&) {
        out_dir = "runs/experiment";
      }
    }
    return cli::cmd_run(config_path, out_dir, overrides, io);
  }
  if (analyze->parsed()) {
    return cli::cmd_analyze(in_dir, out_dir.empty() ? in_dir : out_dir, overrides, io);
  }
  if (report->parsed()) {
    std::vector<ReportFormat> selected;
    for (const auto& f : formats) {
      auto parsed = parse_report_format(f);
      if (!parsed) {
        std::cerr << "error: unknown report format '" << f << "'\n";
        return cli::kExitConfigError;
      }
      selected.push_back(*parsed);
    }
    if (selected.empty()) selected.assign(kAllReportFormats.begin(), kAllReportFormats.end());
    return cli::cmd_report(in_dir, out_dir.empty() ? in_dir : out_dir, selected, overrides, io);
  }
  if (validate->parsed()) return cli::cmd_validate_config(config_path, overrides, probe, io);
  if (personas->parsed()) return cli::cmd_personas(io);
  return cli::kExitConfigError;
}
