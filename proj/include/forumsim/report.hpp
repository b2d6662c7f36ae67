#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forumsim/experiment.hpp"

namespace forumsim {

enum class ReportFormat : std::uint8_t { TableText, Csv, Json, Svg };

inline constexpr std::array<ReportFormat, 4> kAllReportFormats = {
    ReportFormat::TableText, ReportFormat::Csv, ReportFormat::Json, ReportFormat::Svg};

/// "txt"/"table_text", "csv", "json", "svg".
std::optional<ReportFormat> parse_report_format(std::string_view s);
std::string_view file_extension(ReportFormat f) noexcept;

/// Columns: trial_id, CR, P_1..P_R, delta_P_signed, delta_P_abs, F_1..F_R,
/// fallback_count, complete. One row per complete trial plus a final "mean"
/// row.
std::string render_csv(const ExperimentResult& r);
std::string render_text(const ExperimentResult& r, MajorityScope scope);
std::string render_json(const ExperimentResult& r, MajorityScope scope);
/// Stacked per-round stance proportions and per-trial conformity bars.
std::string render_svg(const ExperimentResult& r);

/// Writes `<out_dir>/report.<ext>` for each format; returns the paths.
/// Throws DomainError when no trial completed.
std::vector<std::filesystem::path> render_report(const ExperimentResult& r,
                                                 std::span<const ReportFormat> formats,
                                                 const std::filesystem::path& out_dir,
                                                 MajorityScope scope = MajorityScope::Inclusive);

/// Rebuilds an ExperimentResult from stored transcripts alone (warnings and
/// metrics recomputed). Trial order follows the input order.
ExperimentResult result_from_transcripts(std::vector<Transcript> transcripts, MajorityScope scope);

}  // namespace forumsim
