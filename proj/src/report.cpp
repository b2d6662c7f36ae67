#include "forumsim/report.hpp"

#include <cstdio>
#include <functional>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "forumsim/errors.hpp"
#include "forumsim/persistence.hpp"

namespace forumsim {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kPalette = {"#b2182b", "#ef8a62", "#bababa", "#67a9cf",
                                                      "#2166ac"};

std::string dec(const Rational& r) { return format_decimal(r); }
std::string dec(double d) { return format_decimal(d); }

ojson exact(const Rational& r) {
  return ojson{{"num", r.numerator()}, {"den", r.denominator()}, {"decimal", dec(r)}};
}

ojson stats_json(const SummaryStats& s) {
  return ojson{{"mean", exact(s.mean)}, {"std_dev", dec(s.std_dev)}, {"min", exact(s.min)},
               {"max", exact(s.max)}};
}

std::string_view scope_name(MajorityScope s) {
  return s == MajorityScope::Inclusive ? "inclusive" : "exclusive";
}

std::vector<const TrialOutcome*> complete_trials(const ExperimentResult& r) {
  std::vector<const TrialOutcome*> out;
  for (const auto& t : r.trials) {
    if (t.complete()) out.push_back(&t);
  }
  return out;
}

void require_complete(const ExperimentResult& r) {
  if (!r.aggregates || r.complete_trial_count() == 0) {
    throw DomainError("cannot render a report for experiment '" + r.name + "': no complete trials");
  }
}

Rational mean_of(const std::vector<const TrialOutcome*>& trials,
                 const std::function<Rational(const TrialMetrics&)>& pick) {
  Rational sum(0);
  for (const auto* t : trials) sum += pick(*t->metrics);
  return sum / static_cast<std::int64_t>(trials.size());
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string px(double v) { return format_decimal(v, 2); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "txt" || s == "table_text" || s == "text") return ReportFormat::TableText;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  if (s == "svg") return ReportFormat::Svg;
  return std::nullopt;
}

std::string_view file_extension(ReportFormat f) noexcept {
  switch (f) {
    case ReportFormat::TableText: return "txt";
    case ReportFormat::Csv: return "csv";
    case ReportFormat::Json: return "json";
    case ReportFormat::Svg: return "svg";
  }
  return "txt";
}

std::string render_csv(const ExperimentResult& r) {
  require_complete(r);
  const auto trials = complete_trials(r);
  const int rounds = r.rounds_total;
  std::ostringstream out;

  out << "trial_id,CR";
  for (int k = 1; k <= rounds; ++k) out << ",P_" << k;
  out << ",delta_P_signed,delta_P_abs";
  for (int k = 1; k <= rounds; ++k) out << ",F_" << k;
  out << ",fallback_count,complete\n";

  for (const auto* t : trials) {
    const TrialMetrics& m = *t->metrics;
    out << t->transcript.trial_id << ',' << dec(m.conformity_rate);
    for (const auto& p : m.polarization_series) out << ',' << dec(p);
    out << ',' << dec(m.delta_p_signed) << ',' << dec(m.delta_p_abs);
    for (const auto& f : m.fragmentation_series) out << ',' << dec(f);
    out << ',' << m.fallback_stance_count << ",true\n";
  }

  out << "mean," << dec(mean_of(trials, [](const TrialMetrics& m) { return m.conformity_rate; }));
  for (int k = 0; k < rounds; ++k) {
    out << ',' << dec(mean_of(trials, [k](const TrialMetrics& m) { return m.polarization_series[k]; }));
  }
  out << ',' << dec(mean_of(trials, [](const TrialMetrics& m) { return m.delta_p_signed; }));
  out << ',' << dec(mean_of(trials, [](const TrialMetrics& m) { return m.delta_p_abs; }));
  for (int k = 0; k < rounds; ++k) {
    out << ',' << dec(mean_of(trials, [k](const TrialMetrics& m) { return m.fragmentation_series[k]; }));
  }
  out << ','
      << dec(mean_of(trials, [](const TrialMetrics& m) { return Rational(m.fallback_stance_count); }))
      << ',' << trials.size() << '\n';
  return out.str();
}

std::string render_text(const ExperimentResult& r, MajorityScope scope) {
  require_complete(r);
  const Aggregates& a = *r.aggregates;
  std::ostringstream out;
  out << "Experiment: " << r.name;
  if (!r.group_label.empty()) out << " (group " << r.group_label << ")";
  out << "\nTrials: " << r.complete_trial_count() << " complete, " << r.incomplete_trial_count
      << " incomplete\nMajority scope: " << scope_name(scope) << "\n\n";

  out << pad("metric", 16, true) << pad("mean", 10) << pad("std", 10) << pad("min", 10)
      << pad("max", 10) << "\n";
  auto row = [&](std::string_view name, const SummaryStats& s) {
    out << pad(std::string(name), 16, true) << pad(dec(s.mean), 10) << pad(dec(s.std_dev), 10)
        << pad(dec(s.min), 10) << pad(dec(s.max), 10) << "\n";
  };
  row("CR", a.conformity_rate);
  row("|dP|", a.delta_p_abs);
  row("dP (signed)", a.delta_p_signed);
  row("F_final", a.fragmentation_final);
  row("P_final", a.polarization_final);
  out << "\nPooled CR: " << dec(a.pooled_conformity_rate) << " ("
      << a.pooled_conformity_rate.numerator() << "/" << a.pooled_conformity_rate.denominator()
      << ")\nStance fallbacks: " << a.fallback_stances << "\n\n";

  out << "Mean stance proportions per round\n" << pad("round", 6, true);
  for (Stance s : kAllStances) out << pad(std::string(name(s)), 17);
  out << "\n";
  for (std::size_t k = 0; k < r.mean_stance_proportions.size(); ++k) {
    out << pad(std::to_string(k + 1), 6, true);
    for (const auto& v : r.mean_stance_proportions[k]) out << pad(dec(v), 17);
    out << "\n";
  }

  out << "\nPer trial\n"
      << pad("trial_id", 12, true) << pad("CR", 9) << pad("P_1", 9) << pad("P_final", 9)
      << pad("|dP|", 9) << pad("F_final", 9) << pad("fallback", 10) << "  status\n";
  for (const auto& t : r.trials) {
    out << pad(t.transcript.trial_id, 12, true);
    if (t.complete()) {
      const TrialMetrics& m = *t.metrics;
      out << pad(dec(m.conformity_rate), 9) << pad(dec(m.polarization_series.front()), 9)
          << pad(dec(m.polarization_series.back()), 9) << pad(dec(m.delta_p_abs), 9)
          << pad(dec(m.fragmentation_series.back()), 9) << pad(std::to_string(m.fallback_stance_count), 10)
          << "  complete\n";
    } else {
      out << "  incomplete: " << t.transcript.abort_reason.value_or("missing posts") << "\n";
    }
  }
  return out.str();
}

std::string render_json(const ExperimentResult& r, MajorityScope scope) {
  require_complete(r);
  const Aggregates& a = *r.aggregates;
  ojson doc;
  doc["experiment"] = r.name;
  doc["group_label"] = r.group_label;
  doc["rounds_total"] = r.rounds_total;
  doc["majority_scope"] = scope_name(scope);
  doc["complete_trials"] = r.complete_trial_count();
  doc["incomplete_trials"] = r.incomplete_trial_count;

  ojson agg;
  agg["conformity_rate"] = stats_json(a.conformity_rate);
  agg["pooled_conformity_rate"] = exact(a.pooled_conformity_rate);
  agg["delta_P_abs"] = stats_json(a.delta_p_abs);
  agg["delta_P_signed"] = stats_json(a.delta_p_signed);
  agg["F_final"] = stats_json(a.fragmentation_final);
  agg["P_final"] = stats_json(a.polarization_final);
  agg["fallback_stances"] = a.fallback_stances;
  doc["aggregates"] = std::move(agg);

  auto& series = doc["mean_stance_proportions"] = ojson::array();
  for (std::size_t k = 0; k < r.mean_stance_proportions.size(); ++k) {
    ojson row;
    row["round"] = k + 1;
    for (Stance s : kAllStances) row[std::string(name(s))] = exact(r.mean_stance_proportions[k][index_of(s)]);
    series.push_back(std::move(row));
  }

  auto& trials = doc["trials"] = ojson::array();
  for (const auto& t : r.trials) {
    ojson jt;
    jt["trial_id"] = t.transcript.trial_id;
    jt["seed"] = t.transcript.seed;
    jt["attempts"] = t.transcript.attempts;
    jt["complete"] = t.complete();
    jt["warnings"] = t.warnings.size();
    if (t.complete()) {
      const TrialMetrics& m = *t.metrics;
      jt["opportunities"] = m.opportunities;
      jt["conforming_changes"] = m.conforming_count;
      jt["CR"] = exact(m.conformity_rate);
      auto& ps = jt["P"] = ojson::array();
      for (const auto& p : m.polarization_series) ps.push_back(exact(p));
      jt["delta_P_signed"] = exact(m.delta_p_signed);
      jt["delta_P_abs"] = exact(m.delta_p_abs);
      auto& fs_ = jt["F"] = ojson::array();
      for (const auto& f : m.fragmentation_series) fs_.push_back(exact(f));
      jt["fallback_count"] = m.fallback_stance_count;
    } else {
      jt["abort_reason"] = t.transcript.abort_reason ? ojson(*t.transcript.abort_reason) : ojson(nullptr);
    }
    trials.push_back(std::move(jt));
  }
  return doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string render_svg(const ExperimentResult& r) {
  require_complete(r);
  const auto trials = complete_trials(r);
  const std::size_t rounds = r.mean_stance_proportions.size();

  constexpr double kWidth = 760;
  constexpr double kPanelTop = 60;
  constexpr double kPanelHeight = 240;
  constexpr double kLeft = 60;
  constexpr double kPanelWidth = 300;
  constexpr double kGap = 80;

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << px(kWidth) << "\" height=\"420.00\" "
    << "font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect x=\"0\" y=\"0\" width=\"" << px(kWidth) << "\" height=\"420.00\" fill=\"#ffffff\"/>\n";
  o << "<text x=\"" << px(kLeft) << "\" y=\"24.00\" font-size=\"14\">" << xml_escape(r.name)
    << (r.group_label.empty() ? "" : " (group " + xml_escape(r.group_label) + ")") << "</text>\n";

  // Stance proportions per round, stacked from Strongly Oppose at the bottom.
  o << "<g id=\"stance-proportions\">\n";
  o << "<text x=\"" << px(kLeft) << "\" y=\"" << px(kPanelTop - 10)
    << "\">Mean stance proportions per round</text>\n";
  const double slot = kPanelWidth / static_cast<double>(std::max<std::size_t>(rounds, 1));
  const double bar = slot * 0.7;
  for (std::size_t k = 0; k < rounds; ++k) {
    double y = kPanelTop + kPanelHeight;
    const double x = kLeft + static_cast<double>(k) * slot + (slot - bar) / 2;
    o << "<g class=\"round-bar\" data-round=\"" << (k + 1) << "\">\n";
    for (Stance s : kAllStances) {
      const double h = to_double(r.mean_stance_proportions[k][index_of(s)]) * kPanelHeight;
      y -= h;
      o << "<rect x=\"" << px(x) << "\" y=\"" << px(y) << "\" width=\"" << px(bar) << "\" height=\""
        << px(h) << "\" fill=\"" << kPalette[index_of(s)] << "\"/>\n";
    }
    o << "<text x=\"" << px(x + bar / 2) << "\" y=\"" << px(kPanelTop + kPanelHeight + 14)
      << "\" text-anchor=\"middle\">R" << (k + 1) << "</text>\n";
    o << "</g>\n";
  }
  o << "<line x1=\"" << px(kLeft) << "\" y1=\"" << px(kPanelTop + kPanelHeight) << "\" x2=\""
    << px(kLeft + kPanelWidth) << "\" y2=\"" << px(kPanelTop + kPanelHeight) << "\" stroke=\"#000000\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = kPanelTop + kPanelHeight - kPanelHeight * tick / 4.0;
    o << "<text x=\"" << px(kLeft - 6) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">"
      << format_decimal(tick / 4.0, 2) << "</text>\n";
  }
  o << "</g>\n";

  // Legend.
  o << "<g id=\"legend\">\n";
  for (std::size_t i = 0; i < kAllStances.size(); ++i) {
    const double x = kLeft + static_cast<double>(i) * 130;
    o << "<rect x=\"" << px(x) << "\" y=\"360.00\" width=\"12.00\" height=\"12.00\" fill=\""
      << kPalette[i] << "\"/>\n";
    o << "<text x=\"" << px(x + 16) << "\" y=\"370.00\">" << label(kAllStances[i]) << "</text>\n";
  }
  o << "</g>\n";

  // Conformity rate per complete trial with the mean as a dashed line.
  const double cx = kLeft + kPanelWidth + kGap;
  o << "<g id=\"conformity-rates\">\n";
  o << "<text x=\"" << px(cx) << "\" y=\"" << px(kPanelTop - 10) << "\">Conformity rate per trial</text>\n";
  const double cslot = kPanelWidth / static_cast<double>(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const double h = to_double(trials[i]->metrics->conformity_rate) * kPanelHeight;
    o << "<rect x=\"" << px(cx + static_cast<double>(i) * cslot + cslot * 0.1) << "\" y=\""
      << px(kPanelTop + kPanelHeight - h) << "\" width=\"" << px(cslot * 0.8) << "\" height=\"" << px(h)
      << "\" fill=\"#4d4d4d\"><title>" << xml_escape(trials[i]->transcript.trial_id) << ": "
      << dec(trials[i]->metrics->conformity_rate) << "</title></rect>\n";
  }
  const double mean_y = kPanelTop + kPanelHeight - to_double(r.aggregates->conformity_rate.mean) * kPanelHeight;
  o << "<line x1=\"" << px(cx) << "\" y1=\"" << px(mean_y) << "\" x2=\"" << px(cx + kPanelWidth)
    << "\" y2=\"" << px(mean_y) << "\" stroke=\"#d6604d\" stroke-dasharray=\"4 3\"/>\n";
  o << "<text x=\"" << px(cx + kPanelWidth) << "\" y=\"" << px(mean_y - 4)
    << "\" text-anchor=\"end\">mean " << dec(r.aggregates->conformity_rate.mean) << "</text>\n";
  o << "<line x1=\"" << px(cx) << "\" y1=\"" << px(kPanelTop + kPanelHeight) << "\" x2=\""
    << px(cx + kPanelWidth) << "\" y2=\"" << px(kPanelTop + kPanelHeight) << "\" stroke=\"#000000\"/>\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double y = kPanelTop + kPanelHeight - kPanelHeight * tick / 4.0;
    o << "<text x=\"" << px(cx - 6) << "\" y=\"" << px(y + 4) << "\" text-anchor=\"end\">"
      << format_decimal(tick / 4.0, 2) << "</text>\n";
  }
  o << "</g>\n</svg>\n";
  return o.str();
}

std::vector<fs::path> render_report(const ExperimentResult& r, std::span<const ReportFormat> formats,
                                    const fs::path& out_dir, MajorityScope scope) {
  require_complete(r);
  std::vector<fs::path> written;
  for (ReportFormat f : formats) {
    std::string content;
    switch (f) {
      case ReportFormat::TableText: content = render_text(r, scope); break;
      case ReportFormat::Csv: content = render_csv(r); break;
      case ReportFormat::Json: content = render_json(r, scope); break;
      case ReportFormat::Svg: content = render_svg(r); break;
    }
    const fs::path path = out_dir / ("report." + std::string(file_extension(f)));
    write_file_atomic(path, content);
    written.push_back(path);
  }
  return written;
}

ExperimentResult result_from_transcripts(std::vector<Transcript> transcripts, MajorityScope scope) {
  std::string name;
  std::string group;
  if (!transcripts.empty()) {
    name = transcripts.front().experiment;
    group = transcripts.front().group_label;
  }
  std::vector<TrialOutcome> outcomes;
  outcomes.reserve(transcripts.size());
  for (auto& t : transcripts) {
    TrialOutcome o;
    o.warnings = validate_transcript(t);
    if (t.complete()) o.metrics = compute_trial_metrics(t, scope);
    o.transcript = std::move(t);
    outcomes.push_back(std::move(o));
  }
  return summarize(std::move(name), std::move(group), std::move(outcomes));
}

}  // namespace forumsim
