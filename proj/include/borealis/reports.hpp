#pragma once

// Run artifacts on disk: measurement export, PRR matrix, battery series,
// summary document and the persisted trace that lets reports be rebuilt
// without simulating again.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "borealis/analytics.hpp"
#include "borealis/backend.hpp"
#include "borealis/scenario.hpp"
#include "borealis/simkernel.hpp"

namespace borealis::reports {

enum class Errc { MissingArtifacts, BadTrace, Io, UnknownReport };
using Error = CodedError<Errc>;

inline constexpr std::string_view kTraceMagic = "BOREALIS-TRACE v1";
inline constexpr std::string_view kTraceFile = "run.trace";

struct TraceFile {
  scenario::Scenario scenario;
  sim::Trace trace;  // digest and counters; per-event records are not persisted
  analytics::AnalyticsInput input;
  backend::ExportFormat format = backend::ExportFormat::Csv;
  std::size_t measurements = 0;
};

void write_trace(std::ostream& out, const TraceFile& file);
TraceFile read_trace(std::istream& in);

std::string measurements_file(backend::ExportFormat format);

std::string prr_daily_csv(const analytics::PrrReport& report);
std::string prr_monthly_csv(const analytics::PrrReport& report);
std::string battery_csv(const analytics::AnalyticsInput& input);
std::string transects_csv(const analytics::TransectReport& report);
std::string energy_json(const analytics::AnalyticsInput& input);
/// Ideal and derated projections; `mean_temp_c` feeds the temperature derating.
std::string lifetime_json(const node::EnergyBudget& budget, double mean_temp_c);
std::string summary_json(const TraceFile& file, const analytics::PrrReport& prr);

/// Mean annual baseline soil temperature over the scenario sites.
double mean_site_temperature(const scenario::Scenario& s);

struct RunArtifacts {
  std::filesystem::path dir;
  std::vector<std::filesystem::path> files;
};

/// Writes measurements.<csv|lp>, prr_daily.csv, summary.json, battery_mv.csv
/// and run.trace into `out_root/<scenario name>/`.
RunArtifacts write_run(const scenario::Scenario& scenario, const sim::RunResult& result,
                       backend::ExportFormat format, const std::filesystem::path& out_root);

inline constexpr std::string_view kReports[] = {"prr", "energy", "lifetime", "transects"};

/// Rebuilds one report from a run directory, writes `<dir>/<report>.<ext>` and
/// returns the written text.
std::string regenerate(const std::filesystem::path& run_dir, std::string_view which);

}  // namespace borealis::reports
