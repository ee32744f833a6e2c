#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sumer/engine.hpp"

namespace sumer {

/// Fixed column order of the trace CSV.
inline constexpr const char* kTraceHeader =
    "window,strategy,seen,holdout_acc,accepted,rejected,selflabel_precision,pi0_hat,pi1_hat,coupling_agreement,"
    "coupled";

/// One row per (window, strategy); cells that do not apply are empty.
void write_trace_csv(std::ostream& out, const MetricsTrace& trace);
/// Rows only (CSV carries no config). Throws ValidationError on malformed input.
std::vector<TraceRow> read_trace_csv(std::istream& in);
std::vector<TraceRow> read_trace_csv(const std::filesystem::path& path);

/// JSON document {format, version, seed, config, rows[]} with full
/// estimate and coupling details.
nlohmann::json trace_to_json(const MetricsTrace& trace);
MetricsTrace trace_from_json(const nlohmann::json& j);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

struct StrategySummary {
  Strategy strategy = Strategy::Static;
  double final_acc = 0.0;
  double delta_vs_static = 0.0;
  bool has_static = false;
  std::optional<bool> coupled;  // final window, when recorded
};

struct TraceSummary {
  std::string source;
  std::vector<StrategySummary> strategies;
};

TraceSummary summarize(const std::vector<TraceRow>& rows, std::string source);
std::string format_summaries(const std::vector<TraceSummary>& summaries);
nlohmann::json summaries_to_json(const std::vector<TraceSummary>& summaries);

}  // namespace sumer
