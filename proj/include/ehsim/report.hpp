#pragma once

#include <string>

#include "ehsim/experiments.hpp"

namespace ehsim {

// Stable JSON rendering of a report; byte-identical for identical runs.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);

// Writes report.json, per_day.csv and the plot-ready CSVs under `dir`
// (created if missing).
void write_report_files(const ExperimentReport& report, const std::string& dir);

// Short human-readable rundown: one line per node/arm plus totals.
std::string summarize_report(const ExperimentReport& report);

}  // namespace ehsim
