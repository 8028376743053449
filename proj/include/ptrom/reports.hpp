#pragma once

#include <string>

#include "ptrom/io.hpp"
#include "ptrom/metrics.hpp"

namespace ptrom {

// Per-step metric columns; timing never enters this file so replays stay
// byte-identical.
void write_error_report_csv(const std::string& path, const ErrorReport& report);

// Deterministic scalar fields of a report.
json error_report_summary(const ErrorReport& report);

// Wall-clock fields of a report, kept in their own artifact.
json error_report_timings(const ErrorReport& report);

// Walks a run directory and lists every artifact with its size.  Missing or
// empty directories yield an empty file list.
json manifest_from_dir(const std::string& run_dir);
void write_manifest(const std::string& run_dir);

}  // namespace ptrom
