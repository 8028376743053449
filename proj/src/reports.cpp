#include "ptrom/reports.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace ptrom {

namespace fs = std::filesystem;

void write_error_report_csv(const std::string& path, const ErrorReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open " + path + " for writing");
  const bool with_bound = !report.error_bound.empty();
  out << "time,mae,ae_h";
  if (with_bound) out << ",state_error,error_bound";
  out << "\n";
  for (size_t i = 0; i < report.time.size(); ++i) {
    out << format_full(report.time[i]) << ',' << format_full(report.mae[i]) << ','
        << format_full(report.ae_h[i]);
    if (with_bound)
      out << ',' << format_full(report.state_error[i]) << ','
          << format_full(report.error_bound[i]);
    out << "\n";
  }
  if (!out) throw config_error("failed writing " + path);
}

json error_report_summary(const ErrorReport& report) {
  json j;
  j["steps"] = report.time.size();
  j["mean_mae"] = report.mean_mae;
  j["mean_ae_h"] = report.mean_ae_h;
  if (!report.mae.empty()) {
    j["final_mae"] = report.mae.back();
    j["final_ae_h"] = report.ae_h.back();
    j["max_mae"] = *std::max_element(report.mae.begin(), report.mae.end());
    j["max_ae_h"] = *std::max_element(report.ae_h.begin(), report.ae_h.end());
  }
  if (!report.error_bound.empty()) {
    bool dominated = true;
    for (size_t i = 0; i < report.error_bound.size(); ++i)
      dominated = dominated && report.error_bound[i] >= report.state_error[i];
    j["bound_dominates"] = dominated;
    j["final_bound"] = report.error_bound.back();
    j["final_state_error"] = report.state_error.back();
  }
  return j;
}

json error_report_timings(const ErrorReport& report) {
  json j;
  j["reference_seconds"] = report.reference_seconds;
  j["reduced_seconds"] = report.reduced_seconds;
  j["speedup"] = report.speedup;
  return j;
}

json manifest_from_dir(const std::string& run_dir) {
  json manifest;
  manifest["format"] = "ptrom-manifest";
  manifest["root"] = run_dir;
  json files = json::array();
  if (fs::exists(run_dir) && fs::is_directory(run_dir)) {
    std::vector<fs::path> paths;
    for (const auto& entry : fs::recursive_directory_iterator(run_dir))
      if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
        paths.push_back(entry.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) {
      json f;
      f["path"] = fs::relative(p, run_dir).generic_string();
      f["bytes"] = static_cast<std::uint64_t>(fs::file_size(p));
      files.push_back(f);
    }
  }
  manifest["files"] = files;
  return manifest;
}

void write_manifest(const std::string& run_dir) {
  fs::create_directories(run_dir);
  save_json((fs::path(run_dir) / "manifest.json").string(), manifest_from_dir(run_dir));
}

}  // namespace ptrom
