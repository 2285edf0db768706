// Trial tables: one block per task, one row per device, and per user the
// individual trials followed by their mean.
#pragma once

#include "imuteleop/task.hpp"

#include <string>
#include <vector>

namespace imuteleop {

struct ReportEntry {
  std::string task;    ///< e.g. "Straight Wire Task"
  std::string device;  ///< e.g. "MTM", "IMU"
  std::string user;    ///< e.g. "User1"
  TrialSummary summary;
};

enum class ReportMetric { completion_time, position_error, orientation_error, non_collision };

std::string metric_title(ReportMetric metric);

struct ReportCell {
  std::vector<double> trials;
  double mean = 0.0;
};

struct ReportRow {
  std::string device;
  std::vector<ReportCell> per_user;  ///< aligned with ReportTable::users
};

struct ReportSection {
  std::string task;
  std::vector<ReportRow> rows;
};

struct ReportTable {
  ReportMetric metric = ReportMetric::completion_time;
  std::vector<std::string> users;
  std::vector<ReportSection> sections;
};

struct Report {
  std::vector<ReportTable> tables;
};

/// Groups entries by task, device and user in order of first appearance;
/// trials keep their input order. Throws std::invalid_argument if empty.
ReportTable make_table(const std::vector<ReportEntry>& entries, ReportMetric metric);
Report make_report(const std::vector<ReportEntry>& entries);

std::string render_table(const ReportTable& table);
std::string render_report(const Report& report);

/// Rows: table,task,device,user,trial,value ("mean" in the trial column for
/// mean rows).
std::string report_csv(const Report& report);

}  // namespace imuteleop
