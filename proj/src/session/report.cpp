#include "imuteleop/session/report.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace imuteleop {

std::string metric_title(ReportMetric metric) {
  switch (metric) {
    case ReportMetric::completion_time: return "Completion time (s)";
    case ReportMetric::position_error: return "Mean position error (mm)";
    case ReportMetric::orientation_error: return "Mean orientation error (deg)";
    case ReportMetric::non_collision: return "Non-collision (%)";
  }
  return "";
}

namespace {

std::string metric_key(ReportMetric metric) {
  switch (metric) {
    case ReportMetric::completion_time: return "completion_time_s";
    case ReportMetric::position_error: return "mean_pos_err_mm";
    case ReportMetric::orientation_error: return "mean_ori_err_deg";
    case ReportMetric::non_collision: return "non_collision_pct";
  }
  return "";
}

double value_of(const TrialSummary& s, ReportMetric metric) {
  switch (metric) {
    case ReportMetric::completion_time: return s.completion_time;
    case ReportMetric::position_error: return s.mean_position_error;
    case ReportMetric::orientation_error: return s.mean_orientation_error;
    case ReportMetric::non_collision: return s.non_collision_pct;
  }
  return 0.0;
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

ReportTable make_table(const std::vector<ReportEntry>& entries, ReportMetric metric) {
  if (entries.empty()) throw std::invalid_argument("report: no trial summaries");
  ReportTable table;
  table.metric = metric;
  for (const auto& e : entries) {
    if (std::find(table.users.begin(), table.users.end(), e.user) == table.users.end()) {
      table.users.push_back(e.user);
    }
  }
  for (const auto& e : entries) {
    auto section = std::find_if(table.sections.begin(), table.sections.end(),
                                [&](const ReportSection& s) { return s.task == e.task; });
    if (section == table.sections.end()) {
      table.sections.push_back({e.task, {}});
      section = std::prev(table.sections.end());
    }
    auto row = std::find_if(section->rows.begin(), section->rows.end(),
                            [&](const ReportRow& r) { return r.device == e.device; });
    if (row == section->rows.end()) {
      section->rows.push_back({e.device, std::vector<ReportCell>(table.users.size())});
      row = std::prev(section->rows.end());
    }
    const auto user = static_cast<std::size_t>(
        std::find(table.users.begin(), table.users.end(), e.user) - table.users.begin());
    row->per_user[user].trials.push_back(value_of(e.summary, metric));
  }
  for (auto& section : table.sections) {
    for (auto& row : section.rows) {
      for (auto& cell : row.per_user) {
        if (cell.trials.empty()) continue;
        double sum = 0.0;
        for (double v : cell.trials) sum += v;
        cell.mean = sum / static_cast<double>(cell.trials.size());
      }
    }
  }
  return table;
}

Report make_report(const std::vector<ReportEntry>& entries) {
  Report report;
  for (auto metric : {ReportMetric::completion_time, ReportMetric::position_error,
                      ReportMetric::orientation_error, ReportMetric::non_collision}) {
    report.tables.push_back(make_table(entries, metric));
  }
  return report;
}

std::string render_table(const ReportTable& table) {
  // Columns per user: the widest trial count across rows, then Mean.
  std::vector<std::size_t> width(table.users.size(), 0);
  for (const auto& section : table.sections) {
    for (const auto& row : section.rows) {
      for (std::size_t u = 0; u < row.per_user.size(); ++u) {
        width[u] = std::max(width[u], row.per_user[u].trials.size());
      }
    }
  }
  std::size_t label_width = 6;
  for (const auto& section : table.sections) {
    for (const auto& row : section.rows) label_width = std::max(label_width, row.device.size());
  }
  constexpr int kCell = 7;

  std::string out = metric_title(table.metric) + "\n";
  std::string header1(label_width, ' ');
  std::string header2(label_width, ' ');
  for (std::size_t u = 0; u < table.users.size(); ++u) {
    const std::size_t span = (width[u] + 1) * kCell;
    std::string title = table.users[u] + " Trials";
    title.resize(std::max(span, title.size()), ' ');
    header1 += " | " + title;
    std::string cols;
    for (std::size_t k = 0; k < width[u]; ++k) {
      cols += fmt("%7.0f", static_cast<double>(k + 1));
    }
    cols += "   Mean";
    cols.resize(std::max(span, cols.size()), ' ');
    header2 += " | " + cols;
  }
  out += header1 + "\n" + header2 + "\n";
  const std::string rule(header2.size(), '-');
  for (const auto& section : table.sections) {
    out += rule + "\n" + section.task + "\n" + rule + "\n";
    for (const auto& row : section.rows) {
      std::string line = row.device;
      line.resize(label_width, ' ');
      for (std::size_t u = 0; u < row.per_user.size(); ++u) {
        const auto& cell = row.per_user[u];
        std::string cols;
        for (std::size_t k = 0; k < width[u]; ++k) {
          cols += k < cell.trials.size() ? fmt("%7.1f", cell.trials[k]) : std::string(kCell, ' ');
        }
        cols += cell.trials.empty() ? std::string(kCell, ' ') : fmt("%7.1f", cell.mean);
        line += " | " + cols;
      }
      out += line + "\n";
    }
  }
  return out;
}

std::string render_report(const Report& report) {
  std::string out;
  for (std::size_t k = 0; k < report.tables.size(); ++k) {
    if (k) out += "\n";
    out += render_table(report.tables[k]);
  }
  return out;
}

std::string report_csv(const Report& report) {
  std::string out = "table,task,device,user,trial,value\n";
  for (const auto& table : report.tables) {
    const std::string key = metric_key(table.metric);
    for (const auto& section : table.sections) {
      for (const auto& row : section.rows) {
        for (std::size_t u = 0; u < row.per_user.size(); ++u) {
          const auto& cell = row.per_user[u];
          const std::string prefix =
              key + "," + section.task + "," + row.device + "," + table.users[u] + ",";
          for (std::size_t k = 0; k < cell.trials.size(); ++k) {
            out += prefix + std::to_string(k + 1) + "," + fmt("%.17g", cell.trials[k]) + "\n";
          }
          if (!cell.trials.empty()) out += prefix + "mean," + fmt("%.17g", cell.mean) + "\n";
        }
      }
    }
  }
  return out;
}

}  // namespace imuteleop
