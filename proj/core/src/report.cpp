#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "virac/evaluation.hpp"

namespace virac {

namespace {

std::string format_cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::string column_label(const ReportColumn& c) {
  return c.scenario + "/" + to_string(c.condition);
}

bool column_less(const ReportColumn& a, const ReportColumn& b) {
  if (a.scenario != b.scenario) return a.scenario < b.scenario;
  return a.condition == Condition::MDC && b.condition == Condition::APC;
}

}  // namespace

Report build_report(const std::vector<ReportEntry>& entries) {
  if (entries.empty()) {
    throw ReportError("no entries to report");
  }
  Report report;
  std::set<std::string> methods;
  std::vector<ReportColumn> columns;
  for (const auto& e : entries) {
    methods.insert(e.method);
    const bool known = std::any_of(columns.begin(), columns.end(), [&](const ReportColumn& c) {
      return c.scenario == e.scenario && c.condition == e.condition;
    });
    if (!known) {
      columns.push_back({e.scenario, e.condition});
    }
  }
  report.methods.assign(methods.begin(), methods.end());
  std::sort(columns.begin(), columns.end(), column_less);
  report.columns = std::move(columns);

  report.values.assign(report.methods.size(),
                       std::vector<double>(report.columns.size(), 0.0));
  report.best.assign(report.methods.size(),
                     std::vector<bool>(report.columns.size(), false));
  for (std::size_t r = 0; r < report.methods.size(); ++r) {
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      double sum = 0.0;
      std::size_t count = 0;
      for (const auto& e : entries) {
        if (e.method == report.methods[r] && e.scenario == report.columns[c].scenario &&
            e.condition == report.columns[c].condition) {
          sum += e.normalized_dtw;
          ++count;
        }
      }
      if (count == 0) {
        throw ReportError("method \"" + report.methods[r] + "\" has no value for column " +
                          column_label(report.columns[c]));
      }
      report.values[r][c] = sum / static_cast<double>(count);
    }
  }

  // Mark every method tied for the column minimum, comparing at the printed
  // precision so the flags match the rendered table.
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    std::string best;
    for (std::size_t r = 0; r < report.methods.size(); ++r) {
      const std::string cell = format_cell(report.values[r][c]);
      if (best.empty() || cell < best) {
        best = cell;
      }
    }
    for (std::size_t r = 0; r < report.methods.size(); ++r) {
      report.best[r][c] = format_cell(report.values[r][c]) == best;
    }
  }
  return report;
}

std::string render_report_text(const Report& report) {
  std::vector<std::size_t> widths;
  widths.push_back(std::string("method").size());
  for (const auto& m : report.methods) {
    widths[0] = std::max(widths[0], m.size());
  }
  for (std::size_t c = 0; c < report.columns.size(); ++c) {
    std::size_t w = column_label(report.columns[c]).size();
    for (std::size_t r = 0; r < report.methods.size(); ++r) {
      w = std::max(w, format_cell(report.values[r][c]).size() + 1);  // room for the flag
    }
    widths.push_back(w);
  }

  std::string out;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) {
        line += "  ";
      }
      line += cells[i];
      line.append(widths[i] - std::min(widths[i], cells[i].size()), ' ');
    }
    while (!line.empty() && line.back() == ' ') {
      line.pop_back();
    }
    out += line;
    out += '\n';
  };

  std::vector<std::string> header{"method"};
  for (const auto& c : report.columns) {
    header.push_back(column_label(c));
  }
  emit_row(header);
  for (std::size_t r = 0; r < report.methods.size(); ++r) {
    std::vector<std::string> cells{report.methods[r]};
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      cells.push_back(format_cell(report.values[r][c]) + (report.best[r][c] ? "*" : ""));
    }
    emit_row(cells);
  }
  return out;
}

std::string render_report_csv(const Report& report) {
  struct Row {
    std::string scenario;
    Condition condition;
    std::string method;
    double value;
  };
  std::vector<Row> rows;
  for (std::size_t r = 0; r < report.methods.size(); ++r) {
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
      rows.push_back({report.columns[c].scenario, report.columns[c].condition,
                      report.methods[r], report.values[r][c]});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.scenario != b.scenario) return a.scenario < b.scenario;
    if (a.condition != b.condition) return a.condition == Condition::MDC;
    return a.method < b.method;
  });
  std::string out = "scenario,condition,method,normalized_dtw\n";
  for (const auto& row : rows) {
    out += row.scenario;
    out += ',';
    out += to_string(row.condition);
    out += ',';
    out += row.method;
    out += ',';
    out += format_cell(row.value);
    out += '\n';
  }
  return out;
}

}  // namespace virac
