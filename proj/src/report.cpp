#include "livseg/report.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

namespace livseg {

using ordered_json = nlohmann::ordered_json;

std::string format_float(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double round6(double v) { return std::strtod(format_float(v).c_str(), nullptr); }

namespace {

ordered_json optional_number(const std::optional<double>& v) {
  if (!v) return nullptr;
  return round6(*v);
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_float(*v) : std::string(); }

void append_metric(std::ostringstream& os, const std::optional<double>& v) {
  os << ',' << optional_cell(v) << ',' << (v ? 1 : 0);
}

}  // namespace

std::string case_metrics_csv(std::span<const CaseMetrics> cases) {
  std::ostringstream os;
  os << "case_id";
  for (const auto& name : metric_names()) os << ',' << name << ',' << name << "_defined";
  for (const char* name : {"tumor_burden_pred", "tumor_burden_gt", "tumor_burden_abs_error"}) {
    os << ',' << name << ',' << name << "_defined";
  }
  os << '\n';
  for (const auto& c : cases) {
    os << c.case_id;
    for (const auto& name : metric_names()) append_metric(os, metric_value(c, name));
    append_metric(os, c.tumor_burden_pred);
    append_metric(os, c.tumor_burden_gt);
    append_metric(os, c.tumor_burden_abs_error());
    os << '\n';
  }
  return os.str();
}

std::string aggregate_json(const AggregateReport& report, StdKind kind) {
  ordered_json j;
  j["std"] = kind == StdKind::population ? "population" : "sample";
  // Rows in the order ASD, Dice, HD, SD for each structure, then RMSE.
  for (const char* structure : {"liver", "tumor"}) {
    ordered_json s;
    const std::pair<const char*, const char*> rows[] = {
        {"ASD", "assd_mm"}, {"Dice", "dice"}, {"HD", "hausdorff_mm"}, {"SD", "surface_dice"}};
    for (const auto& [label, suffix] : rows) {
      const MetricSummary& m = report.find(std::string(structure) + "_" + suffix);
      ordered_json row;
      row["mean"] = m.defined ? ordered_json(round6(m.mean)) : ordered_json(nullptr);
      row["std"] = m.defined ? ordered_json(round6(m.stddev)) : ordered_json(nullptr);
      row["n"] = m.defined;
      row["excluded"] = m.excluded;
      s[label] = row;
    }
    if (std::string_view(structure) == "tumor") {
      ordered_json rmse;
      rmse["value"] = optional_number(report.burden_rmse);
      rmse["n"] = report.burden_cases;
      rmse["excluded"] = report.burden_excluded;
      s["RMSE"] = rmse;
    }
    j[structure] = s;
  }
  return j.dump(2) + "\n";
}

std::string lesions_csv(std::span<const LesionReport> reports) {
  std::ostringstream os;
  os << "case,id,volume_mm3,uncertainty,status\n";
  for (const auto& r : reports) {
    for (const auto& l : r.lesions) {
      os << r.case_id << ',' << l.id << ',' << format_float(l.volume_mm3) << ',' << optional_cell(l.uncertainty)
         << ',' << to_string(l.status) << '\n';
    }
  }
  return os.str();
}

std::string lesions_json(std::span<const LesionReport> reports) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json c;
    c["case_id"] = r.case_id;
    c["spearman_uncertainty_volume"] = optional_number(r.spearman_uncertainty_volume);
    ordered_json lesions = ordered_json::array();
    for (const auto& l : r.lesions) {
      ordered_json e;
      e["id"] = l.id;
      e["voxel_count"] = l.voxel_count();
      e["volume_mm3"] = round6(l.volume_mm3);
      e["uncertainty"] = optional_number(l.uncertainty);
      e["status"] = to_string(l.status);
      lesions.push_back(e);
    }
    c["lesions"] = lesions;
    arr.push_back(c);
  }
  return arr.dump(2) + "\n";
}

std::string significance_csv(std::span<const SignificanceResult> results) {
  std::ostringstream os;
  os << "metric,shapiro_p,hypothesis,test,p_value,significant,alpha,degenerate,n,zeros_dropped\n";
  for (const auto& r : results) {
    os << r.metric << ',' << optional_cell(r.shapiro_p) << ',' << to_string(r.hypothesis) << ','
       << to_string(r.test) << ',' << format_float(r.p) << ',' << (r.significant ? 1 : 0) << ','
       << format_float(r.alpha) << ',' << (r.degenerate ? 1 : 0) << ',' << r.n << ',' << r.zeros_dropped << '\n';
  }
  return os.str();
}

std::string significance_json(std::span<const SignificanceResult> results) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : results) {
    ordered_json e;
    e["metric"] = r.metric;
    e["shapiro_p"] = optional_number(r.shapiro_p);
    e["shapiro_w"] = optional_number(r.shapiro_w);
    e["hypothesis"] = to_string(r.hypothesis);
    e["test"] = to_string(r.test);
    e["p_value"] = round6(r.p);
    e["significant"] = r.significant;
    e["alpha"] = round6(r.alpha);
    e["degenerate"] = r.degenerate;
    e["n"] = r.n;
    e["zeros_dropped"] = r.zeros_dropped;
    arr.push_back(e);
  }
  return arr.dump(2) + "\n";
}

std::string folds_json(std::span<const Fold> folds) {
  ordered_json arr = ordered_json::array();
  for (std::size_t f = 0; f < folds.size(); ++f) {
    ordered_json e;
    e["fold"] = f + 1;
    e["train"] = folds[f].train;
    e["val"] = folds[f].val;
    e["test"] = folds[f].test;
    arr.push_back(e);
  }
  ordered_json j;
  j["folds"] = arr;
  return j.dump(2) + "\n";
}

std::string folds_csv(std::span<const Fold> folds) {
  std::ostringstream os;
  os << "fold,split,case_id\n";
  for (std::size_t f = 0; f < folds.size(); ++f) {
    for (const auto& id : folds[f].train) os << f + 1 << ",train," << id << '\n';
    for (const auto& id : folds[f].val) os << f + 1 << ",val," << id << '\n';
    for (const auto& id : folds[f].test) os << f + 1 << ",test," << id << '\n';
  }
  return os.str();
}

std::string bbox_csv(std::span<const BBoxRow> rows) {
  std::ostringstream os;
  os << "case,target,component,extent_x,extent_y,extent_z,extent_x_mm,extent_y_mm,extent_z_mm\n";
  for (const auto& r : rows) {
    const auto e = r.box.extent();
    const auto mm = r.box.extent_mm(r.spacing);
    os << r.case_id << ',' << to_string(r.target) << ',' << r.component << ',' << e[0] << ',' << e[1] << ','
       << e[2] << ',' << format_float(mm[0]) << ',' << format_float(mm[1]) << ',' << format_float(mm[2]) << '\n';
  }
  return os.str();
}

std::optional<std::size_t> CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  return std::nullopt;
}

CsvTable parse_csv(std::string_view text) {
  CsvTable t;
  auto split = [](std::string_view line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) {
        cell.remove_suffix(1);
      }
      cells.emplace_back(cell);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    if (line.front() == '#') continue;
    auto cells = split(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                                  std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (first) throw std::invalid_argument("CSV has no header row");
  return t;
}

MetricTable parse_metric_table(const CsvTable& csv) {
  const auto id_col = csv.column("case_id");
  if (!id_col) throw std::invalid_argument("metrics CSV lacks a case_id column");
  MetricTable t;
  for (const auto& row : csv.rows) t.case_ids.push_back(row[*id_col]);
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    const std::string& name = csv.header[c];
    if (c == *id_col || name.ends_with("_defined")) continue;
    const auto flag = csv.column(name + "_defined");
    std::vector<std::optional<double>> values;
    for (const auto& row : csv.rows) {
      const std::string& cell = row[c];
      const bool defined = !cell.empty() && (!flag || row[*flag] != "0");
      if (!defined) {
        values.emplace_back();
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') throw std::invalid_argument("non-numeric metric cell: " + cell);
      values.emplace_back(v);
    }
    t.columns[name] = std::move(values);
  }
  return t;
}

}  // namespace livseg
