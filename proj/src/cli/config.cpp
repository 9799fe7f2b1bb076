#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "livseg/cli.hpp"
#include "livseg/report.hpp"

namespace livseg::cli {

namespace {

using json = nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Connectivity connectivity_of(const json& v, const std::string& key) {
  if (!v.is_number_integer()) throw ConfigError(key + " must be 6 or 26");
  const int c = v.get<int>();
  if (c == 6) return Connectivity::face;
  if (c == 26) return Connectivity::full;
  throw ConfigError(key + " must be 6 or 26");
}

template <class T>
T number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError(key + " must be a number");
  if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) throw ConfigError(key + " must be a non-negative integer");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(key + " must be an integer");
  }
  return v.get<T>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw ConfigError(key + " must be true or false");
  return v.get<bool>();
}

std::string text(const json& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError(key + " must be a string");
  return v.get<std::string>();
}

void merge_morph(MorphStep& step, const json& j, const std::string& key) {
  if (!j.is_object()) throw ConfigError(key + " must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "element") {
      step.element = connectivity_of(v, key + ".element");
    } else if (k == "iterations") {
      step.iterations = number<int>(v, key + ".iterations");
    } else {
      throw ConfigError("unknown config key " + key + "." + k);
    }
  }
}

void merge_postprocess(PostprocessConfig& p, const json& j) {
  if (!j.is_object()) throw ConfigError("postprocess must be an object");
  for (const auto& [k, v] : j.items()) {
    const std::string key = "postprocess." + k;
    if (k == "component_connectivity") {
      p.component_connectivity = connectivity_of(v, key);
    } else if (k == "hole_connectivity") {
      p.hole_connectivity = connectivity_of(v, key);
    } else if (k == "dilation") {
      merge_morph(p.dilation, v, key);
    } else if (k == "closing") {
      merge_morph(p.closing, v, key);
    } else if (k == "keep_largest_liver") {
      p.keep_largest_liver = boolean(v, key);
    } else if (k == "fill_liver_holes") {
      p.fill_liver_holes = boolean(v, key);
    } else if (k == "remove_outside_tumors") {
      p.remove_outside_tumors = boolean(v, key);
    } else if (k == "close_tumors") {
      p.close_tumors = boolean(v, key);
    } else {
      throw ConfigError("unknown config key " + key);
    }
  }
}

std::array<std::size_t, 3> size3(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(key + " must be an array of 3 integers");
  return {number<std::size_t>(v[0], key), number<std::size_t>(v[1], key), number<std::size_t>(v[2], key)};
}

std::array<double, 3> real3(const json& v, const std::string& key) {
  if (!v.is_array() || v.size() != 3) throw ConfigError(key + " must be an array of 3 numbers");
  return {number<double>(v[0], key), number<double>(v[1], key), number<double>(v[2], key)};
}

StdKind std_kind_of(const std::string& s) {
  if (s == "population") return StdKind::population;
  if (s == "sample") return StdKind::sample;
  throw ConfigError("std must be population or sample");
}

}  // namespace

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(threshold > 0.0 && threshold < 1.0, "threshold must lie in (0,1)");
  require(metrics.tau_mm >= 0.0, "tau-mm must be non-negative");
  require(metrics.hd_percentile > 0.0 && metrics.hd_percentile <= 100.0, "hd-percentile must lie in (0,100]");
  require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0,1)");
  require(folds >= 2, "folds must be at least 2");
  require(val_fraction >= 0.0 && val_fraction < 1.0, "val-fraction must lie in [0,1)");
  try {
    postprocess.validate();
    patch.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig merge_config_json(RunConfig cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (k == "mode") {
      try {
        cfg.mode = parse_pipeline_mode(text(v, k));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
      }
    } else if (k == "threshold") {
      cfg.threshold = number<double>(v, k);
    } else if (k == "tau_mm") {
      cfg.metrics.tau_mm = number<double>(v, k);
    } else if (k == "hd_percentile") {
      cfg.metrics.hd_percentile = number<double>(v, k);
    } else if (k == "std") {
      cfg.std_kind = std_kind_of(text(v, k));
    } else if (k == "alpha") {
      cfg.alpha = number<double>(v, k);
    } else if (k == "seed") {
      cfg.seed = number<std::uint64_t>(v, k);
    } else if (k == "jobs") {
      cfg.jobs = number<std::size_t>(v, k);
    } else if (k == "manifest") {
      cfg.manifest = text(v, k);
    } else if (k == "out") {
      cfg.out = text(v, k);
    } else if (k == "folds") {
      cfg.folds = number<std::size_t>(v, k);
    } else if (k == "val_fraction") {
      cfg.val_fraction = number<double>(v, k);
    } else if (k == "patch") {
      if (!v.is_object()) throw ConfigError("patch must be an object");
      for (const auto& [pk, pv] : v.items()) {
        if (pk == "size") {
          cfg.patch.size = size3(pv, "patch.size");
        } else if (pk == "overlap") {
          cfg.patch.overlap = real3(pv, "patch.overlap");
        } else {
          throw ConfigError("unknown config key patch." + pk);
        }
      }
    } else if (k == "metrics_a") {
      cfg.metrics_a = text(v, k);
    } else if (k == "metrics_b") {
      cfg.metrics_b = text(v, k);
    } else if (k == "compare_metrics") {
      if (!v.is_array()) throw ConfigError("compare_metrics must be an array of names");
      cfg.compare_metrics.clear();
      for (const auto& m : v) cfg.compare_metrics.push_back(text(m, k));
    } else if (k == "hypotheses") {
      if (!v.is_object()) throw ConfigError("hypotheses must map metric names to A<B or A>B");
      for (const auto& [mk, mv] : v.items()) {
        try {
          cfg.hypotheses[mk] = parse_hypothesis(text(mv, "hypotheses." + mk));
        } catch (const std::invalid_argument& e) {
          throw ConfigError(e.what());
        }
      }
    } else if (k == "postprocess") {
      merge_postprocess(cfg.postprocess, v);
    } else {
      throw ConfigError("unknown config key " + k);
    }
  }
  return cfg;
}

RunConfig merge_config_file(RunConfig base, const std::filesystem::path& path) {
  return merge_config_json(std::move(base), read_text(path));
}

const std::filesystem::path* ManifestRow::file(const std::string& column) const {
  const auto it = files.find(column);
  return it == files.end() ? nullptr : &it->second;
}

std::vector<ManifestRow> read_manifest(const std::filesystem::path& path) {
  CsvTable csv;
  try {
    csv = parse_csv(read_text(path));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("manifest " + path.string() + ": " + e.what());
  }
  const auto id_col = csv.column("case_id");
  if (!id_col) throw ConfigError("manifest lacks a case_id column");
  const auto& file_cols = manifest_file_columns();
  for (const auto& h : csv.header) {
    if (h != "case_id" && h != "phase" && std::find(file_cols.begin(), file_cols.end(), h) == file_cols.end()) {
      throw ConfigError("manifest has unknown column " + h);
    }
  }
  const std::filesystem::path base = path.parent_path();
  std::vector<ManifestRow> rows;
  std::set<std::string> seen;
  for (const auto& cells : csv.rows) {
    ManifestRow row;
    row.case_id = cells[*id_col];
    if (row.case_id.empty()) throw ConfigError("manifest row with empty case_id");
    if (!seen.insert(row.case_id).second) throw ConfigError("duplicate case_id " + row.case_id);
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
      const std::string& h = csv.header[c];
      if (cells[c].empty() || c == *id_col) continue;
      if (h == "phase") {
        row.phase = cells[c];
      } else {
        const std::filesystem::path p(cells[c]);
        row.files[h] = p.is_absolute() ? p : base / p;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

Hypothesis default_hypothesis(const std::string& metric) {
  if (metric.ends_with("surface_dice") || metric.ends_with("dice")) return Hypothesis::a_greater_than_b;
  return Hypothesis::a_less_than_b;
}

std::vector<std::string> default_compare_metrics() {
  std::vector<std::string> m(metric_names().begin(), metric_names().end());
  m.emplace_back("tumor_burden_abs_error");
  return m;
}

}  // namespace livseg::cli
