#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include "livseg/cli.hpp"
#include "livseg/nifti.hpp"
#include "livseg/report.hpp"
#include "livseg/uncertainty.hpp"

namespace livseg::cli {

namespace fs = std::filesystem;

namespace {

struct Failure {
  std::string item;
  std::string message;
};

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::string errors_json(const std::vector<Failure>& failures) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& f : failures) arr.push_back({{"item", f.item}, {"message", f.message}});
  nlohmann::ordered_json j;
  j["errors"] = arr;
  return j.dump(2) + "\n";
}

std::size_t worker_count(std::size_t jobs, std::size_t items) {
  if (jobs == 0) jobs = std::max(1U, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(jobs, items));
}

/// Runs `work(row)` over every manifest row on a bounded worker pool. Slot i holds
/// row i's result, or stays empty and a failure is recorded; failures are
/// reported in manifest order whatever the scheduling.
template <class Result, class Work>
std::vector<std::optional<Result>> for_each_case(const std::vector<ManifestRow>& rows, std::size_t jobs,
                                                 Work work, std::vector<Failure>& failures) {
  std::vector<std::optional<Result>> results(rows.size());
  std::vector<std::optional<std::string>> errors(rows.size());
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        results[i] = work(rows[i]);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  const std::size_t n = worker_count(jobs, rows.size());
  if (n == 1) {
    drain();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n; ++t) pool.emplace_back(drain);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (errors[i]) failures.push_back({rows[i].case_id, *errors[i]});
  }
  return results;
}

const fs::path& require_file(const ManifestRow& row, const std::string& column) {
  const fs::path* p = row.file(column);
  if (p == nullptr) throw std::invalid_argument("manifest row lacks a " + column + " path");
  return *p;
}

fs::path label_path(const RunConfig& cfg, const std::string& case_id) {
  return cfg.out / "labels" / (case_id + ".nii.gz");
}

/// Created before the worker pool starts so that workers only write files.
void prepare_label_dir(const RunConfig& cfg) { fs::create_directories(cfg.out / "labels"); }

std::vector<ManifestRow> load_manifest(const RunConfig& cfg) {
  if (cfg.manifest.empty()) throw ConfigError("--manifest is required");
  return read_manifest(cfg.manifest);
}

void log_cases(std::ostream& log, const std::vector<ManifestRow>& rows, const std::vector<Failure>& failures) {
  for (const auto& row : rows) {
    const auto it = std::find_if(failures.begin(), failures.end(),
                                 [&](const Failure& f) { return f.item == row.case_id; });
    if (it == failures.end()) {
      log << "case " << row.case_id << ": ok\n";
    } else {
      log << "case " << row.case_id << ": FAILED: " << it->message << '\n';
    }
  }
}

int finish(const RunConfig& cfg, std::ostream& log, const char* command, std::size_t items,
           const std::vector<Failure>& failures) {
  write_text(cfg.out / "errors.json", errors_json(failures));
  log << command << ": " << items << " processed, " << failures.size() << " failed\n";
  return failures.empty() ? kExitOk : kExitPartial;
}

/// Pipeline inputs of one row, plus the header orientation to write back.
PipelineInput load_pipeline_input(const ManifestRow& row, PipelineMode mode, Orientation& orientation) {
  if (mode == PipelineMode::multiclass) {
    const NiftiImage img = read_volume(require_file(row, "prob"));
    if (img.channels != 3) throw std::invalid_argument("multiclass input needs 3 probability channels");
    orientation = img.orientation;
    return MulticlassInput{to_prob_map(img)};
  }
  const NiftiImage liver = read_volume(require_file(row, "liver_prob"));
  orientation = liver.orientation;
  ProbVolume lp = to_prob_volume(liver);
  ProbVolume tp = to_prob_volume(read_volume(require_file(row, "tumor_prob")));
  require_same_grid(lp, tp, "liver/tumor probabilities");
  return DualBinaryInput{std::move(lp), std::move(tp)};
}

template <class T>
std::vector<T> present(std::vector<std::optional<T>>& slots) {
  std::vector<T> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

}  // namespace

int cmd_run(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  prepare_label_dir(cfg);
  struct CaseResult {
    std::optional<CaseMetrics> metrics;
    LesionReport lesions;
  };
  std::vector<Failure> failures;
  auto results = for_each_case<CaseResult>(
      rows, cfg.jobs,
      [&](const ManifestRow& row) {
        Orientation orientation;
        const PipelineInput input = load_pipeline_input(row, cfg.mode, orientation);
        LabelMap seg = run_pipeline(input, cfg.mode, cfg.postprocess, cfg.threshold);
        seg.set_orientation(orientation);
        CaseResult r;
        std::optional<LabelMap> gt;
        if (const fs::path* g = row.file("gt")) {
          gt = read_label_map(*g);
          r.metrics = evaluate_case(seg, *gt, cfg.metrics, row.case_id);
        }
        r.lesions = build_lesion_report(row.case_id, seg, tumor_probability(input), gt ? &*gt : nullptr,
                                        cfg.postprocess.component_connectivity);
        write_label_map(seg, label_path(cfg, row.case_id));
        return r;
      },
      failures);
  log_cases(log, rows, failures);

  std::vector<CaseMetrics> metrics;
  std::vector<LesionReport> lesions;
  for (auto& r : results) {
    if (!r) continue;
    if (r->metrics) metrics.push_back(std::move(*r->metrics));
    lesions.push_back(std::move(r->lesions));
  }
  write_text(cfg.out / "case_metrics.csv", case_metrics_csv(metrics));
  if (!metrics.empty()) {
    write_text(cfg.out / "aggregate.json", aggregate_json(aggregate(metrics, cfg.std_kind), cfg.std_kind));
  }
  write_text(cfg.out / "lesions.csv", lesions_csv(lesions));
  write_text(cfg.out / "lesions.json", lesions_json(lesions));
  return finish(cfg, log, "run", rows.size(), failures);
}

int cmd_evaluate(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  std::vector<Failure> failures;
  auto results = for_each_case<CaseMetrics>(
      rows, cfg.jobs,
      [&](const ManifestRow& row) {
        const LabelMap pred = read_label_map(require_file(row, "pred"));
        const LabelMap gt = read_label_map(require_file(row, "gt"));
        return evaluate_case(pred, gt, cfg.metrics, row.case_id);
      },
      failures);
  log_cases(log, rows, failures);
  const auto metrics = present(results);
  write_text(cfg.out / "case_metrics.csv", case_metrics_csv(metrics));
  if (!metrics.empty()) {
    write_text(cfg.out / "aggregate.json", aggregate_json(aggregate(metrics, cfg.std_kind), cfg.std_kind));
  }
  return finish(cfg, log, "evaluate", rows.size(), failures);
}

int cmd_postprocess(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  prepare_label_dir(cfg);
  std::vector<Failure> failures;
  for_each_case<bool>(
      rows, cfg.jobs,
      [&](const ManifestRow& row) {
        const LabelMap seg = read_label_map(require_file(row, "seg"));
        LabelMap out = postprocess(seg, cfg.mode, cfg.postprocess);
        out.set_orientation(seg.orientation());
        write_label_map(out, label_path(cfg, row.case_id));
        return true;
      },
      failures);
  log_cases(log, rows, failures);
  return finish(cfg, log, "postprocess", rows.size(), failures);
}

int cmd_fuse(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  prepare_label_dir(cfg);
  std::vector<Failure> failures;
  for_each_case<bool>(
      rows, cfg.jobs,
      [&](const ManifestRow& row) {
        Orientation orientation;
        const auto input = std::get<DualBinaryInput>(load_pipeline_input(row, PipelineMode::dual_binary, orientation));
        LabelMap out =
            fuse_dual_binary(threshold_binary(input.liver, cfg.threshold), threshold_binary(input.tumor, cfg.threshold));
        out.set_orientation(orientation);
        write_label_map(out, label_path(cfg, row.case_id));
        return true;
      },
      failures);
  log_cases(log, rows, failures);
  return finish(cfg, log, "fuse", rows.size(), failures);
}

int cmd_uncertainty(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  std::vector<Failure> failures;
  auto results = for_each_case<LesionReport>(
      rows, cfg.jobs,
      [&](const ManifestRow& row) {
        const LabelMap seg = read_label_map(require_file(row, "seg"));
        ProbVolume tumor;
        if (const fs::path* p = row.file("tumor_prob")) {
          tumor = to_prob_volume(read_volume(*p));
        } else if (const fs::path* q = row.file("prob")) {
          const NiftiImage img = read_volume(*q);
          if (img.channels != 3) throw std::invalid_argument("prob must hold 3 channels");
          tumor = to_prob_volume(img, 2);
        } else {
          throw std::invalid_argument("manifest row lacks a tumor_prob or prob path");
        }
        std::optional<LabelMap> gt;
        if (const fs::path* g = row.file("gt")) gt = read_label_map(*g);
        return build_lesion_report(row.case_id, seg, tumor, gt ? &*gt : nullptr,
                                   cfg.postprocess.component_connectivity);
      },
      failures);
  log_cases(log, rows, failures);
  const auto reports = present(results);
  write_text(cfg.out / "lesions.csv", lesions_csv(reports));
  write_text(cfg.out / "lesions.json", lesions_json(reports));
  return finish(cfg, log, "uncertainty", rows.size(), failures);
}

int cmd_bbox(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  std::vector<Failure> failures;
  auto results = for_each_case<std::vector<BBoxRow>>(
      rows, cfg.jobs,
      [&](const ManifestRow& row) {
        const fs::path* p = row.file("seg");
        if (p == nullptr) p = &require_file(row, "gt");
        const LabelMap seg = read_label_map(*p);
        std::vector<BBoxRow> out;
        for (BBoxTarget target : {BBoxTarget::tumor_lesions, BBoxTarget::overall_liver}) {
          const auto boxes = component_bboxes(seg, target, cfg.postprocess.component_connectivity);
          for (std::size_t i = 0; i < boxes.size(); ++i) {
            out.push_back({row.case_id, target, i + 1, boxes[i], seg.spacing()});
          }
        }
        return out;
      },
      failures);
  log_cases(log, rows, failures);
  std::vector<BBoxRow> all;
  for (auto& r : results)
    if (r) all.insert(all.end(), r->begin(), r->end());
  write_text(cfg.out / "bbox.csv", bbox_csv(all));

  nlohmann::ordered_json cov;
  cov["patch"] = cfg.patch.size;
  for (BBoxTarget target : {BBoxTarget::tumor_lesions, BBoxTarget::overall_liver}) {
    std::vector<BBox> boxes;
    for (const auto& r : all)
      if (r.target == target) boxes.push_back(r.box);
    cov[std::string(to_string(target))] = {{"boxes", boxes.size()},
                                           {"coverage", round6(patch_coverage(boxes, cfg.patch))}};
  }
  write_text(cfg.out / "coverage.json", cov.dump(2) + "\n");
  return finish(cfg, log, "bbox", rows.size(), failures);
}

int cmd_plan_folds(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const auto rows = load_manifest(cfg);
  std::vector<CaseRecord> cases;
  for (const auto& row : rows) {
    if (!row.phase) throw ConfigError("manifest row " + row.case_id + " lacks a phase");
    try {
      cases.push_back({row.case_id, parse_phase(*row.phase)});
    } catch (const std::invalid_argument& e) {
      throw ConfigError("case " + row.case_id + ": " + e.what());
    }
  }
  std::vector<Fold> folds;
  try {
    folds = stratified_kfold(cases, cfg.folds, cfg.val_fraction, cfg.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  write_text(cfg.out / "folds.json", folds_json(folds));
  write_text(cfg.out / "folds.csv", folds_csv(folds));
  for (std::size_t f = 0; f < folds.size(); ++f) {
    log << "fold " << f + 1 << ": " << folds[f].train.size() << " train, " << folds[f].val.size() << " val, "
        << folds[f].test.size() << " test\n";
  }
  return finish(cfg, log, "plan-folds", cases.size(), {});
}

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.metrics_a.empty() || cfg.metrics_b.empty()) throw ConfigError("compare needs --a and --b metric CSVs");
  auto load = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + p.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
      return parse_metric_table(parse_csv(text));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(p.string() + ": " + e.what());
    }
  };
  const MetricTable a = load(cfg.metrics_a);
  const MetricTable b = load(cfg.metrics_b);
  if (a.case_ids.size() != b.case_ids.size()) throw ConfigError("metric tables list different cases");
  // Row of each A case in B.
  std::vector<std::size_t> in_b;
  for (const auto& id : a.case_ids) {
    const auto it = std::find(b.case_ids.begin(), b.case_ids.end(), id);
    if (it == b.case_ids.end()) throw ConfigError("case " + id + " missing from " + cfg.metrics_b.string());
    in_b.push_back(std::size_t(it - b.case_ids.begin()));
  }
  const auto names = cfg.compare_metrics.empty() ? default_compare_metrics() : cfg.compare_metrics;
  for (const auto& [metric, h] : cfg.hypotheses) {
    if (std::find(names.begin(), names.end(), metric) == names.end()) {
      throw ConfigError("hypothesis given for metric " + metric + ", which is not compared");
    }
  }
  std::vector<SignificanceResult> results;
  std::vector<Failure> failures;
  for (const auto& name : names) {
    const auto ca = a.columns.find(name);
    const auto cb = b.columns.find(name);
    if (ca == a.columns.end() || cb == b.columns.end()) throw ConfigError("unknown metric column " + name);
    PairedSample s;
    s.metric = name;
    const auto h = cfg.hypotheses.find(name);
    s.hypothesis = h != cfg.hypotheses.end() ? h->second : default_hypothesis(name);
    for (std::size_t i = 0; i < a.case_ids.size(); ++i) {
      const auto& va = ca->second[i];
      const auto& vb = cb->second[in_b[i]];
      if (va && vb) {
        s.a.push_back(*va);
        s.b.push_back(*vb);
      }
    }
    try {
      results.push_back(run_significance_protocol(s, cfg.alpha));
      const auto& r = results.back();
      log << name << ": " << to_string(r.test) << " " << to_string(r.hypothesis) << " p=" << format_float(r.p)
          << (r.significant ? " significant" : "") << (r.degenerate ? " degenerate" : "") << '\n';
    } catch (const std::invalid_argument& e) {
      failures.push_back({name, e.what()});
      log << name << ": FAILED: " << e.what() << '\n';
    }
  }
  write_text(cfg.out / "significance.csv", significance_csv(results));
  write_text(cfg.out / "significance.json", significance_json(results));
  return finish(cfg, log, "compare", names.size(), failures);
}

}  // namespace livseg::cli
