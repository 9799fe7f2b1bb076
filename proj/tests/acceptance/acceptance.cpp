// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "livseg/analysis.hpp"
#include "livseg/cli.hpp"
#include "livseg/metrics.hpp"
#include "livseg/morphology.hpp"
#include "livseg/pipeline.hpp"
#include "livseg/report.hpp"
#include "livseg/stats.hpp"
#include "livseg/uncertainty.hpp"
#include "support/oracles.hpp"
#include "support/phantoms.hpp"
#include "support/stats_fixtures.hpp"
#include "support/synthetic.hpp"

using namespace livseg;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Collects failures of one criterion; the first few are kept for the report.
struct Check {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> first;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    if (first.size() < 3) first.push_back(what);
  }
  bool passed() const { return failures == 0; }
};

bool close_opt(const std::optional<double>& a, const std::optional<double>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::fabs(*a - *b) <= tol;
}

// 1. Metrics against the all-pairs oracle.
Check metric_oracle() {
  Check c;
  std::mt19937_64 rng(2024);
  const auto t0 = Clock::now();
  for (int t = 0; t < 200; ++t) {
    const Shape s = oracle::random_shape(rng, 16);
    const Spacing sp = oracle::random_spacing(rng, 0.5, 5.0);
    const BinaryMask a = t % 2 ? oracle::random_blobs(rng, s, sp, 1 + t % 4) : oracle::random_mask(rng, s, sp, 0.25);
    const BinaryMask b = t % 3 ? oracle::random_blobs(rng, s, sp, 1 + t % 3) : oracle::random_mask(rng, s, sp, 0.15);
    const auto ref = oracle::surface(a, b);
    const std::string tag = "pair " + std::to_string(t);
    c.expect(dice(a, b) == oracle::dice(a, b), tag + " dice");
    for (double tau : {0.0, 1.0, 2.0, 4.5}) {
      c.expect(surface_dice(a, b, tau) == oracle::surface_dice(ref, tau), tag + " surface_dice");
    }
    c.expect(close_opt(hausdorff(a, b), oracle::hausdorff(ref, 100), 1e-9), tag + " hausdorff");
    c.expect(close_opt(hausdorff(a, b, 95), oracle::hausdorff(ref, 95), 1e-9), tag + " hd95");
    c.expect(close_opt(assd(a, b), oracle::assd(ref), 1e-9), tag + " assd");
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime");
  std::ostringstream d;
  d << "200 pairs in " << secs << " s";
  c.detail = d.str();
  return c;
}

// 2. Lesion uncertainty exactness and monotonicity.
Check uncertainty_exactness() {
  Check c;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> u(0.0F, 1.0F);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Shape s = oracle::random_shape(rng, 12);
    LabelMap seg(s, oracle::random_spacing(rng), Label::liver);
    const BinaryMask blobs = oracle::random_blobs(rng, s, seg.spacing(), 2);
    for (std::size_t v = 0; v < seg.size(); ++v)
      if (blobs[v]) seg[v] = Label::tumor;
    const auto lesions = extract_lesions(seg);
    if (lesions.empty()) continue;
    ProbVolume p = seg.like<float>(0.0F);
    for (auto& v : p.storage()) v = u(rng);
    const Lesion& l = lesions[std::size_t(t) % lesions.size()];
    long double sum = 0;
    for (auto v : l.voxels) sum += p[v];
    const double expect = double(1.0L - sum / (long double)l.voxels.size());
    const double got = lesion_uncertainty(l, p);
    worst = std::max(worst, std::fabs(got - expect));
    c.expect(std::fabs(got - expect) <= 1e-12, "trial " + std::to_string(t) + " exactness");

    // Raising one voxel lowers the score, lowering it raises the score.
    const std::size_t pick = l.voxels[std::size_t(rng() % l.voxels.size())];
    ProbVolume up = p, down = p;
    up[pick] = p[pick] + (1.0F - p[pick]) * (0.1F + 0.9F * u(rng));
    down[pick] = p[pick] * (0.9F * u(rng));
    if (up[pick] > p[pick]) c.expect(lesion_uncertainty(l, up) < got, "trial " + std::to_string(t) + " raise");
    if (down[pick] < p[pick]) c.expect(lesion_uncertainty(l, down) > got, "trial " + std::to_string(t) + " lower");
  }
  std::ostringstream d;
  d << "max |error| " << worst;
  c.detail = d.str();
  return c;
}

// 3. Post-processing invariants.
Check postprocess_invariants() {
  Check c;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> side(10, 22);
  for (int t = 0; t < 100; ++t) {
    const Shape s{side(rng), side(rng), side(rng) / 2 + 4};
    const LabelMap seg = phantom::messy(rng, s, oracle::random_spacing(rng, 0.6, 3.0));
    const std::string tag = "phantom " + std::to_string(t);
    for (PipelineMode mode : {PipelineMode::multiclass, PipelineMode::dual_binary}) {
      const LabelMap out = postprocess(seg, mode);
      const BinaryMask overall = mask_of(out, {Label::liver, Label::tumor});
      const std::string mtag = tag + " " + std::string(to_string(mode));
      const auto ids = oracle::components(overall, 26);
      c.expect(*std::max_element(ids.begin(), ids.end()) == 1, mtag + " liver components");
      c.expect(oracle::fill_holes(overall, 6) == overall, mtag + " liver holes");
      if (mode == PipelineMode::dual_binary) {
        const BinaryMask input_overall = mask_of(seg, {Label::liver, Label::tumor});
        const BinaryMask liver = oracle::fill_holes(keep_largest_component(input_overall), 6);
        bool subset = true;
        for (std::size_t v = 0; v < out.size(); ++v) subset &= out[v] != Label::tumor || (liver[v] && overall[v]);
        c.expect(subset, mtag + " tumor outside liver");
      } else {
        const BinaryMask tumor = mask_of(out, {Label::tumor});
        const BinaryMask healthy = mask_of(out, {Label::liver});
        const auto lesion_ids = oracle::components(tumor, 26);
        const int n = *std::max_element(lesion_ids.begin(), lesion_ids.end());
        for (int id = 1; id <= n; ++id) {
          BinaryMask comp = tumor.like<std::uint8_t>(0);
          for (std::size_t v = 0; v < comp.size(); ++v) comp[v] = lesion_ids[v] == id;
          const BinaryMask grown = oracle::morph_step(comp, 26, true);
          bool touches = false;
          for (std::size_t v = 0; v < grown.size(); ++v) touches |= grown[v] && healthy[v];
          c.expect(touches, mtag + " isolated lesion");
        }
      }
      c.expect(postprocess(out, mode) == out, mtag + " idempotence");
    }
  }
  c.detail = "100 phantoms, both modes";
  return c;
}

// 4. Fusion truth table over every 2x2x1 liver/tumor assignment.
Check fusion_truth_table() {
  Check c;
  const Spacing sp{1, 1, 1};
  for (unsigned bits = 0; bits < 256; ++bits) {
    BinaryMask liver({2, 2, 1}, sp, 0), tumor({2, 2, 1}, sp, 0);
    for (std::size_t v = 0; v < 4; ++v) {
      liver[v] = (bits >> v) & 1U;
      tumor[v] = (bits >> (v + 4)) & 1U;
    }
    const LabelMap f = fuse_dual_binary(liver, tumor);
    for (std::size_t v = 0; v < 4; ++v) {
      const Label expect = liver[v] ? (tumor[v] ? Label::tumor : Label::liver) : Label::background;
      c.expect(f[v] == expect, "assignment " + std::to_string(bits));
    }
  }
  c.detail = "256 assignments";
  return c;
}

// 5. Exact Wilcoxon equals enumeration; exact and normal paths agree at n = 20.
Check wilcoxon_exactness() {
  Check c;
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> small(-5, 5);
  std::normal_distribution<double> g(0.25, 1.0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + std::size_t(t % 12);
    std::vector<double> d;
    while (d.size() < n) {
      const double v = t % 3 == 0 ? double(small(rng)) : g(rng);
      if (v != 0.0) d.push_back(v);
    }
    for (Alternative alt : {Alternative::greater, Alternative::less}) {
      c.expect(wilcoxon_signed_rank(d, alt).p == oracle::wilcoxon_enumerate(d, alt == Alternative::greater),
               "vector " + std::to_string(t));
    }
  }
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    std::vector<double> d(20);
    for (auto& v : d) v = g(rng);
    for (Alternative alt : {Alternative::greater, Alternative::less}) {
      const double gap = std::fabs(wilcoxon_signed_rank(d, alt).p - wilcoxon_normal_p(d, alt));
      worst = std::max(worst, gap);
      c.expect(gap <= 0.02, "n=20 vector " + std::to_string(t));
    }
  }
  std::ostringstream d;
  d << "500 exact vectors, n=20 max gap " << worst;
  c.detail = d.str();
  return c;
}

// 6. Shapiro-Wilk against recorded reference values, and affine invariance.
Check shapiro_fixtures() {
  Check c;
  double worst = 0.0;
  std::size_t smallest = 100000, largest = 0;
  for (const auto& f : fixtures::kShapiro) {
    const auto x = fixtures::shapiro_vector(f.name);
    smallest = std::min(smallest, x.size());
    largest = std::max(largest, x.size());
    const ShapiroResult r = shapiro_wilk(x);
    worst = std::max({worst, std::fabs(r.w - f.w), std::fabs(r.p - f.p)});
    c.expect(std::fabs(r.w - f.w) <= 1e-3 && std::fabs(r.p - f.p) <= 1e-3, std::string(f.name));
  }
  c.expect(std::size(fixtures::kShapiro) >= 10 && smallest <= 5 && largest >= 500, "fixture coverage");
  std::mt19937_64 rng(21);
  std::normal_distribution<double> g(0, 1);
  std::uniform_real_distribution<double> scale(0.01, 100.0), shift(-1e3, 1e3);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> x(3 + std::size_t(t) * 5);
    for (auto& v : x) v = t % 2 ? std::exp(g(rng)) : g(rng);
    const double a = scale(rng), b = shift(rng);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = a * x[i] + b;
    const auto rx = shapiro_wilk(x), ry = shapiro_wilk(y);
    c.expect(std::fabs(rx.w - ry.w) <= 1e-9 && std::fabs(rx.p - ry.p) <= 1e-9, "affine " + std::to_string(t));
  }
  std::ostringstream d;
  d << std::size(fixtures::kShapiro) << " fixtures n=" << smallest << ".." << largest << ", max |error| " << worst;
  c.detail = d.str();
  return c;
}

PairedSample from_differences(const std::vector<double>& d) {
  PairedSample s{"m", {}, {}, Hypothesis::a_greater_than_b};
  for (double v : d) {
    s.a.push_back(5.0 + v);
    s.b.push_back(5.0);
  }
  return s;
}

// 7. The normality gate picks the test.
Check protocol_routing() {
  Check c;
  const auto normalish = run_significance_protocol(from_differences(fixtures::power_family(fixtures::kPowerShapiro038)));
  c.expect(normalish.shapiro_p && std::fabs(*normalish.shapiro_p - 0.38) < 1e-3, "power family p=0.38");
  c.expect(normalish.test == TestKind::t_test, "p=0.38 routes to T-test");
  const auto skewed = run_significance_protocol(from_differences(fixtures::power_family(fixtures::kPowerShapiro3em4)));
  c.expect(skewed.shapiro_p && std::fabs(*skewed.shapiro_p - 3.0e-4) < 1e-6, "power family p=3e-4");
  c.expect(skewed.test == TestKind::wilcoxon, "p=3e-4 routes to Wilcoxon");

  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.2, 1.0);
  std::size_t t_tests = 0, wilcoxons = 0;
  for (int t = 0; t < 400; ++t) {
    std::vector<double> d(3 + std::size_t(t % 40));
    for (auto& v : d) v = t % 2 ? g(rng) : std::pow(std::fabs(g(rng)), 3.0) * (g(rng) > 0 ? 1 : -1);
    PairedSample s = from_differences(d);
    s.hypothesis = t % 4 < 2 ? Hypothesis::a_greater_than_b : Hypothesis::a_less_than_b;
    const auto r = run_significance_protocol(s);
    const Alternative alt = s.hypothesis == Hypothesis::a_greater_than_b ? Alternative::greater : Alternative::less;
    std::vector<double> diff(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) diff[i] = s.a[i] - s.b[i];
    const double sw = shapiro_wilk(diff).p;
    const std::string tag = "sample " + std::to_string(t);
    c.expect(r.shapiro_p && *r.shapiro_p == sw, tag + " shapiro p");
    if (sw >= 0.05) {
      ++t_tests;
      c.expect(r.test == TestKind::t_test && r.p == paired_t_test_one_sided(diff, alt), tag + " T-test branch");
    } else {
      ++wilcoxons;
      c.expect(r.test == TestKind::wilcoxon && r.p == wilcoxon_signed_rank(diff, alt).p, tag + " Wilcoxon branch");
    }
    c.expect(r.significant == (r.p < 0.05), tag + " decision");
  }
  c.expect(t_tests > 0 && wilcoxons > 0, "both branches exercised");
  std::ostringstream d;
  d << "fixtures plus " << t_tests << " T-test and " << wilcoxons << " Wilcoxon samples";
  c.detail = d.str();
  return c;
}

// 8. Phase-stratified folds on the 60-case cohort.
Check fold_construction() {
  Check c;
  std::vector<CaseRecord> cases;
  const std::pair<Phase, int> counts[] = {
      {Phase::arterial, 33}, {Phase::delayed, 8}, {Phase::non_contrast, 2}, {Phase::portal, 10}, {Phase::unknown, 7}};
  int n = 0;
  for (const auto& [phase, k] : counts)
    for (int i = 0; i < k; ++i) cases.push_back({"case" + std::to_string(n++), phase});
  std::mt19937_64 shuffle_rng(0);
  std::shuffle(cases.begin(), cases.end(), shuffle_rng);
  std::map<std::string, Phase> phase;
  std::map<Phase, int> total;
  for (const auto& r : cases) {
    phase[r.id] = r.phase;
    ++total[r.phase];
  }
  const auto folds = stratified_kfold(cases, 5, 8.0 / 48.0, 2025);
  c.expect(folds.size() == 5, "fold count");
  std::map<std::string, int> tested;
  double worst = 0.0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Fold& fold = folds[f];
    const std::string tag = "fold " + std::to_string(f);
    c.expect(fold.train.size() == 40 && fold.val.size() == 8 && fold.test.size() == 12, tag + " sizes");
    std::set<std::string> all(fold.train.begin(), fold.train.end());
    all.insert(fold.val.begin(), fold.val.end());
    all.insert(fold.test.begin(), fold.test.end());
    c.expect(all.size() == 60, tag + " partition");
    for (const auto& id : fold.test) ++tested[id];
    const std::pair<const std::vector<std::string>*, double> splits[] = {
        {&fold.train, 40.0 / 60.0}, {&fold.val, 8.0 / 60.0}, {&fold.test, 12.0 / 60.0}};
    for (const auto& [ids, share] : splits) {
      std::map<Phase, int> got;
      for (const auto& id : *ids) ++got[phase.at(id)];
      for (const auto& [ph, k] : total) {
        const double dev = std::fabs(got[ph] - k * share);
        worst = std::max(worst, dev);
        c.expect(dev <= 1.0 + 1e-9, tag + " phase " + std::string(to_string(ph)));
      }
    }
  }
  c.expect(tested.size() == 60, "every case tested");
  for (const auto& [id, k] : tested) c.expect(k == 1, id + " tested once");
  const auto again = stratified_kfold(cases, 5, 8.0 / 48.0, 2025);
  c.expect(folds_json(folds) == folds_json(again), "byte-identical rerun");
  std::ostringstream d;
  d << "max phase deviation " << worst;
  c.detail = d.str();
  return c;
}

// 9. FP lesions carry more uncertainty, and uncertainty falls with volume.
Check uncertainty_direction() {
  Check c;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double tp_sum = 0, fp_sum = 0;
  std::size_t tp_n = 0, fp_n = 0;
  std::vector<double> unc, vol;
  for (int k = 0; k < 20; ++k) {
    const Shape s{40, 40, 20};
    const Spacing sp{0.8, 0.8, 2.0};
    LabelMap gt(s, sp, Label::background);
    phantom::ellipsoid(gt, {20, 20, 10}, {17, 17, 9}, Label::liver);
    LabelMap pred = gt;
    // True lesions of varied size, present in both maps.
    for (int t = 0; t < 4; ++t) {
      const double r = 1.0 + 4.0 * u(rng);
      const std::array<double, 3> ctr{8 + t * 8.0, 12 + 16 * u(rng), 6 + 8 * u(rng)};
      phantom::ellipsoid(gt, ctr, {r, r, std::max(0.6, r / 2.5)}, Label::tumor);
      phantom::ellipsoid(pred, ctr, {r, r, std::max(0.6, r / 2.5)}, Label::tumor);
    }
    // Injected false positives, small and predicted only.
    for (int t = 0; t < 2; ++t) {
      const double r = 0.8 + 1.2 * u(rng);
      phantom::ellipsoid(pred, {10 + t * 20.0, 31, 14}, {r, r, 0.6}, Label::tumor);
    }
    const BinaryMask tumor = mask_of(pred, {Label::tumor});
    const BinaryMask edge = extract_boundary(tumor);
    ProbVolume p = pred.like<float>(0.0F);
    for (std::size_t v = 0; v < p.size(); ++v) {
      if (!tumor[v]) continue;
      const bool real = gt[v] == Label::tumor;
      const double core = real ? 0.85 + 0.14 * u(rng) : 0.60 + 0.15 * u(rng);
      p[v] = float(edge[v] ? core - 0.25 : core);
    }
    const LesionReport r = build_lesion_report("c" + std::to_string(k), pred, p, &gt);
    for (const auto& l : r.lesions) {
      if (l.status == LesionStatus::tp) {
        tp_sum += *l.uncertainty;
        ++tp_n;
      } else {
        fp_sum += *l.uncertainty;
        ++fp_n;
      }
      unc.push_back(*l.uncertainty);
      vol.push_back(l.volume_mm3);
    }
  }
  c.expect(tp_n > 0 && fp_n > 0, "both statuses present");
  const double tp_mean = tp_sum / double(std::max<std::size_t>(tp_n, 1));
  const double fp_mean = fp_sum / double(std::max<std::size_t>(fp_n, 1));
  const double rho = spearman(unc, vol);
  c.expect(fp_mean > tp_mean, "mean FP uncertainty above TP");
  c.expect(rho < 0.0, "negative rank correlation");
  std::ostringstream d;
  d << tp_n << " TP mean " << tp_mean << ", " << fp_n << " FP mean " << fp_mean << ", spearman " << rho;
  c.detail = d.str();
  return c;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = synthetic::slurp(e.path());
  }
  return files;
}

// 10. End-to-end run on a full-resolution case: time and byte-identity.
Check end_to_end() {
  Check c;
  const fs::path root = fs::temp_directory_path() / "livseg_acceptance_e2e";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream manifest(root / "manifest.csv");
    manifest << synthetic::kManifestHeader << '\n';
    const auto big = synthetic::make_case(1, {512, 512, 100}, {0.75, 0.75, 2.5});
    manifest << synthetic::write_case(big, root, "big", false) << '\n';
  }
  {
    std::ofstream single(root / "single.csv");
    single << synthetic::kManifestHeader << '\n' << "big,inputs/big_prob.nii,inputs/big_liver.nii,"
           << "inputs/big_tumor.nii,inputs/big_gt.nii\n";
    std::ofstream manifest(root / "manifest.csv", std::ios::app);
    for (int k = 0; k < 3; ++k) {
      const std::string id = "small" + std::to_string(k);
      manifest << synthetic::write_case(synthetic::make_case(10 + k, {64, 60, 24}, {1.2, 1.2, 3.0}), root, id)
               << '\n';
    }
  }
  std::ostringstream log;
  double best = 1e9;
  for (PipelineMode mode : {PipelineMode::multiclass, PipelineMode::dual_binary}) {
    cli::RunConfig cfg;
    cfg.mode = mode;
    cfg.manifest = root / "single.csv";
    cfg.out = root / ("timed_" + std::string(to_string(mode)));
    const auto t0 = Clock::now();
    const int rc = cli::cmd_run(cfg, log);
    const double secs = seconds_since(t0);
    best = std::min(best, secs);
    c.expect(rc == cli::kExitOk, "timed run exit code");
    c.expect(secs < 30.0, "512x512x100 " + std::string(to_string(mode)) + " took " + std::to_string(secs) + " s");
    const MetricTable m = parse_metric_table(parse_csv(synthetic::slurp(cfg.out / "case_metrics.csv")));
    std::size_t defined = 0;
    for (const auto& name : metric_names()) defined += m.case_ids.size() == 1 && m.columns.at(name)[0].has_value();
    c.expect(defined == metric_names().size() && m.columns.at("tumor_burden_abs_error")[0].has_value(),
             "timed run produced every metric");
    c.expect(fs::exists(cfg.out / "labels" / "big.nii.gz") && fs::exists(cfg.out / "lesions.json"), "timed outputs");
    if (!m.case_ids.empty()) {
      c.detail += std::string(to_string(mode)) + " " + std::to_string(secs) + " s (liver dice " +
                  format_float(*m.columns.at("liver_dice")[0]) + "); ";
    }
  }
  const std::pair<std::string, std::size_t> runs[] = {{"jobs1", 1}, {"jobs3", 3}, {"jobs1_again", 1}};
  std::vector<std::map<std::string, std::string>> outputs;
  for (const auto& [name, jobs] : runs) {
    cli::RunConfig cfg;
    cfg.manifest = root / "manifest.csv";
    cfg.out = root / name;
    cfg.jobs = jobs;
    c.expect(cli::cmd_run(cfg, log) == cli::kExitOk, name + " exit code");
    outputs.push_back(snapshot(cfg.out));
  }
  c.expect(outputs[0].size() >= 8, "expected output files");
  for (std::size_t r = 1; r < outputs.size(); ++r) {
    c.expect(outputs[r] == outputs[0], runs[r].first + " differs from " + runs[0].first);
  }
  c.detail += std::to_string(outputs[0].size()) + " files compared across jobs=1/3/1";
  if (!c.passed()) std::cout << log.str();
  fs::remove_all(root);
  return c;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Check()>> criteria[] = {
      {"metric oracle equivalence", metric_oracle},
      {"lesion uncertainty exactness and monotonicity", uncertainty_exactness},
      {"post-processing invariants", postprocess_invariants},
      {"dual-binary fusion truth table", fusion_truth_table},
      {"wilcoxon exactness", wilcoxon_exactness},
      {"shapiro-wilk reference values and affine invariance", shapiro_fixtures},
      {"significance protocol routing", protocol_routing},
      {"phase-stratified fold construction", fold_construction},
      {"uncertainty direction on a synthetic cohort", uncertainty_direction},
      {"end-to-end determinism and runtime", end_to_end},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Check c;
    try {
      c = run();
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    failed += !c.passed();
    std::cout << (c.passed() ? "PASS" : "FAIL") << "  [" << index << "] " << name << " (" << c.checks << " checks";
    if (!c.detail.empty()) std::cout << "; " << c.detail;
    std::cout << ")\n";
    for (const auto& f : c.first) std::cout << "      failed: " << f << '\n';
    std::cout.flush();
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
