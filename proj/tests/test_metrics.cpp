#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "livseg/distance.hpp"
#include "livseg/metrics.hpp"
#include "support/oracles.hpp"
#include "support/phantoms.hpp"

using namespace livseg;

namespace {

BinaryMask voxels(const Shape& s, const Spacing& sp, std::initializer_list<Index3> pts) {
  BinaryMask m(s, sp, 0);
  for (const auto& p : pts) m(p.i, p.j, p.k) = 1;
  return m;
}

BinaryMask respaced(const BinaryMask& m, const Spacing& sp) {
  return BinaryMask(m.shape(), sp, std::vector<std::uint8_t>(m.storage()));
}

void check_close(const std::optional<double>& got, const std::optional<double>& want, double tol = 1e-9) {
  REQUIRE(got.has_value() == want.has_value());
  if (got) CHECK(std::fabs(*got - *want) <= tol);
}

}  // namespace

TEST_CASE("squared distance transform matches brute force on anisotropic grids") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 40; ++t) {
    const Shape s = oracle::random_shape(rng, 12);
    const Spacing sp = oracle::random_spacing(rng);
    const BinaryMask sites = oracle::random_mask(rng, s, sp, 0.05);
    const auto edt = squared_distance_transform(sites);
    const auto pts = oracle::points(sites);
    for (std::size_t v = 0; v < sites.size(); ++v) {
      const Index3 c = sites.coords(v);
      const oracle::Point p{long(c.i), long(c.j), long(c.k)};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : pts) best = std::min(best, oracle::mm_distance(p, q, sp));
      if (pts.empty()) {
        CHECK(std::isinf(edt[v]));
      } else {
        CHECK(std::fabs(std::sqrt(edt[v]) - best) <= 1e-9);
      }
    }
  }
}

TEST_CASE("directed distances agree with all-pairs search") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 40; ++t) {
    const Shape s = oracle::random_shape(rng, 14);
    const Spacing sp = oracle::random_spacing(rng);
    const BinaryMask a = oracle::random_mask(rng, s, sp, 0.1);
    const BinaryMask b = oracle::random_mask(rng, s, sp, 0.1);
    const auto got = distances_to(a, b);
    const auto want = oracle::directed(oracle::points(a), oracle::points(b), sp);
    REQUIRE(got.size() == want.size());
    for (std::size_t n = 0; n < got.size(); ++n) {
      if (std::isinf(want[n])) {
        CHECK(std::isinf(got[n]));
      } else {
        CHECK(std::fabs(got[n] - want[n]) <= 1e-9);
      }
    }
  }
}

TEST_CASE("overall liver includes tumor") {
  LabelMap seg({3, 1, 1}, {1, 1, 1}, Label::background);
  seg[0] = Label::liver;
  seg[1] = Label::tumor;
  const BinaryMask m = overall_liver_mask(seg);
  CHECK(m[0] == 1);
  CHECK(m[1] == 1);
  CHECK(m[2] == 0);
  CHECK(count_foreground(tumor_mask(seg)) == 1);
  CHECK(count_foreground(overall_liver_mask(LabelMap({2, 2, 2}, {1, 1, 1}, Label::liver))) == 8);
  CHECK(count_foreground(overall_liver_mask(LabelMap({2, 2, 2}, {1, 1, 1}, Label::background))) == 0);
}

TEST_CASE("dice examples") {
  const Shape s{4, 1, 1};
  const Spacing sp{1, 1, 1};
  const BinaryMask a = voxels(s, sp, {{0, 0, 0}, {1, 0, 0}});
  const BinaryMask b = voxels(s, sp, {{1, 0, 0}, {2, 0, 0}});
  const BinaryMask c = voxels(s, sp, {{3, 0, 0}});
  const BinaryMask e(s, sp, 0);
  CHECK(dice(a, a) == 1.0);
  CHECK(dice(a, c) == 0.0);
  CHECK(dice(a, b) == 0.5);
  CHECK(dice(e, e) == 1.0);
  CHECK(dice(a, e) == 0.0);
  CHECK_THROWS_AS(dice(a, BinaryMask({4, 1, 1}, {1, 1, 2}, 0)), GridMismatch);
}

TEST_CASE("surface dice examples") {
  const Shape s{4, 1, 1};
  const Spacing sp{1.5, 1, 1};
  const BinaryMask a = voxels(s, sp, {{0, 0, 0}});
  const BinaryMask b = voxels(s, sp, {{2, 0, 0}});  // 3 mm away
  CHECK(surface_dice(a, b, 2.0) == 0.0);
  CHECK(surface_dice(a, b, 3.0) == 1.0);
  CHECK(surface_dice(a, a, 0.0) == 1.0);
  const BinaryMask e(s, sp, 0);
  CHECK(surface_dice(e, e, 2.0) == 1.0);
  CHECK(surface_dice(a, e, 2.0) == 0.0);

  std::mt19937_64 rng(9);
  for (int t = 0; t < 20; ++t) {
    const Shape rs = oracle::random_shape(rng, 10);
    const Spacing rsp = oracle::random_spacing(rng);
    const BinaryMask x = oracle::random_mask(rng, rs, rsp, 0.2);
    const BinaryMask y = oracle::random_mask(rng, rs, rsp, 0.2);
    const double diameter =
        std::sqrt(std::pow(rs.nx * rsp.dx, 2) + std::pow(rs.ny * rsp.dy, 2) + std::pow(rs.nz * rsp.dz, 2));
    if (count_foreground(x) && count_foreground(y)) CHECK(surface_dice(x, y, diameter) == 1.0);
  }
}

TEST_CASE("hausdorff examples") {
  const Spacing sp{1, 1, 4};
  const BinaryMask a = voxels({1, 1, 2}, sp, {{0, 0, 0}});
  const BinaryMask b = voxels({1, 1, 2}, sp, {{0, 0, 1}});
  CHECK(hausdorff(a, b) == 4.0);
  CHECK(hausdorff(a, a) == 0.0);

  // B at 1 mm and 5 mm from A.
  const Spacing unit{1, 1, 1};
  const BinaryMask p = voxels({7, 1, 1}, unit, {{1, 0, 0}});
  const BinaryMask q = voxels({7, 1, 1}, unit, {{0, 0, 0}, {6, 0, 0}});
  CHECK(hausdorff(p, q, 100.0) == 5.0);

  const BinaryMask e({7, 1, 1}, unit, 0);
  CHECK_FALSE(hausdorff(p, e).has_value());
  CHECK(hausdorff(e, e) == 0.0);
}

TEST_CASE("assd examples") {
  const Spacing sp{1, 1, 1};
  BinaryMask lo({4, 4, 5}, sp, 0), hi({4, 4, 5}, sp, 0);
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t i = 0; i < 4; ++i) {
      lo(i, j, 1) = 1;
      hi(i, j, 3) = 1;
    }
  CHECK(assd(lo, hi) == 2.0);
  CHECK(assd(lo, lo) == 0.0);
  CHECK_FALSE(assd(lo, BinaryMask({4, 4, 5}, sp, 0)).has_value());
}

TEST_CASE("percentile uses linear interpolation") {
  CHECK(percentile_of({1, 2, 3, 4}, 50) == 2.5);
  CHECK(percentile_of({1, 2, 3, 4, 5}, 95) == doctest::Approx(4.8));
  CHECK(percentile_of({7}, 95) == 7);
  CHECK(percentile_of({3, 1, 2}, 100) == 3);
  CHECK(percentile_of({3, 1, 2}, 0) == 1);
}

TEST_CASE("surface metrics agree with the all-pairs oracle") {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 60; ++t) {
    const Shape s = oracle::random_shape(rng, 16);
    const Spacing sp = oracle::random_spacing(rng);
    const BinaryMask a = t % 2 ? oracle::random_blobs(rng, s, sp, 3) : oracle::random_mask(rng, s, sp, 0.3);
    const BinaryMask b = t % 3 ? oracle::random_blobs(rng, s, sp, 2) : oracle::random_mask(rng, s, sp, 0.2);
    const auto ref = oracle::surface(a, b);
    for (double tau : {0.0, 1.0, 2.0, 3.7}) CHECK(surface_dice(a, b, tau) == oracle::surface_dice(ref, tau));
    check_close(hausdorff(a, b, 100), oracle::hausdorff(ref, 100));
    check_close(hausdorff(a, b, 95), oracle::hausdorff(ref, 95));
    check_close(assd(a, b), oracle::assd(ref));
    CHECK(dice(a, b) == oracle::dice(a, b));
  }
}

TEST_CASE("metric symmetry, identity and ordering") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 40; ++t) {
    const Shape s = oracle::random_shape(rng, 12);
    const Spacing sp = oracle::random_spacing(rng);
    const BinaryMask a = oracle::random_blobs(rng, s, sp, 2);
    const BinaryMask b = oracle::random_blobs(rng, s, sp, 2);
    CHECK(dice(a, b) == dice(b, a));
    CHECK(surface_dice(a, b, 2.0) == surface_dice(b, a, 2.0));
    check_close(hausdorff(a, b), hausdorff(b, a), 0.0);
    check_close(assd(a, b), assd(b, a), 1e-12);
    CHECK(dice(a, a) == 1.0);
    CHECK(surface_dice(a, a, 0.5) == 1.0);
    CHECK(hausdorff(a, a) == 0.0);
    CHECK(assd(a, a) == 0.0);
    CHECK(*hausdorff(a, b) >= *assd(a, b) - 1e-12);
    double last = 0.0;
    for (double tau = 0.0; tau < 20.0; tau += 0.5) {
      const double sd = surface_dice(a, b, tau);
      CHECK(sd >= last);
      last = sd;
    }
  }
}

TEST_CASE("uniform spacing scale k scales distances by k") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const Shape s = oracle::random_shape(rng, 12);
    const Spacing sp = oracle::random_spacing(rng);
    const double k = std::uniform_real_distribution<double>(0.3, 4.0)(rng);
    const Spacing ks{sp.dx * k, sp.dy * k, sp.dz * k};
    const BinaryMask a = oracle::random_blobs(rng, s, sp, 2);
    const BinaryMask b = oracle::random_blobs(rng, s, sp, 2);
    const BinaryMask ka = respaced(a, ks), kb = respaced(b, ks);
    CHECK(*hausdorff(ka, kb) == doctest::Approx(k * *hausdorff(a, b)).epsilon(1e-12));
    CHECK(*assd(ka, kb) == doctest::Approx(k * *assd(a, b)).epsilon(1e-12));
    CHECK(dice(ka, kb) == dice(a, b));
    // Can differ only if some distance sits within rounding of tau.
    CHECK(surface_dice(ka, kb, 2.0 * k) == doctest::Approx(surface_dice(a, b, 2.0)));
  }
}

TEST_CASE("tumor burden") {
  LabelMap seg({10, 10, 1}, {0.7, 0.7, 3}, Label::liver);
  for (std::size_t i = 0; i < 10; ++i) seg(i, 0, 0) = Label::tumor;
  CHECK(*tumor_burden(seg) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(tumor_burden(LabelMap({2, 2, 2}, {1, 1, 1}, Label::liver)) == 0.0);
  CHECK_FALSE(tumor_burden(LabelMap({2, 2, 2}, {1, 1, 1}, Label::background)).has_value());
}

TEST_CASE("burden rmse") {
  auto with = [](double pred, double gt) {
    CaseMetrics c;
    c.tumor_burden_pred = pred;
    c.tumor_burden_gt = gt;
    return c;
  };
  std::vector<CaseMetrics> same{with(0.3, 0.3), with(0.1, 0.1)};
  CHECK(rmse_tumor_burden(same) == 0.0);
  std::vector<CaseMetrics> one{with(0.2, 0.1)};
  CHECK(rmse_tumor_burden(one) == doctest::Approx(0.1).epsilon(1e-12));
  std::vector<CaseMetrics> two{with(0.1, 0.1), with(0.3, 0.1)};
  CHECK(rmse_tumor_burden(two) == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  CaseMetrics undefined;
  std::vector<CaseMetrics> none{undefined};
  CHECK_THROWS_AS(rmse_tumor_burden(none), std::invalid_argument);
}

TEST_CASE("evaluate case") {
  std::mt19937_64 rng(8);
  const LabelMap gt = phantom::messy(rng, {16, 14, 10}, {0.8, 0.8, 2.5});
  const CaseMetrics same = evaluate_case(gt, gt);
  for (const StructureMetrics* m : {&same.liver, &same.tumor}) {
    CHECK(m->dice == 1.0);
    CHECK(m->surface_dice == 1.0);
    CHECK(m->hausdorff_mm == 0.0);
    CHECK(m->assd_mm == 0.0);
  }
  CHECK(same.tumor_burden_abs_error() == 0.0);

  LabelMap no_tumor = gt;
  for (auto& l : no_tumor.storage())
    if (l == Label::tumor) l = Label::liver;
  const CaseMetrics missing = evaluate_case(no_tumor, gt);
  CHECK(missing.tumor.dice == 0.0);
  CHECK_FALSE(missing.tumor.hausdorff_mm.has_value());
  CHECK_FALSE(missing.tumor.assd_mm.has_value());

  CHECK_THROWS_AS(evaluate_case(gt, LabelMap({16, 14, 10}, {1, 1, 1}, Label::background)), GridMismatch);
}

TEST_CASE("evaluate case equals the oracle on random phantoms") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 15; ++t) {
    const Shape s = oracle::random_shape(rng, 16);
    const Spacing sp = oracle::random_spacing(rng);
    const LabelMap pred = phantom::messy(rng, s, sp);
    const LabelMap gt = phantom::messy(rng, s, sp);
    const MetricOptions opt{1.5, 95.0};
    const CaseMetrics c = evaluate_case(pred, gt, opt, "x");
    auto check_structure = [&](const StructureMetrics& m, const BinaryMask& a, const BinaryMask& b) {
      const auto ref = oracle::surface(a, b);
      CHECK(m.dice == oracle::dice(a, b));
      CHECK(m.surface_dice == oracle::surface_dice(ref, 1.5));
      check_close(m.hausdorff_mm, oracle::hausdorff(ref, 95));
      check_close(m.assd_mm, oracle::assd(ref));
    };
    check_structure(c.liver, overall_liver_mask(pred), overall_liver_mask(gt));
    check_structure(c.tumor, tumor_mask(pred), tumor_mask(gt));
  }
}

TEST_CASE("aggregate") {
  auto with_dice = [](double d) {
    CaseMetrics c;
    c.liver.dice = d;
    c.tumor.dice = d;
    c.tumor_burden_pred = 0.1;
    c.tumor_burden_gt = 0.1;
    return c;
  };
  std::vector<CaseMetrics> cases{with_dice(0.4), with_dice(0.6)};
  const AggregateReport r = aggregate(cases);
  CHECK(r.find("liver_dice").mean == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.find("liver_dice").stddev == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(r.find("liver_dice").defined == 2);
  CHECK(r.find("liver_hausdorff_mm").excluded == 2);
  CHECK(r.burden_rmse == 0.0);

  const AggregateReport s = aggregate(cases, StdKind::sample);
  CHECK(s.find("liver_dice").stddev == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));

  std::vector<CaseMetrics> identical{with_dice(0.8), with_dice(0.8), with_dice(0.8)};
  CHECK(aggregate(identical).find("tumor_dice").stddev == 0.0);
  std::vector<CaseMetrics> empty;
  CHECK_THROWS_AS(aggregate(empty), std::invalid_argument);
  CHECK(metric_names().size() == 8);
}
