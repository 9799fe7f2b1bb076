#include "livseg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace livseg {

std::array<double, 3> BBox::extent_mm(const Spacing& s) const {
  const auto e = extent();
  return {double(e[0]) * s.dx, double(e[1]) * s.dy, double(e[2]) * s.dz};
}

std::string_view to_string(BBoxTarget t) {
  return t == BBoxTarget::tumor_lesions ? "tumor_lesions" : "overall_liver";
}

namespace {

template <class Range>
BBox bbox_of(const Volume<Label>& grid, const Range& voxels) {
  BBox b;
  b.min = {grid.shape().nx, grid.shape().ny, grid.shape().nz};
  b.max = {0, 0, 0};
  for (std::size_t v : voxels) {
    const Index3 p = grid.coords(v);
    const std::array<std::size_t, 3> c{p.i, p.j, p.k};
    for (int a = 0; a < 3; ++a) {
      b.min[a] = std::min(b.min[a], c[a]);
      b.max[a] = std::max(b.max[a], c[a]);
    }
  }
  return b;
}

}  // namespace

std::vector<BBox> component_bboxes(const LabelMap& seg, BBoxTarget target, Connectivity c) {
  std::vector<BBox> out;
  if (target == BBoxTarget::tumor_lesions) {
    const ComponentLabeling cc = label_components(mask_of(seg, {Label::tumor}), c);
    for (std::size_t id = 1; id <= cc.count(); ++id) out.push_back(bbox_of(seg, cc.voxels(id)));
    return out;
  }
  std::vector<std::size_t> liver;
  for (std::size_t v = 0; v < seg.size(); ++v) {
    if (seg[v] != Label::background) liver.push_back(v);
  }
  if (!liver.empty()) out.push_back(bbox_of(seg, liver));
  return out;
}

void PatchSpec::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (size[a] < 1) throw std::invalid_argument("patch size must be >= 1");
    if (!(overlap[a] >= 0.0 && overlap[a] < 1.0)) throw std::invalid_argument("patch overlap must lie in [0,1)");
  }
}

double patch_coverage(std::span<const BBox> boxes, const PatchSpec& patch) {
  patch.validate();
  if (boxes.empty()) return 1.0;
  std::size_t covered = 0;
  for (const auto& b : boxes) {
    const auto e = b.extent();
    covered += e[0] <= patch.size[0] && e[1] <= patch.size[1] && e[2] <= patch.size[2];
  }
  return double(covered) / double(boxes.size());
}

PatchGrid plan_patch_grid(const Shape& shape, const PatchSpec& patch) {
  patch.validate();
  const auto extent = shape.as_array();
  PatchGrid grid;
  std::array<std::vector<std::size_t>, 3> axis_origins;
  for (int a = 0; a < 3; ++a) {
    const std::size_t size = std::min(patch.size[a], extent[a]);
    grid.patch_size[a] = size;
    const auto stride = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::ceil(double(size) * (1.0 - patch.overlap[a]) - 1e-9)));
    auto& o = axis_origins[a];
    std::size_t origin = 0;
    o.push_back(origin);
    while (origin + size < extent[a]) {
      origin = std::min(origin + stride, extent[a] - size);
      o.push_back(origin);
    }
  }
  for (std::size_t k : axis_origins[2]) {
    for (std::size_t j : axis_origins[1]) {
      for (std::size_t i : axis_origins[0]) grid.origins.push_back({i, j, k});
    }
  }
  return grid;
}

std::vector<ProbVolume> aggregate_patch_probabilities(std::span<const PatchFragment> fragments,
                                                      const Shape& shape, const Spacing& spacing) {
  if (fragments.empty()) throw std::invalid_argument("no patch fragments");
  const std::size_t channels = fragments.front().channels.size();
  if (channels == 0) throw std::invalid_argument("patch fragment has no channels");
  std::vector<std::vector<double>> sums(channels, std::vector<double>(shape.size(), 0.0));
  std::vector<std::uint32_t> hits(shape.size(), 0);
  const Volume<std::uint8_t> lattice(shape, spacing, 0);

  for (const auto& f : fragments) {
    if (f.channels.size() != channels) throw std::invalid_argument("patch fragments disagree on channel count");
    const Shape& ps = f.channels.front().shape();
    for (const auto& ch : f.channels) {
      if (!(ch.shape() == ps)) throw std::invalid_argument("patch channels disagree on shape");
    }
    if (f.origin[0] + ps.nx > shape.nx || f.origin[1] + ps.ny > shape.ny || f.origin[2] + ps.nz > shape.nz) {
      throw std::invalid_argument("patch fragment extends past the volume");
    }
    for (std::size_t k = 0; k < ps.nz; ++k) {
      for (std::size_t j = 0; j < ps.ny; ++j) {
        for (std::size_t i = 0; i < ps.nx; ++i) {
          const std::size_t dst = lattice.index(f.origin[0] + i, f.origin[1] + j, f.origin[2] + k);
          const std::size_t src = i + ps.nx * (j + ps.ny * k);
          ++hits[dst];
          for (std::size_t c = 0; c < channels; ++c) sums[c][dst] += double(f.channels[c][src]);
        }
      }
    }
  }

  std::vector<ProbVolume> out;
  for (std::size_t c = 0; c < channels; ++c) {
    ProbVolume vol(shape, spacing, 0.0F);
    for (std::size_t v = 0; v < shape.size(); ++v) {
      if (hits[v] == 0) throw std::invalid_argument("voxel " + std::to_string(v) + " not covered by any patch");
      vol[v] = static_cast<float>(sums[c][v] / double(hits[v]));
    }
    out.push_back(std::move(vol));
  }
  return out;
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::arterial: return "arterial";
    case Phase::delayed: return "delayed";
    case Phase::non_contrast: return "non-contrast";
    case Phase::portal: return "portal";
    default: return "unknown";
  }
}

Phase parse_phase(std::string_view text) {
  if (text == "arterial" || text == "A") return Phase::arterial;
  if (text == "delayed" || text == "D") return Phase::delayed;
  if (text == "non-contrast" || text == "non_contrast" || text == "NC") return Phase::non_contrast;
  if (text == "portal" || text == "P") return Phase::portal;
  if (text == "unknown" || text == "U") return Phase::unknown;
  throw std::invalid_argument("unknown phase: " + std::string(text));
}

namespace {

/// Per-phase validation counts for one fold. Each count stays within one case of
/// its proportional share for both validation and training when that is feasible.
std::array<std::size_t, kPhaseCount> allocate_validation(const std::array<std::size_t, kPhaseCount>& total,
                                                         const std::array<std::size_t, kPhaseCount>& pool,
                                                         std::size_t n_total, std::size_t n_val,
                                                         std::size_t n_train) {
  constexpr double eps = 1e-9;
  std::array<double, kPhaseCount> target{};
  std::array<long, kPhaseCount> lo{}, hi{}, val{};
  for (std::size_t p = 0; p < kPhaseCount; ++p) {
    const double share = double(total[p]) / double(n_total);
    target[p] = double(n_val) * share;
    const double train_target = double(n_train) * share;
    lo[p] = std::max({0L, long(std::ceil(target[p] - 1.0 - eps)),
                      long(std::ceil(double(pool[p]) - train_target - 1.0 - eps))});
    hi[p] = std::min({long(pool[p]), long(std::floor(target[p] + 1.0 + eps)),
                      long(std::floor(double(pool[p]) - train_target + 1.0 + eps))});
    if (lo[p] > hi[p]) {
      lo[p] = 0;
      hi[p] = long(pool[p]);
    }
    val[p] = std::clamp(long(std::llround(target[p])), lo[p], hi[p]);
  }

  auto adjust = [&](bool strict) {
    long sum = std::accumulate(val.begin(), val.end(), 0L);
    while (sum != long(n_val)) {
      const bool grow = sum < long(n_val);
      std::size_t best = kPhaseCount;
      double best_gap = 0.0;
      for (std::size_t p = 0; p < kPhaseCount; ++p) {
        const long bound_lo = strict ? lo[p] : 0L;
        const long bound_hi = strict ? hi[p] : long(pool[p]);
        if (grow ? val[p] >= bound_hi : val[p] <= bound_lo) continue;
        const double gap = grow ? target[p] - double(val[p]) : double(val[p]) - target[p];
        if (best == kPhaseCount || gap > best_gap) {
          best = p;
          best_gap = gap;
        }
      }
      if (best == kPhaseCount) return false;
      val[best] += grow ? 1 : -1;
      sum += grow ? 1 : -1;
    }
    return true;
  };
  if (!adjust(true)) adjust(false);

  std::array<std::size_t, kPhaseCount> out{};
  for (std::size_t p = 0; p < kPhaseCount; ++p) out[p] = std::size_t(val[p]);
  return out;
}

}  // namespace

std::vector<Fold> stratified_kfold(std::span<const CaseRecord> cases, std::size_t k, double val_fraction,
                                   std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("need at least 2 folds");
  if (k > cases.size()) throw std::invalid_argument("more folds than cases");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw std::invalid_argument("val_fraction must lie in [0,1)");

  std::mt19937_64 rng(seed);
  std::array<std::vector<std::size_t>, kPhaseCount> by_phase;
  for (std::size_t i = 0; i < cases.size(); ++i) by_phase[std::size_t(cases[i].phase)].push_back(i);
  for (auto& group : by_phase) std::shuffle(group.begin(), group.end(), rng);

  std::array<std::size_t, kPhaseCount> phase_order{};
  std::iota(phase_order.begin(), phase_order.end(), 0);
  std::stable_sort(phase_order.begin(), phase_order.end(),
                   [&](std::size_t a, std::size_t b) { return by_phase[a].size() < by_phase[b].size(); });

  // Round-robin over phases from rarest to commonest.
  std::vector<std::size_t> test_fold(cases.size());
  std::size_t counter = 0;
  for (std::size_t p : phase_order) {
    for (std::size_t idx : by_phase[p]) test_fold[idx] = counter++ % k;
  }

  std::array<std::size_t, kPhaseCount> total{};
  for (std::size_t p = 0; p < kPhaseCount; ++p) total[p] = by_phase[p].size();

  std::vector<Fold> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::array<std::vector<std::size_t>, kPhaseCount> pool;
    std::vector<std::size_t> test;
    for (std::size_t p : phase_order) {
      for (std::size_t idx : by_phase[p]) {
        (test_fold[idx] == f ? test : pool[p]).push_back(idx);
      }
    }
    std::size_t pool_size = 0;
    std::array<std::size_t, kPhaseCount> pool_counts{};
    for (std::size_t p = 0; p < kPhaseCount; ++p) {
      pool_counts[p] = pool[p].size();
      pool_size += pool[p].size();
    }
    const auto n_val = static_cast<std::size_t>(std::llround(val_fraction * double(pool_size)));
    const auto val_counts = allocate_validation(total, pool_counts, cases.size(), n_val, pool_size - n_val);

    std::vector<std::size_t> val, train;
    for (std::size_t p = 0; p < kPhaseCount; ++p) {
      std::shuffle(pool[p].begin(), pool[p].end(), rng);
      for (std::size_t t = 0; t < pool[p].size(); ++t) (t < val_counts[p] ? val : train).push_back(pool[p][t]);
    }
    auto to_ids = [&](std::vector<std::size_t> idx) {
      std::sort(idx.begin(), idx.end());
      std::vector<std::string> ids;
      for (std::size_t i : idx) ids.push_back(cases[i].id);
      return ids;
    };
    folds[f] = {to_ids(train), to_ids(val), to_ids(test)};
  }
  return folds;
}

}  // namespace livseg
