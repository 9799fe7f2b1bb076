#include "livseg/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace livseg {

std::string_view to_string(LesionStatus s) {
  switch (s) {
    case LesionStatus::tp: return "TP";
    case LesionStatus::fp: return "FP";
    default: return "unknown";
  }
}

std::vector<Lesion> extract_lesions(const LabelMap& seg, Connectivity c) {
  const ComponentLabeling cc = label_components(mask_of(seg, {Label::tumor}), c);
  const double voxel = voxel_volume_mm3(seg.spacing());
  std::vector<Lesion> out;
  out.reserve(cc.count());
  for (std::size_t id = 1; id <= cc.count(); ++id) {
    Lesion l;
    l.id = id;
    const auto vox = cc.voxels(id);
    l.voxels.assign(vox.begin(), vox.end());
    l.volume_mm3 = double(vox.size()) * voxel;
    out.push_back(std::move(l));
  }
  return out;
}

double lesion_uncertainty(const Lesion& lesion, const ProbVolume& tumor_prob) {
  if (lesion.voxels.empty()) throw std::invalid_argument("lesion has no voxels");
  double sum = 0.0;
  for (std::size_t v : lesion.voxels) {
    if (v >= tumor_prob.size()) throw std::out_of_range("lesion voxel outside the probability grid");
    sum += double(tumor_prob[v]);
  }
  return 1.0 - sum / double(lesion.voxels.size());
}

void classify_lesions(std::vector<Lesion>& lesions, const LabelMap& seg, const LabelMap& gt) {
  require_same_grid(seg, gt, "lesion classification");
  for (auto& l : lesions) {
    bool hit = false;
    for (std::size_t v : l.voxels) {
      if (v >= gt.size()) throw GridMismatch("lesion voxel outside the ground-truth grid");
      if (gt[v] == Label::tumor) {
        hit = true;
        break;
      }
    }
    l.status = hit ? LesionStatus::tp : LesionStatus::fp;
  }
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman: need at least two samples");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = double(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw std::invalid_argument("spearman: constant ranks, correlation undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

LesionReport build_lesion_report(std::string case_id, const LabelMap& seg, const ProbVolume& tumor_prob,
                                 const LabelMap* gt, Connectivity c) {
  require_same_grid(seg, tumor_prob, "lesion report");
  LesionReport r;
  r.case_id = std::move(case_id);
  r.lesions = extract_lesions(seg, c);
  for (auto& l : r.lesions) l.uncertainty = lesion_uncertainty(l, tumor_prob);
  if (gt != nullptr) {
    require_same_grid(seg, *gt, "lesion report");
    classify_lesions(r.lesions, seg, *gt);
  }
  if (r.lesions.size() >= 2) {
    std::vector<double> u, vol;
    for (const auto& l : r.lesions) {
      u.push_back(*l.uncertainty);
      vol.push_back(l.volume_mm3);
    }
    try {
      r.spearman_uncertainty_volume = spearman(u, vol);
    } catch (const std::invalid_argument&) {
      // constant ranks: leave unset
    }
  }
  return r;
}

}  // namespace livseg
