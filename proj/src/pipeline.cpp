#include "livseg/pipeline.hpp"

#include <stdexcept>
#include <string>

namespace livseg {

std::string_view to_string(PipelineMode mode) {
  return mode == PipelineMode::multiclass ? "multiclass" : "dual-binary";
}

PipelineMode parse_pipeline_mode(std::string_view text) {
  if (text == "multiclass") return PipelineMode::multiclass;
  if (text == "dual-binary" || text == "dual_binary") return PipelineMode::dual_binary;
  throw std::invalid_argument("unknown pipeline mode: " + std::string(text));
}

void PostprocessConfig::validate() const {
  if (remove_outside_tumors && dilation.iterations < 1) {
    throw std::invalid_argument("dilation iterations must be >= 1");
  }
  if (close_tumors && closing.iterations < 1) throw std::invalid_argument("closing iterations must be >= 1");
}

LabelMap argmax_labelization(const ProbMap& prob) {
  if (prob.channels() != 3) throw std::invalid_argument("argmax labelization needs a 3-channel map");
  LabelMap out = prob.channel(0).like<Label>(Label::background);
  const auto p0 = prob.channel(0).data();
  const auto p1 = prob.channel(1).data();
  const auto p2 = prob.channel(2).data();
  for (std::size_t v = 0; v < out.size(); ++v) {
    Label best = Label::background;
    float best_p = p0[v];
    if (p1[v] >= best_p) {
      best = Label::liver;
      best_p = p1[v];
    }
    if (p2[v] >= best_p) best = Label::tumor;
    out[v] = best;
  }
  return out;
}

BinaryMask threshold_binary(const ProbVolume& prob, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) throw std::invalid_argument("threshold must lie in (0,1)");
  BinaryMask out = prob.like<std::uint8_t>(0);
  for (std::size_t v = 0; v < prob.size(); ++v) out[v] = double(prob[v]) >= threshold ? 1 : 0;
  return out;
}

LabelMap fuse_dual_binary(const BinaryMask& liver, const BinaryMask& tumor) {
  require_same_grid(liver, tumor, "fuse_dual_binary");
  LabelMap out = liver.like<Label>(Label::background);
  for (std::size_t v = 0; v < out.size(); ++v) {
    out[v] = static_cast<Label>((liver[v] != 0) * (1 + (tumor[v] != 0)));
  }
  return out;
}

namespace {

/// True when some healthy-liver voxel lies within the reach of `iterations`
/// dilations of the component by `element`.
bool dilation_meets_liver(const LabelMap& seg, std::span<const std::size_t> voxels, const MorphStep& step) {
  const Shape& s = seg.shape();
  const int r = step.iterations;
  for (std::size_t v : voxels) {
    const Index3 p = seg.coords(v);
    for (int dk = -r; dk <= r; ++dk) {
      for (int dj = -r; dj <= r; ++dj) {
        for (int di = -r; di <= r; ++di) {
          if (step.element == Connectivity::face && std::abs(di) + std::abs(dj) + std::abs(dk) > r) continue;
          const auto i = std::ptrdiff_t(p.i) + di;
          const auto j = std::ptrdiff_t(p.j) + dj;
          const auto k = std::ptrdiff_t(p.k) + dk;
          if (i < 0 || j < 0 || k < 0 || i >= std::ptrdiff_t(s.nx) || j >= std::ptrdiff_t(s.ny) ||
              k >= std::ptrdiff_t(s.nz)) {
            continue;
          }
          if (seg(std::size_t(i), std::size_t(j), std::size_t(k)) == Label::liver) return true;
        }
      }
    }
  }
  return false;
}

}  // namespace

LabelMap postprocess(const LabelMap& seg, PipelineMode mode, const PostprocessConfig& cfg) {
  validate_labels(seg);
  cfg.validate();
  LabelMap out = seg;

  // Step 1.
  BinaryMask liver = mask_of(seg, {Label::liver, Label::tumor});
  if (cfg.keep_largest_liver) liver = keep_largest_component(liver, cfg.component_connectivity);
  if (cfg.fill_liver_holes) liver = fill_holes(liver, cfg.hole_connectivity);
  for (std::size_t v = 0; v < out.size(); ++v) {
    if (liver[v] == 0) {
      out[v] = Label::background;
    } else {
      out[v] = seg[v] == Label::tumor ? Label::tumor : Label::liver;
    }
  }

  // Step 2.
  if (cfg.remove_outside_tumors) {
    if (mode == PipelineMode::multiclass) {
      const ComponentLabeling lesions = label_components(mask_of(out, {Label::tumor}), cfg.component_connectivity);
      std::vector<std::size_t> doomed;
      for (std::size_t id = 1; id <= lesions.count(); ++id) {
        if (!dilation_meets_liver(out, lesions.voxels(id), cfg.dilation)) doomed.push_back(id);
      }
      for (std::size_t id : doomed) {
        for (std::size_t v : lesions.voxels(id)) out[v] = Label::background;
      }
    } else {
      for (std::size_t v = 0; v < out.size(); ++v) {
        if (out[v] == Label::tumor && liver[v] == 0) out[v] = Label::background;
      }
    }
  }

  // Step 3.
  if (cfg.close_tumors) {
    const BinaryMask tumor = mask_of(out, {Label::tumor});
    const BinaryMask closed = binary_morph(tumor, MorphOp::close, cfg.closing.element, cfg.closing.iterations);
    for (std::size_t v = 0; v < out.size(); ++v) {
      if (closed[v] != 0 && out[v] == Label::liver) out[v] = Label::tumor;
    }
  }
  return out;
}

LabelMap run_pipeline(const PipelineInput& input, PipelineMode mode, const PostprocessConfig& cfg,
                      double threshold) {
  if (mode == PipelineMode::multiclass) {
    const auto* in = std::get_if<MulticlassInput>(&input);
    if (in == nullptr) throw std::invalid_argument("multiclass mode expects one 3-channel probability map");
    return postprocess(argmax_labelization(in->probabilities), mode, cfg);
  }
  const auto* in = std::get_if<DualBinaryInput>(&input);
  if (in == nullptr) throw std::invalid_argument("dual-binary mode expects liver and tumor probabilities");
  const LabelMap fused = fuse_dual_binary(threshold_binary(in->liver, threshold), threshold_binary(in->tumor, threshold));
  return postprocess(fused, mode, cfg);
}

const ProbVolume& tumor_probability(const PipelineInput& input) {
  if (const auto* m = std::get_if<MulticlassInput>(&input)) {
    if (m->probabilities.channels() != 3) throw std::invalid_argument("multiclass map must have 3 channels");
    return m->probabilities.channel(2);
  }
  return std::get<DualBinaryInput>(input).tumor;
}

}  // namespace livseg
