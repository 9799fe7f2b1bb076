#include "livseg/morphology.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <numeric>

namespace livseg {

namespace {

constexpr std::array<std::array<int, 3>, 6> kFace{{
    {-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1},
}};

constexpr std::array<std::array<int, 3>, 26> make_full() {
  std::array<std::array<int, 3>, 26> out{};
  std::size_t n = 0;
  for (int dk = -1; dk <= 1; ++dk) {
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        if (di != 0 || dj != 0 || dk != 0) out[n++] = {di, dj, dk};
      }
    }
  }
  return out;
}
constexpr auto kFull = make_full();

/// Calls fn(neighbor_linear_index) for each in-grid neighbor of (i,j,k).
template <class Fn>
void for_each_neighbor(const Shape& s, std::size_t i, std::size_t j, std::size_t k,
                       std::span<const std::array<int, 3>> offsets, Fn&& fn) {
  for (const auto& o : offsets) {
    const auto ni = static_cast<std::ptrdiff_t>(i) + o[0];
    const auto nj = static_cast<std::ptrdiff_t>(j) + o[1];
    const auto nk = static_cast<std::ptrdiff_t>(k) + o[2];
    if (ni < 0 || nj < 0 || nk < 0 || ni >= std::ptrdiff_t(s.nx) || nj >= std::ptrdiff_t(s.ny) ||
        nk >= std::ptrdiff_t(s.nz)) {
      continue;
    }
    fn(std::size_t(ni) + s.nx * (std::size_t(nj) + s.ny * std::size_t(nk)));
  }
}

/// True when (i,j,k) has a neighbor under `offsets` that falls outside the grid.
bool touches_edge(const Shape& s, std::size_t i, std::size_t j, std::size_t k,
                  std::span<const std::array<int, 3>> offsets) {
  for (const auto& o : offsets) {
    const auto ni = static_cast<std::ptrdiff_t>(i) + o[0];
    const auto nj = static_cast<std::ptrdiff_t>(j) + o[1];
    const auto nk = static_cast<std::ptrdiff_t>(k) + o[2];
    if (ni < 0 || nj < 0 || nk < 0 || ni >= std::ptrdiff_t(s.nx) || nj >= std::ptrdiff_t(s.ny) ||
        nk >= std::ptrdiff_t(s.nz)) {
      return true;
    }
  }
  return false;
}

/// 1D dilation (or erosion) with a window of radius 1 along one axis.
/// Out-of-grid samples are background.
void line_pass(const std::vector<std::uint8_t>& src, std::vector<std::uint8_t>& dst, const Shape& s,
               int axis, bool dilate) {
  const std::array<std::size_t, 3> n = s.as_array();
  const std::array<std::size_t, 3> stride{1, s.nx, s.nx * s.ny};
  const std::size_t len = n[axis];
  const std::size_t st = stride[axis];
  for (std::size_t v = 0; v < src.size(); ++v) {
    const std::size_t pos = (v / st) % len;
    const std::uint8_t center = src[v];
    const std::uint8_t lo = pos > 0 ? src[v - st] : 0;
    const std::uint8_t hi = pos + 1 < len ? src[v + st] : 0;
    dst[v] = dilate ? std::uint8_t(center | lo | hi) : std::uint8_t(center & lo & hi);
  }
}

std::vector<std::uint8_t> step(const std::vector<std::uint8_t>& src, const Shape& s, bool dilate,
                               Connectivity element) {
  std::vector<std::uint8_t> a(src.size());
  if (element == Connectivity::full) {
    std::vector<std::uint8_t> b(src.size());
    line_pass(src, a, s, 0, dilate);
    line_pass(a, b, s, 1, dilate);
    line_pass(b, a, s, 2, dilate);
    return a;
  }
  for (std::size_t v = 0; v < src.size(); ++v) {
    const std::size_t i = v % s.nx;
    const std::size_t j = (v / s.nx) % s.ny;
    const std::size_t k = v / (s.nx * s.ny);
    std::uint8_t acc = src[v];
    if (dilate) {
      for_each_neighbor(s, i, j, k, kFace, [&](std::size_t n) { acc |= src[n]; });
    } else {
      if (touches_edge(s, i, j, k, kFace)) acc = 0;
      for_each_neighbor(s, i, j, k, kFace, [&](std::size_t n) { acc &= src[n]; });
    }
    a[v] = acc;
  }
  return a;
}

std::vector<std::uint8_t> repeat(std::vector<std::uint8_t> v, const Shape& s, bool dilate,
                                 Connectivity element, int iterations) {
  for (int it = 0; it < iterations; ++it) v = step(v, s, dilate, element);
  return v;
}

}  // namespace

std::span<const std::array<int, 3>> neighbor_offsets(Connectivity c) {
  if (c == Connectivity::face) return kFace;
  return kFull;
}

std::size_t ComponentLabeling::largest() const {
  std::size_t best = 0;
  std::size_t best_size = 0;
  for (std::size_t id = 1; id <= count(); ++id) {
    if (size_of(id) > best_size) {
      best = id;
      best_size = size_of(id);
    }
  }
  return best;
}

ComponentLabeling label_components(const BinaryMask& mask, Connectivity c) {
  const Shape& s = mask.shape();
  Volume<std::int32_t> ids = mask.like<std::int32_t>(0);
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> voxels;
  const auto nb = neighbor_offsets(c);
  std::vector<std::size_t> queue;

  std::int32_t next = 0;
  for (std::size_t seed = 0; seed < mask.size(); ++seed) {
    if (mask[seed] == 0 || ids[seed] != 0) continue;
    ++next;
    ids[seed] = next;
    queue.clear();
    queue.push_back(seed);
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const Index3 p = mask.coords(queue[head]);
      for_each_neighbor(s, p.i, p.j, p.k, nb, [&](std::size_t n) {
        if (mask[n] != 0 && ids[n] == 0) {
          ids[n] = next;
          queue.push_back(n);
        }
      });
    }
    std::sort(queue.begin(), queue.end());
    voxels.insert(voxels.end(), queue.begin(), queue.end());
    offsets.push_back(voxels.size());
  }
  return {std::move(ids), std::move(offsets), std::move(voxels)};
}

BinaryMask keep_largest_component(const BinaryMask& mask, Connectivity c) {
  const ComponentLabeling cc = label_components(mask, c);
  BinaryMask out = mask.like<std::uint8_t>(0);
  const std::size_t best = cc.largest();
  if (best == 0) return out;
  for (std::size_t v : cc.voxels(best)) out[v] = 1;
  return out;
}

BinaryMask fill_holes(const BinaryMask& mask, Connectivity background_connectivity) {
  const Shape& s = mask.shape();
  std::vector<std::uint8_t> outside(mask.size(), 0);
  std::vector<std::size_t> queue;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v] != 0) continue;
    const Index3 p = mask.coords(v);
    const bool border = p.i == 0 || p.j == 0 || p.k == 0 || p.i + 1 == s.nx || p.j + 1 == s.ny ||
                        p.k + 1 == s.nz;
    if (border) {
      outside[v] = 1;
      queue.push_back(v);
    }
  }
  const auto nb = neighbor_offsets(background_connectivity);
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const Index3 p = mask.coords(queue[head]);
    for_each_neighbor(s, p.i, p.j, p.k, nb, [&](std::size_t n) {
      if (mask[n] == 0 && outside[n] == 0) {
        outside[n] = 1;
        queue.push_back(n);
      }
    });
  }
  BinaryMask out = mask.like<std::uint8_t>(0);
  for (std::size_t v = 0; v < mask.size(); ++v) out[v] = outside[v] ? 0 : 1;
  return out;
}

BinaryMask binary_morph(const BinaryMask& mask, MorphOp op, Connectivity element, int iterations) {
  if (iterations < 1) throw std::invalid_argument("morphology iterations must be >= 1");
  const Shape& s = mask.shape();
  if (op != MorphOp::close) {
    BinaryMask out = mask.like<std::uint8_t>(0);
    out.storage() = repeat(mask.storage(), s, op == MorphOp::dilate, element, iterations);
    return out;
  }

  // Closing on a local grid spanning the foreground bounding box grown by the
  // element reach; that grid may extend past the real one.
  std::array<std::size_t, 3> lo{s.nx, s.ny, s.nz};
  std::array<std::size_t, 3> hi{0, 0, 0};
  bool any = false;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v] == 0) continue;
    any = true;
    const Index3 p = mask.coords(v);
    const std::array<std::size_t, 3> c{p.i, p.j, p.k};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  BinaryMask out = mask.like<std::uint8_t>(0);
  if (!any) return out;

  const auto r = static_cast<std::ptrdiff_t>(iterations);
  std::array<std::ptrdiff_t, 3> origin{};
  Shape local{};
  std::array<std::size_t, 3> ext{};
  for (int a = 0; a < 3; ++a) {
    origin[a] = static_cast<std::ptrdiff_t>(lo[a]) - r;
    ext[a] = hi[a] - lo[a] + 1 + 2 * std::size_t(iterations);
  }
  local = {ext[0], ext[1], ext[2]};
  std::vector<std::uint8_t> buf(local.size(), 0);
  for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        const std::size_t li = i - lo[0] + iterations;
        const std::size_t lj = j - lo[1] + iterations;
        const std::size_t lk = k - lo[2] + iterations;
        buf[li + local.nx * (lj + local.ny * lk)] = mask(i, j, k);
      }
    }
  }
  buf = repeat(std::move(buf), local, true, element, iterations);
  buf = repeat(std::move(buf), local, false, element, iterations);
  for (std::size_t lk = 0; lk < local.nz; ++lk) {
    const std::ptrdiff_t k = origin[2] + std::ptrdiff_t(lk);
    if (k < 0 || k >= std::ptrdiff_t(s.nz)) continue;
    for (std::size_t lj = 0; lj < local.ny; ++lj) {
      const std::ptrdiff_t j = origin[1] + std::ptrdiff_t(lj);
      if (j < 0 || j >= std::ptrdiff_t(s.ny)) continue;
      for (std::size_t li = 0; li < local.nx; ++li) {
        const std::ptrdiff_t i = origin[0] + std::ptrdiff_t(li);
        if (i < 0 || i >= std::ptrdiff_t(s.nx)) continue;
        out(std::size_t(i), std::size_t(j), std::size_t(k)) = buf[li + local.nx * (lj + local.ny * lk)];
      }
    }
  }
  return out;
}

BinaryMask extract_boundary(const BinaryMask& mask) {
  const Shape& s = mask.shape();
  BinaryMask out = mask.like<std::uint8_t>(0);
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v] == 0) continue;
    const Index3 p = mask.coords(v);
    bool edge = touches_edge(s, p.i, p.j, p.k, kFace);
    if (!edge) {
      for_each_neighbor(s, p.i, p.j, p.k, kFace, [&](std::size_t n) { edge = edge || mask[n] == 0; });
    }
    out[v] = edge ? 1 : 0;
  }
  return out;
}

}  // namespace livseg
