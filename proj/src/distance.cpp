#include "livseg/distance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace livseg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// In-place 1D squared distance along a strided line with sample spacing w.
/// `v` and `z` are scratch buffers of at least n and n+1 entries.
void edt_line(double* f, std::size_t n, std::size_t stride, double w, std::vector<double>& line,
              std::vector<std::size_t>& v, std::vector<double>& z) {
  const double w2 = w * w;
  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    line[q] = f[q * stride];
    if (line[q] == kInf) continue;
    if (!any) {
      any = true;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    const double fq = line[q] + w2 * double(q) * double(q);
    auto intersect = [&](std::size_t p) {
      const double fp = line[p] + w2 * double(p) * double(p);
      return (fq - fp) / (2.0 * w2 * double(q - p));
    };
    // z[0] is -inf, so k never underflows.
    double s = intersect(v[k]);
    while (s <= z[k]) {
      --k;
      s = intersect(v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (!any) return;
  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    while (z[k + 1] < double(q)) ++k;
    const double d = double(q) - double(v[k]);
    f[q * stride] = w2 * d * d + line[v[k]];
  }
}

void transform_in_place(std::vector<double>& grid, const Shape& s, const Spacing& sp) {
  const std::array<std::size_t, 3> n = s.as_array();
  const std::array<std::size_t, 3> stride{1, s.nx, s.nx * s.ny};
  const std::array<double, 3> w = sp.as_array();
  const std::size_t longest = std::max({s.nx, s.ny, s.nz});
  std::vector<double> line(longest);
  std::vector<std::size_t> v(longest);
  std::vector<double> z(longest + 1);
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    for (std::size_t u2 = 0; u2 < n[a2]; ++u2) {
      for (std::size_t u1 = 0; u1 < n[a1]; ++u1) {
        double* start = grid.data() + u1 * stride[a1] + u2 * stride[a2];
        edt_line(start, n[axis], stride[axis], w[axis], line, v, z);
      }
    }
  }
}

}  // namespace

Volume<double> squared_distance_transform(const BinaryMask& sites) {
  Volume<double> out = sites.like<double>(kInf);
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i] != 0) out[i] = 0.0;
  }
  transform_in_place(out.storage(), out.shape(), out.spacing());
  return out;
}

std::vector<double> distances_to(const BinaryMask& from, const BinaryMask& to) {
  require_same_grid(from, to, "distances_to");
  const Shape& s = from.shape();
  std::array<std::size_t, 3> lo{s.nx, s.ny, s.nz};
  std::array<std::size_t, 3> hi{0, 0, 0};
  bool has_from = false;
  bool has_to = false;
  for (std::size_t v = 0; v < from.size(); ++v) {
    if (from[v] == 0 && to[v] == 0) continue;
    has_from = has_from || from[v] != 0;
    has_to = has_to || to[v] != 0;
    const Index3 p = from.coords(v);
    const std::array<std::size_t, 3> c{p.i, p.j, p.k};
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], c[a]);
      hi[a] = std::max(hi[a], c[a]);
    }
  }
  std::vector<double> out;
  if (!has_from) return out;
  if (!has_to) {
    out.assign(count_foreground(from), kInf);
    return out;
  }

  const Shape local{hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1};
  std::vector<double> grid(local.size(), kInf);
  auto local_index = [&](std::size_t i, std::size_t j, std::size_t k) {
    return (i - lo[0]) + local.nx * ((j - lo[1]) + local.ny * (k - lo[2]));
  };
  for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        if (to(i, j, k) != 0) grid[local_index(i, j, k)] = 0.0;
      }
    }
  }
  transform_in_place(grid, local, from.spacing());
  for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
        if (from(i, j, k) != 0) out.push_back(std::sqrt(grid[local_index(i, j, k)]));
      }
    }
  }
  return out;
}

}  // namespace livseg
