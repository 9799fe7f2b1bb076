#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace livseg {

/// Raised when volumes that must share a lattice do not.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Physical voxel size in millimeters along x, y and z.
struct Spacing {
  double dx = 1.0;
  double dy = 1.0;
  double dz = 1.0;

  bool operator==(const Spacing&) const = default;
  bool valid() const { return dx > 0.0 && dy > 0.0 && dz > 0.0; }
  std::array<double, 3> as_array() const { return {dx, dy, dz}; }
};

/// Cubic millimeters occupied by one voxel.
inline double voxel_volume_mm3(const Spacing& s) { return s.dx * s.dy * s.dz; }

struct Shape {
  std::size_t nx = 1;
  std::size_t ny = 1;
  std::size_t nz = 1;

  bool operator==(const Shape&) const = default;
  std::size_t size() const { return nx * ny * nz; }
  std::array<std::size_t, 3> as_array() const { return {nx, ny, nz}; }
};

struct Index3 {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t k = 0;
  bool operator==(const Index3&) const = default;
};

/// Orientation fields of the source header. Carried through for write-back only;
/// nothing in the toolkit computes with them.
struct Orientation {
  std::int16_t qform_code = 0;
  std::int16_t sform_code = 0;
  float qfac = 1.0F;
  std::array<float, 3> quatern{0.0F, 0.0F, 0.0F};
  std::array<float, 3> qoffset{0.0F, 0.0F, 0.0F};
  std::array<float, 12> srow{};

  bool operator==(const Orientation&) const = default;
};

/// Class labels of a liver/tumor segmentation.
enum class Label : std::uint8_t { background = 0, liver = 1, tumor = 2 };

/// Dense 3D grid with x varying fastest (NIfTI order).
template <class T>
class Volume {
 public:
  using value_type = T;

  Volume() = default;
  Volume(Shape shape, Spacing spacing, T fill = T{})
      : shape_(shape), spacing_(spacing), data_(shape.size(), fill) {
    check();
  }
  Volume(Shape shape, Spacing spacing, std::vector<T> data)
      : shape_(shape), spacing_(spacing), data_(std::move(data)) {
    check();
    if (data_.size() != shape_.size()) {
      throw std::invalid_argument("volume data length does not match shape");
    }
  }

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  const Orientation& orientation() const { return orientation_; }
  void set_orientation(const Orientation& o) { orientation_ = o; }

  std::size_t size() const { return data_.size(); }
  std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
    return i + shape_.nx * (j + shape_.ny * k);
  }
  Index3 coords(std::size_t linear) const {
    const std::size_t i = linear % shape_.nx;
    const std::size_t rest = linear / shape_.nx;
    return {i, rest % shape_.ny, rest / shape_.ny};
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[index(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[index(i, j, k)];
  }
  T& operator[](std::size_t linear) { return data_[linear]; }
  const T& operator[](std::size_t linear) const { return data_[linear]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  template <class U>
  bool same_grid(const Volume<U>& other) const {
    return shape_ == other.shape() && spacing_ == other.spacing();
  }

  /// Copy of the lattice metadata with new contents.
  template <class U>
  Volume<U> like(U fill = U{}) const {
    Volume<U> out(shape_, spacing_, fill);
    out.set_orientation(orientation_);
    return out;
  }

  bool operator==(const Volume& other) const {
    return shape_ == other.shape_ && spacing_ == other.spacing_ && data_ == other.data_;
  }

 private:
  void check() const {
    if (shape_.nx == 0 || shape_.ny == 0 || shape_.nz == 0) {
      throw std::invalid_argument("volume shape components must be >= 1");
    }
    if (!spacing_.valid()) throw std::invalid_argument("voxel spacing must be strictly positive");
  }

  Shape shape_{};
  Spacing spacing_{};
  Orientation orientation_{};
  std::vector<T> data_;
};

/// Voxel values in {0,1}.
using BinaryMask = Volume<std::uint8_t>;
using LabelMap = Volume<Label>;
using ProbVolume = Volume<float>;

/// Per-class probability stack; every channel shares one lattice.
class ProbMap {
 public:
  ProbMap() = default;
  explicit ProbMap(std::vector<ProbVolume> channels);

  std::size_t channels() const { return channels_.size(); }
  const ProbVolume& channel(std::size_t c) const { return channels_.at(c); }
  const Shape& shape() const { return channels_.front().shape(); }
  const Spacing& spacing() const { return channels_.front().spacing(); }

 private:
  std::vector<ProbVolume> channels_;
};

/// Checks the invariants of a 3-class label map; throws std::invalid_argument.
void validate_labels(const LabelMap& seg);

template <class A, class B>
void require_same_grid(const Volume<A>& a, const Volume<B>& b, const char* what) {
  if (!a.same_grid(b)) throw GridMismatch(std::string(what) + ": shape/spacing mismatch");
}

inline std::size_t count_foreground(const BinaryMask& m) {
  std::size_t n = 0;
  for (auto v : m.data()) n += v != 0;
  return n;
}

/// Foreground where the label is one of `classes`.
BinaryMask mask_of(const LabelMap& seg, std::initializer_list<Label> classes);

}  // namespace livseg
