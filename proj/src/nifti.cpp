#include "livseg/nifti.hpp"

#include <zlib.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <memory>
#include <string>

namespace livseg {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

namespace {

constexpr int kHeaderSize = 348;
constexpr float kVoxOffset = 352.0F;

struct GzCloser {
  void operator()(gzFile f) const { gzclose(f); }
};
using GzHandle = std::unique_ptr<std::remove_pointer_t<gzFile>, GzCloser>;

template <class T>
T byteswap(T v) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &v, sizeof(T));
  std::reverse(bytes.begin(), bytes.end());
  std::memcpy(&v, bytes.data(), sizeof(T));
  return v;
}

class HeaderView {
 public:
  HeaderView(const unsigned char* bytes, bool swap) : bytes_(bytes), swap_(swap) {}
  template <class T>
  T get(std::size_t offset) const {
    T v;
    std::memcpy(&v, bytes_ + offset, sizeof(T));
    return swap_ ? byteswap(v) : v;
  }

 private:
  const unsigned char* bytes_;
  bool swap_;
};

template <class T>
void put(std::array<unsigned char, 352>& h, std::size_t offset, T v) {
  std::memcpy(h.data() + offset, &v, sizeof(T));
}

void read_exact(gzFile f, void* dst, std::size_t n, const std::filesystem::path& path) {
  auto* out = static_cast<unsigned char*>(dst);
  while (n > 0) {
    const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1U << 30));
    const int got = gzread(f, out, chunk);
    if (got <= 0) throw NiftiError("truncated NIfTI file: " + path.string());
    out += got;
    n -= static_cast<std::size_t>(got);
  }
}

template <class T>
std::vector<T> read_payload(gzFile f, std::size_t count, bool swap,
                            const std::filesystem::path& path) {
  std::vector<T> v(count);
  read_exact(f, v.data(), count * sizeof(T), path);
  if (swap && sizeof(T) > 1) {
    for (auto& x : v) x = byteswap(x);
  }
  return v;
}

bool ends_with_gz(const std::filesystem::path& path) {
  const std::string s = path.string();
  return s.size() >= 3 && s.compare(s.size() - 3, 3, ".gz") == 0;
}

template <class Vec>
ElementKind kind_of() {
  using T = typename Vec::value_type;
  if constexpr (std::is_same_v<T, std::uint8_t>) return ElementKind::uint8;
  if constexpr (std::is_same_v<T, std::int16_t>) return ElementKind::int16;
  if constexpr (std::is_same_v<T, std::int32_t>) return ElementKind::int32;
  if constexpr (std::is_same_v<T, float>) return ElementKind::float32;
  if constexpr (std::is_same_v<T, double>) return ElementKind::float64;
}

}  // namespace

ElementKind NiftiImage::kind() const {
  return std::visit([](const auto& v) { return kind_of<std::decay_t<decltype(v)>>(); }, data);
}

NiftiImage read_volume(const std::filesystem::path& path) {
  GzHandle f(gzopen(path.string().c_str(), "rb"));
  if (!f) throw NiftiError("cannot open " + path.string());

  std::array<unsigned char, kHeaderSize> raw{};
  read_exact(f.get(), raw.data(), raw.size(), path);

  std::int32_t sizeof_hdr;
  std::memcpy(&sizeof_hdr, raw.data(), 4);
  bool swap = false;
  if (sizeof_hdr != kHeaderSize) {
    if (byteswap(sizeof_hdr) != kHeaderSize) throw NiftiError("not a NIfTI-1 file: " + path.string());
    swap = true;
  }
  const HeaderView h(raw.data(), swap);
  if (std::memcmp(raw.data() + 344, "n+1", 4) != 0 && std::memcmp(raw.data() + 344, "ni1", 4) != 0) {
    throw NiftiError("missing NIfTI-1 magic: " + path.string());
  }
  if (std::memcmp(raw.data() + 344, "ni1", 4) == 0) {
    throw NiftiError("two-file NIfTI (.hdr/.img) is not supported: " + path.string());
  }

  std::array<std::int16_t, 8> dim{};
  for (int d = 0; d < 8; ++d) dim[d] = h.get<std::int16_t>(40 + 2 * d);
  if (dim[0] < 1 || dim[0] > 7) throw NiftiError("invalid dim[0] in " + path.string());
  for (int d = 1; d <= dim[0]; ++d) {
    if (dim[d] < 1) throw NiftiError("non-positive dimension in " + path.string());
  }
  auto dim_or_one = [&](int d) -> std::size_t { return d <= dim[0] ? std::size_t(dim[d]) : 1; };

  NiftiImage img;
  img.shape = {dim_or_one(1), dim_or_one(2), dim_or_one(3)};
  img.channels = 1;
  for (int d = 4; d <= dim[0]; ++d) img.channels *= std::size_t(dim[d]);

  std::array<float, 8> pixdim{};
  for (int d = 0; d < 8; ++d) pixdim[d] = h.get<float>(76 + 4 * d);
  img.spacing = {pixdim[1], pixdim[2], pixdim[3]};
  if (dim[0] < 3) img.spacing.dz = 1.0;
  if (dim[0] < 2) img.spacing.dy = 1.0;
  if (!img.spacing.valid()) throw NiftiError("non-positive voxel spacing in " + path.string());

  Orientation& o = img.orientation;
  o.qfac = pixdim[0] < 0.0F ? -1.0F : 1.0F;
  o.qform_code = h.get<std::int16_t>(252);
  o.sform_code = h.get<std::int16_t>(254);
  for (int q = 0; q < 3; ++q) {
    o.quatern[q] = h.get<float>(256 + 4 * q);
    o.qoffset[q] = h.get<float>(268 + 4 * q);
  }
  for (int s = 0; s < 12; ++s) o.srow[s] = h.get<float>(280 + 4 * s);

  const auto datatype = h.get<std::int16_t>(70);
  const float vox_offset = h.get<float>(108);
  const auto offset = static_cast<std::size_t>(std::max(vox_offset, float(kHeaderSize)));
  if (gzseek(f.get(), static_cast<z_off_t>(offset), SEEK_SET) < 0) {
    throw NiftiError("cannot seek to voxel data in " + path.string());
  }

  const std::size_t n = img.voxel_count();
  switch (static_cast<ElementKind>(datatype)) {
    case ElementKind::uint8: img.data = read_payload<std::uint8_t>(f.get(), n, swap, path); break;
    case ElementKind::int16: img.data = read_payload<std::int16_t>(f.get(), n, swap, path); break;
    case ElementKind::int32: img.data = read_payload<std::int32_t>(f.get(), n, swap, path); break;
    case ElementKind::float32: img.data = read_payload<float>(f.get(), n, swap, path); break;
    case ElementKind::float64: img.data = read_payload<double>(f.get(), n, swap, path); break;
    default:
      throw NiftiError("unsupported NIfTI datatype " + std::to_string(datatype) + " in " +
                       path.string());
  }
  return img;
}

void write_volume(const NiftiImage& image, const std::filesystem::path& path) {
  std::array<unsigned char, 352> h{};
  const ElementKind kind = image.kind();
  const auto bytes_per_voxel = std::visit(
      [](const auto& v) { return sizeof(typename std::decay_t<decltype(v)>::value_type); },
      image.data);

  put<std::int32_t>(h, 0, kHeaderSize);
  put<char>(h, 38, 'r');
  const bool four_d = image.channels > 1;
  std::array<std::int16_t, 8> dim{static_cast<std::int16_t>(four_d ? 4 : 3),
                                  static_cast<std::int16_t>(image.shape.nx),
                                  static_cast<std::int16_t>(image.shape.ny),
                                  static_cast<std::int16_t>(image.shape.nz),
                                  static_cast<std::int16_t>(image.channels),
                                  1,
                                  1,
                                  1};
  for (int d = 0; d < 8; ++d) put(h, 40 + 2 * d, dim[d]);
  put(h, 70, static_cast<std::int16_t>(kind));
  put(h, 72, static_cast<std::int16_t>(8 * bytes_per_voxel));
  const Orientation& o = image.orientation;
  std::array<float, 8> pixdim{o.qfac,
                              static_cast<float>(image.spacing.dx),
                              static_cast<float>(image.spacing.dy),
                              static_cast<float>(image.spacing.dz),
                              1.0F,
                              1.0F,
                              1.0F,
                              1.0F};
  for (int d = 0; d < 8; ++d) put(h, 76 + 4 * d, pixdim[d]);
  put(h, 108, kVoxOffset);
  put(h, 112, 1.0F);
  put<char>(h, 123, 2);  // mm
  put(h, 252, o.qform_code);
  put(h, 254, o.sform_code);
  for (int q = 0; q < 3; ++q) {
    put(h, 256 + 4 * q, o.quatern[q]);
    put(h, 268 + 4 * q, o.qoffset[q]);
  }
  for (int s = 0; s < 12; ++s) put(h, 280 + 4 * s, o.srow[s]);
  std::memcpy(h.data() + 344, "n+1", 4);

  const bool gz = ends_with_gz(path);
  GzHandle f(gzopen(path.string().c_str(), gz ? "wb6" : "wbT"));
  if (!f) throw NiftiError("cannot open for writing: " + path.string());

  auto write_all = [&](const void* src, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(src);
    while (n > 0) {
      const unsigned chunk = static_cast<unsigned>(std::min<std::size_t>(n, 1U << 30));
      if (gzwrite(f.get(), p, chunk) != static_cast<int>(chunk)) {
        throw NiftiError("write failed: " + path.string());
      }
      p += chunk;
      n -= chunk;
    }
  };
  write_all(h.data(), h.size());
  std::visit([&](const auto& v) { write_all(v.data(), v.size() * bytes_per_voxel); }, image.data);
  if (gzclose(f.release()) != Z_OK) throw NiftiError("write failed: " + path.string());
}

LabelMap to_label_map(const NiftiImage& image) {
  if (image.channels != 1) throw NiftiError("label volume must be 3D");
  std::vector<Label> labels(image.shape.size());
  std::visit(
      [&](const auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        if constexpr (std::is_floating_point_v<T>) {
          throw NiftiError("label volume must have an integer element kind");
        } else {
          for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] < 0 || v[i] > 2) {
              throw NiftiError("label value " + std::to_string(int(v[i])) + " outside {0,1,2}");
            }
            labels[i] = static_cast<Label>(v[i]);
          }
        }
      },
      image.data);
  LabelMap seg(image.shape, image.spacing, std::move(labels));
  seg.set_orientation(image.orientation);
  return seg;
}

ProbVolume to_prob_volume(const NiftiImage& image, std::size_t channel) {
  if (channel >= image.channels) throw NiftiError("channel index out of range");
  const std::size_t n = image.shape.size();
  std::vector<float> values(n);
  std::visit(
      [&](const auto& v) {
        for (std::size_t i = 0; i < n; ++i) {
          const double p = static_cast<double>(v[channel * n + i]);
          if (!(p >= 0.0 && p <= 1.0)) throw NiftiError("probability outside [0,1]");
          values[i] = static_cast<float>(p);
        }
      },
      image.data);
  ProbVolume out(image.shape, image.spacing, std::move(values));
  out.set_orientation(image.orientation);
  return out;
}

ProbMap to_prob_map(const NiftiImage& image) {
  std::vector<ProbVolume> channels;
  for (std::size_t c = 0; c < image.channels; ++c) channels.push_back(to_prob_volume(image, c));
  return ProbMap(std::move(channels));
}

NiftiImage to_image(const LabelMap& seg) {
  NiftiImage img{seg.shape(), 1, seg.spacing(), seg.orientation(), {}};
  std::vector<std::uint8_t> v(seg.size());
  std::transform(seg.data().begin(), seg.data().end(), v.begin(),
                 [](Label l) { return static_cast<std::uint8_t>(l); });
  img.data = std::move(v);
  return img;
}

NiftiImage to_image(const BinaryMask& mask) {
  return {mask.shape(), 1, mask.spacing(), mask.orientation(), mask.storage()};
}

NiftiImage to_image(const ProbVolume& prob) {
  return {prob.shape(), 1, prob.spacing(), prob.orientation(), prob.storage()};
}

NiftiImage to_image(const ProbMap& prob) {
  NiftiImage img{prob.shape(), prob.channels(), prob.spacing(), prob.channel(0).orientation(), {}};
  std::vector<float> v;
  v.reserve(img.voxel_count());
  for (std::size_t c = 0; c < prob.channels(); ++c) {
    const auto d = prob.channel(c).data();
    v.insert(v.end(), d.begin(), d.end());
  }
  img.data = std::move(v);
  return img;
}

LabelMap read_label_map(const std::filesystem::path& path) { return to_label_map(read_volume(path)); }

void write_label_map(const LabelMap& seg, const std::filesystem::path& path) {
  write_volume(to_image(seg), path);
}

}  // namespace livseg
