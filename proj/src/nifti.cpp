#include "barkit/nifti.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "barkit/error.hpp"

namespace barkit::nifti {
namespace {

// Field offsets within the 348-byte header.
constexpr std::size_t kOffDim = 40;
constexpr std::size_t kOffDatatype = 70;
constexpr std::size_t kOffBitpix = 72;
constexpr std::size_t kOffPixdim = 76;
constexpr std::size_t kOffVoxOffset = 108;
constexpr std::size_t kOffSclSlope = 112;
constexpr std::size_t kOffSclInter = 116;
constexpr std::size_t kOffXyztUnits = 123;
constexpr std::size_t kOffQformCode = 252;
constexpr std::size_t kOffSformCode = 254;
constexpr std::size_t kOffQuatern = 256;
constexpr std::size_t kOffQoffset = 268;
constexpr std::size_t kOffSrow = 280;
constexpr std::size_t kOffMagic = 344;

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, bool swap)
      : bytes_(bytes), swap_(swap) {}

  template <typename T>
  T get(std::size_t offset) const {
    std::array<std::uint8_t, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + offset, sizeof(T));
    if (swap_) std::reverse(raw.begin(), raw.end());
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  bool swap_;
};

class Writer {
 public:
  explicit Writer(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(std::size_t offset, T value) {
    std::memcpy(out_.data() + offset, &value, sizeof(T));
  }

 private:
  std::vector<std::uint8_t>& out_;
};

static_assert(std::endian::native == std::endian::little,
              "NIfTI writer assumes a little-endian host");

std::size_t bytes_per_voxel(DType dtype) {
  switch (dtype) {
    case DType::U8: return 1;
    case DType::I16: return 2;
    case DType::F32: return 4;
  }
  return 0;
}

std::int16_t dtype_code(DType dtype) {
  switch (dtype) {
    case DType::U8: return kDtUint8;
    case DType::I16: return kDtInt16;
    case DType::F32: return kDtFloat32;
  }
  return 0;
}

Affine affine_from_qform(const Reader& r, const std::array<float, 8>& pixdim) {
  double b = r.get<float>(kOffQuatern);
  double c = r.get<float>(kOffQuatern + 4);
  double d = r.get<float>(kOffQuatern + 8);
  double a = 1.0 - (b * b + c * c + d * d);
  if (a < 1e-7) {
    double norm = 1.0 / std::sqrt(b * b + c * c + d * d);
    b *= norm;
    c *= norm;
    d *= norm;
    a = 0.0;
  } else {
    a = std::sqrt(a);
  }
  double qfac = pixdim[0] < 0.0f ? -1.0 : 1.0;
  double dx = pixdim[1], dy = pixdim[2], dz = pixdim[3] * qfac;

  Affine m = identity_affine();
  m[0] = (a * a + b * b - c * c - d * d) * dx;
  m[1] = 2.0 * (b * c - a * d) * dy;
  m[2] = 2.0 * (b * d + a * c) * dz;
  m[4] = 2.0 * (b * c + a * d) * dx;
  m[5] = (a * a + c * c - b * b - d * d) * dy;
  m[6] = 2.0 * (c * d - a * b) * dz;
  m[8] = 2.0 * (b * d - a * c) * dx;
  m[9] = 2.0 * (c * d + a * b) * dy;
  m[10] = (a * a + d * d - c * c - b * b) * dz;
  m[3] = r.get<float>(kOffQoffset);
  m[7] = r.get<float>(kOffQoffset + 4);
  m[11] = r.get<float>(kOffQoffset + 8);
  return m;
}

}  // namespace

Volume3D decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < static_cast<std::size_t>(kHeaderSize)) {
    throw Error(ErrorKind::TruncatedFile, "shorter than a NIfTI-1 header");
  }
  const char* magic = reinterpret_cast<const char*>(bytes.data() + kOffMagic);
  if (std::memcmp(magic, "n+1\0", 4) != 0) {
    throw Error(ErrorKind::BadMagic, "expected single-file NIfTI-1 magic");
  }

  bool swap = false;
  {
    Reader native(bytes, false);
    auto dim0 = native.get<std::int16_t>(kOffDim);
    if (dim0 < 1 || dim0 > 7) {
      swap = true;
      Reader swapped(bytes, true);
      dim0 = swapped.get<std::int16_t>(kOffDim);
      if (dim0 < 1 || dim0 > 7) {
        throw Error(ErrorKind::UnsupportedLayout,
                    "dim[0] out of range in either byte order");
      }
    }
  }
  const Reader r(bytes, swap);

  if (r.get<std::int32_t>(0) != kHeaderSize) {
    throw Error(ErrorKind::UnsupportedLayout, "sizeof_hdr is not 348");
  }

  std::array<std::int16_t, 8> dim{};
  for (int i = 0; i < 8; ++i) dim[i] = r.get<std::int16_t>(kOffDim + 2 * i);
  const int ndim = dim[0];
  std::array<std::int64_t, 3> extent{1, 1, 1};
  for (int i = 1; i <= ndim; ++i) {
    if (dim[i] < 1) {
      throw Error(ErrorKind::UnsupportedLayout,
                  "dim[" + std::to_string(i) + "] must be positive");
    }
    if (i <= 3) {
      extent[i - 1] = dim[i];
    } else if (dim[i] > 1) {
      throw Error(ErrorKind::UnsupportedLayout,
                  "only 3D volumes are supported");
    }
  }

  DType dtype;
  switch (r.get<std::int16_t>(kOffDatatype)) {
    case kDtUint8: dtype = DType::U8; break;
    case kDtInt16: dtype = DType::I16; break;
    case kDtFloat32: dtype = DType::F32; break;
    default:
      throw Error(ErrorKind::UnsupportedDtype,
                  "datatype code " +
                      std::to_string(r.get<std::int16_t>(kOffDatatype)));
  }

  std::array<float, 8> pixdim{};
  for (int i = 0; i < 8; ++i) pixdim[i] = r.get<float>(kOffPixdim + 4 * i);
  Spacing spacing{std::fabs(pixdim[1]), std::fabs(pixdim[2]),
                  std::fabs(pixdim[3])};
  for (auto& s : spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) s = 1.0;
  }

  const float vox_offset = r.get<float>(kOffVoxOffset);
  if (!(vox_offset >= static_cast<float>(kDataOffset))) {
    throw Error(ErrorKind::UnsupportedLayout, "vox_offset below 352");
  }
  const auto offset = static_cast<std::size_t>(vox_offset);

  const Dims dims{extent[0], extent[1], extent[2]};
  const std::size_t nvox = dims.voxels();
  const std::size_t bpv = bytes_per_voxel(dtype);
  if (bytes.size() < offset || bytes.size() - offset < nvox * bpv) {
    throw Error(ErrorKind::TruncatedFile,
                "payload needs " + std::to_string(nvox * bpv) +
                    " bytes after offset " + std::to_string(offset));
  }

  float slope = r.get<float>(kOffSclSlope);
  float inter = r.get<float>(kOffSclInter);
  const bool scale = slope != 0.0f && std::isfinite(slope) &&
                     !(slope == 1.0f && inter == 0.0f);
  if (!std::isfinite(inter)) inter = 0.0f;

  const Reader payload(bytes.subspan(offset), swap);
  std::vector<float> data(nvox);
  for (std::size_t i = 0; i < nvox; ++i) {
    float v = 0.0f;
    switch (dtype) {
      case DType::U8: v = static_cast<float>(payload.get<std::uint8_t>(i)); break;
      case DType::I16: v = static_cast<float>(payload.get<std::int16_t>(2 * i)); break;
      case DType::F32: v = payload.get<float>(4 * i); break;
    }
    data[i] = scale ? v * slope + inter : v;
  }

  Affine affine;
  if (r.get<std::int16_t>(kOffSformCode) > 0) {
    affine = identity_affine();
    for (int row = 0; row < 3; ++row) {
      for (int col = 0; col < 4; ++col) {
        affine[row * 4 + col] = r.get<float>(kOffSrow + 16 * row + 4 * col);
      }
    }
  } else if (r.get<std::int16_t>(kOffQformCode) > 0) {
    affine = affine_from_qform(r, pixdim);
  } else {
    affine = scaling_affine(spacing);
  }

  return Volume3D(dims, spacing, affine, dtype, std::move(data));
}

std::vector<std::uint8_t> encode(const Volume3D& vol) {
  const std::size_t nvox = vol.size();
  const std::size_t bpv = bytes_per_voxel(vol.dtype());
  std::vector<std::uint8_t> out(kDataOffset + nvox * bpv, 0);
  Writer w(out);

  w.put<std::int32_t>(0, kHeaderSize);
  const Dims& d = vol.dims();
  const std::array<std::int64_t, 3> extent{d.nx, d.ny, d.nz};
  for (auto e : extent) {
    if (e > 32767) {
      throw Error(ErrorKind::InvalidVolume, "dimension exceeds NIfTI-1 limit");
    }
  }
  w.put<std::int16_t>(kOffDim, 3);
  for (int i = 0; i < 3; ++i) {
    w.put<std::int16_t>(kOffDim + 2 * (i + 1), static_cast<std::int16_t>(extent[i]));
  }
  for (int i = 4; i < 8; ++i) w.put<std::int16_t>(kOffDim + 2 * i, 1);
  w.put<std::int16_t>(kOffDatatype, dtype_code(vol.dtype()));
  w.put<std::int16_t>(kOffBitpix, static_cast<std::int16_t>(8 * bpv));

  w.put<float>(kOffPixdim, 1.0f);
  for (int i = 0; i < 3; ++i) {
    w.put<float>(kOffPixdim + 4 * (i + 1), static_cast<float>(vol.spacing()[i]));
  }
  w.put<float>(kOffVoxOffset, static_cast<float>(kDataOffset));
  w.put<float>(kOffSclSlope, 1.0f);
  w.put<float>(kOffSclInter, 0.0f);
  out[kOffXyztUnits] = 2;  // NIFTI_UNITS_MM
  w.put<std::int16_t>(kOffQformCode, 0);
  w.put<std::int16_t>(kOffSformCode, 1);
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 4; ++col) {
      w.put<float>(kOffSrow + 16 * row + 4 * col,
                   static_cast<float>(vol.affine()[row * 4 + col]));
    }
  }
  std::memcpy(out.data() + kOffMagic, "n+1\0", 4);

  std::uint8_t* payload = out.data() + kDataOffset;
  const auto data = vol.data();
  for (std::size_t i = 0; i < nvox; ++i) {
    const float v = data[i];
    switch (vol.dtype()) {
      case DType::U8: {
        payload[i] = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0f, 255.0f));
        break;
      }
      case DType::I16: {
        auto s = static_cast<std::int16_t>(std::clamp(std::round(v), -32768.0f, 32767.0f));
        std::memcpy(payload + 2 * i, &s, 2);
        break;
      }
      case DType::F32:
        std::memcpy(payload + 4 * i, &v, 4);
        break;
    }
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw Error(ErrorKind::IoFailure, "read failed for " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) {
    throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
  }
}

Volume3D load(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return decode(bytes);
}

void save(const Volume3D& vol, const std::filesystem::path& path) {
  const auto bytes = encode(vol);
  write_file(path, bytes);
}

}  // namespace barkit::nifti
