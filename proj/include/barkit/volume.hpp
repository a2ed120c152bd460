#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace barkit {

enum class DType : std::uint8_t { U8, I16, F32 };

const char* dtype_name(DType dtype) noexcept;

struct Dims {
  std::int64_t nx = 0;
  std::int64_t ny = 0;
  std::int64_t nz = 0;

  std::size_t voxels() const noexcept {
    return static_cast<std::size_t>(nx * ny * nz);
  }
  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
    return static_cast<std::size_t>(x + nx * (y + ny * z));
  }
  std::int64_t operator[](int axis) const noexcept {
    return axis == 0 ? nx : (axis == 1 ? ny : nz);
  }
  friend bool operator==(const Dims&, const Dims&) = default;
};

using Spacing = std::array<double, 3>;

/// Row-major 4x4 voxel-to-world transform.
using Affine = std::array<double, 16>;

Affine identity_affine() noexcept;
Affine scaling_affine(const Spacing& spacing) noexcept;

/// Dense scalar grid, x-fastest. Values are held as f32 regardless of the
/// on-disk type; `dtype()` remembers what the volume should be written as.
class Volume3D {
 public:
  Volume3D() = default;

  /// Validates dims, spacing and data length; rejects non-finite values.
  Volume3D(Dims dims, Spacing spacing, Affine affine, DType dtype,
           std::vector<float> data);

  /// Zero-filled volume with unit spacing and a scaling affine.
  static Volume3D zeros(Dims dims, DType dtype = DType::F32);

  const Dims& dims() const noexcept { return dims_; }
  const Spacing& spacing() const noexcept { return spacing_; }
  const Affine& affine() const noexcept { return affine_; }
  DType dtype() const noexcept { return dtype_; }

  std::span<const float> data() const noexcept { return data_; }
  std::size_t size() const noexcept { return data_.size(); }

  float at(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
    return data_[dims_.index(x, y, z)];
  }

  /// Copy with a replaced payload; same geometry and dtype.
  Volume3D with_data(std::vector<float> data) const;

  friend bool operator==(const Volume3D&, const Volume3D&) = default;

 private:
  Dims dims_{};
  Spacing spacing_{1.0, 1.0, 1.0};
  Affine affine_ = identity_affine();
  DType dtype_ = DType::F32;
  std::vector<float> data_;
};

}  // namespace barkit
