#include "barkit/volume.hpp"

#include <cmath>
#include <string>

#include "barkit/error.hpp"

namespace barkit {

const char* dtype_name(DType dtype) noexcept {
  switch (dtype) {
    case DType::U8: return "u8";
    case DType::I16: return "i16";
    case DType::F32: return "f32";
  }
  return "?";
}

Affine identity_affine() noexcept {
  return {1, 0, 0, 0,
          0, 1, 0, 0,
          0, 0, 1, 0,
          0, 0, 0, 1};
}

Affine scaling_affine(const Spacing& spacing) noexcept {
  Affine a = identity_affine();
  a[0] = spacing[0];
  a[5] = spacing[1];
  a[10] = spacing[2];
  return a;
}

Volume3D::Volume3D(Dims dims, Spacing spacing, Affine affine, DType dtype,
                   std::vector<float> data)
    : dims_(dims),
      spacing_(spacing),
      affine_(affine),
      dtype_(dtype),
      data_(std::move(data)) {
  if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0) {
    throw Error(ErrorKind::InvalidVolume, "dims must be positive");
  }
  if (data_.size() != dims_.voxels()) {
    throw Error(ErrorKind::InvalidVolume,
                "data length " + std::to_string(data_.size()) +
                    " does not match dims product " +
                    std::to_string(dims_.voxels()));
  }
  for (double s : spacing_) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw Error(ErrorKind::InvalidVolume, "spacing must be positive");
    }
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw Error(ErrorKind::NonFiniteData,
                  "non-finite value at voxel " + std::to_string(i));
    }
  }
}

Volume3D Volume3D::zeros(Dims dims, DType dtype) {
  Spacing spacing{1.0, 1.0, 1.0};
  std::vector<float> data(dims.nx > 0 && dims.ny > 0 && dims.nz > 0
                              ? dims.voxels()
                              : 0,
                          0.0f);
  return Volume3D(dims, spacing, scaling_affine(spacing), dtype,
                  std::move(data));
}

Volume3D Volume3D::with_data(std::vector<float> data) const {
  return Volume3D(dims_, spacing_, affine_, dtype_, std::move(data));
}

}  // namespace barkit
