#pragma once

#include <atomic>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <unistd.h>

#include "barkit/atlas.hpp"
#include "barkit/error.hpp"
#include "barkit/random.hpp"
#include "barkit/volume.hpp"

namespace barkit::testing {

/// Removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("barkit-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline Volume3D volume_from(Dims dims, std::vector<float> data, DType dtype = DType::F32) {
  return Volume3D(dims, {1.0, 1.0, 1.0}, identity_affine(), dtype, std::move(data));
}

inline Volume3D random_volume(Dims dims, Rng& rng, DType dtype = DType::F32) {
  std::vector<float> data(dims.voxels());
  for (auto& v : data) {
    switch (dtype) {
      case DType::U8: v = static_cast<float>(rng.uniform_int(0, 255)); break;
      case DType::I16: v = static_cast<float>(rng.uniform_int(-32768, 32767)); break;
      case DType::F32: v = static_cast<float>(rng.normal(0.0, 100.0)); break;
    }
  }
  return volume_from(dims, std::move(data), dtype);
}

/// 4x4x4, no background: z < 2 is region 1 (hippocampus), the rest region 2.
inline ParcellationAtlas two_region_atlas() {
  const Dims d{4, 4, 4};
  std::vector<RegionId> labels(d.voxels());
  for (std::int64_t z = 0; z < 4; ++z)
    for (std::int64_t y = 0; y < 4; ++y)
      for (std::int64_t x = 0; x < 4; ++x) labels[d.index(x, y, z)] = z < 2 ? 1 : 2;
  return ParcellationAtlas(d, identity_affine(), labels, {{1, "hippocampus"}, {2, "ventricle"}});
}

inline std::vector<float> as_floats(const std::vector<RegionId>& labels) {
  return {labels.begin(), labels.end()};
}

/// Random labels in [0, regions]; background drawn with probability
/// `background`. Every region in the table, possibly with no voxels.
inline ParcellationAtlas random_atlas(Dims dims, int regions, double background, Rng& rng) {
  std::vector<RegionId> labels(dims.voxels());
  for (auto& l : labels) {
    l = rng.uniform() < background ? 0 : static_cast<RegionId>(rng.uniform_int(1, regions));
  }
  RegionLut lut;
  for (int r = 1; r <= regions; ++r) lut[r] = "r" + std::to_string(r);
  return ParcellationAtlas(dims, identity_affine(), std::move(labels), std::move(lut));
}

inline Dims random_dims(Rng& rng, std::int64_t max_side) {
  return {rng.uniform_int(1, max_side), rng.uniform_int(1, max_side), rng.uniform_int(1, max_side)};
}

/// Runs `fn` and reports the ErrorKind it threw, if any.
template <typename Fn>
std::optional<ErrorKind> error_kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

}  // namespace barkit::testing
