#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "barkit/volume.hpp"

namespace barkit {

using RegionId = std::int32_t;
using RegionSet = std::set<RegionId>;
using RegionLut = std::map<RegionId, std::string>;

/// One boolean per voxel with a cached popcount.
class RegionMask {
 public:
  RegionMask() = default;
  RegionMask(Dims dims, std::vector<std::uint8_t> bits);

  const Dims& dims() const noexcept { return dims_; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  std::size_t voxel_count() const noexcept { return count_; }

  bool test(std::size_t index) const noexcept { return bits_[index] != 0; }
  bool test(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
    return bits_[dims_.index(x, y, z)] != 0;
  }

  RegionMask operator|(const RegionMask& other) const;
  RegionMask operator&(const RegionMask& other) const;

 private:
  Dims dims_{};
  std::vector<std::uint8_t> bits_;
  std::size_t count_ = 0;
};

/// Integer label grid plus region lookup table. Label 0 is background and
/// never appears in the table.
class ParcellationAtlas {
 public:
  ParcellationAtlas() = default;

  /// Validates that labels are non-negative, every nonzero label is in the
  /// table, and the table does not contain 0.
  ParcellationAtlas(Dims dims, Affine affine, std::vector<RegionId> labels,
                    RegionLut lut);

  /// Builds from a decoded label volume; values must be integers within 1e-6.
  static ParcellationAtlas from_volume(const Volume3D& labels, RegionLut lut);

  const Dims& dims() const noexcept { return dims_; }
  const Affine& affine() const noexcept { return affine_; }
  const std::vector<RegionId>& labels() const noexcept { return labels_; }
  const RegionLut& lut() const noexcept { return lut_; }

  std::vector<RegionId> region_ids() const;
  std::size_t region_count() const noexcept { return lut_.size(); }
  bool has_region(RegionId id) const noexcept { return lut_.contains(id); }

  /// Per-region voxel counts (every table entry is present, possibly 0).
  std::map<RegionId, std::size_t> region_voxel_counts() const;

 private:
  Dims dims_{};
  Affine affine_ = identity_affine();
  std::vector<RegionId> labels_;
  RegionLut lut_;
};

/// Parses `id<TAB>name` lines; `#` comments and blank lines are skipped.
RegionLut parse_lut(std::string_view text);
RegionLut load_lut(const std::filesystem::path& path);

ParcellationAtlas load_atlas(const std::filesystem::path& label_path,
                             const std::filesystem::path& lut_path);

/// Mask of voxels whose label is in `ids`. Unknown ids are rejected.
RegionMask region_mask(const ParcellationAtlas& atlas, const RegionSet& ids);

/// Mask of all nonzero-label voxels.
RegionMask brain_mask(const ParcellationAtlas& atlas);

std::size_t brain_voxel_count(const ParcellationAtlas& atlas);

inline constexpr double kAffineTolerance = 1e-4;

/// Throws DimsMismatch / AffineMismatch unless `vol` sits on the atlas grid.
void validate_alignment(const Volume3D& vol, const ParcellationAtlas& atlas);

}  // namespace barkit
