#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "barkit/volume.hpp"

namespace barkit::nifti {

inline constexpr std::int32_t kHeaderSize = 348;
inline constexpr std::int64_t kDataOffset = 352;

inline constexpr std::int16_t kDtUint8 = 2;
inline constexpr std::int16_t kDtInt16 = 4;
inline constexpr std::int16_t kDtFloat32 = 16;

/// Decodes a single-file NIfTI-1 image held in memory. Byte order is
/// detected from dim[0]; scl_slope/scl_inter are applied when slope != 0.
Volume3D decode(std::span<const std::uint8_t> bytes);

/// Encodes little-endian NIfTI-1 with vox_offset 352 and the affine stored
/// as an sform. Integer dtypes are rounded and clamped to their range.
std::vector<std::uint8_t> encode(const Volume3D& vol);

Volume3D load(const std::filesystem::path& path);
void save(const Volume3D& vol, const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path,
                std::span<const std::uint8_t> bytes);

}  // namespace barkit::nifti
