#pragma once

#include <cstdint>
#include <vector>

#include "barkit/volume.hpp"

namespace barkit {

/// Greyscale slice, row-major, `width * height` pixels.
struct Slice {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;
};

/// Slice orthogonal to `axis` (0=x, 1=y, 2=z) at `index`, min-max scaled to
/// 0..255 over the slice. A constant slice maps to all zeros. The in-plane
/// axes keep their order: z slices are x by y, x slices are y by z.
Slice extract_slice(const Volume3D& vol, int axis, std::int64_t index);

/// Binary PGM (P5) with maxval 255.
std::vector<std::uint8_t> encode_pgm(const Slice& slice);

}  // namespace barkit
