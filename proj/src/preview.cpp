#include "barkit/preview.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "barkit/error.hpp"

namespace barkit {

Slice extract_slice(const Volume3D& vol, int axis, std::int64_t index) {
  if (axis < 0 || axis > 2) throw Error(ErrorKind::InvalidArgument, "axis must be 0, 1 or 2");
  const Dims& d = vol.dims();
  if (index < 0 || index >= d[axis]) {
    throw Error(ErrorKind::InvalidArgument,
                "slice index " + std::to_string(index) + " outside [0, " +
                    std::to_string(d[axis]) + ")");
  }
  const int u = axis == 0 ? 1 : 0;
  const int v = axis == 2 ? 1 : 2;

  Slice s;
  s.width = static_cast<std::size_t>(d[u]);
  s.height = static_cast<std::size_t>(d[v]);
  std::vector<double> values;
  values.reserve(s.width * s.height);
  std::array<std::int64_t, 3> p{};
  p[axis] = index;
  for (std::int64_t row = 0; row < d[v]; ++row) {
    for (std::int64_t col = 0; col < d[u]; ++col) {
      p[u] = col;
      p[v] = row;
      values.push_back(vol.at(p[0], p[1], p[2]));
    }
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo;
  const double range = *hi - *lo;
  s.pixels.reserve(values.size());
  for (double x : values) {
    const double scaled = range > 0.0 ? 255.0 * (x - min) / range : 0.0;
    s.pixels.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(scaled, 0.0, 255.0))));
  }
  return s;
}

std::vector<std::uint8_t> encode_pgm(const Slice& slice) {
  const std::string header =
      "P5\n" + std::to_string(slice.width) + " " + std::to_string(slice.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), slice.pixels.begin(), slice.pixels.end());
  return out;
}

}  // namespace barkit
