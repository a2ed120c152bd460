#pragma once

#include <vector>

#include "barkit/atlas.hpp"
#include "barkit/random.hpp"
#include "barkit/volume.hpp"

namespace barkit {

/// Synthetic brain: an ellipsoid split into octant parcels, with a regional
/// hypointensity marking the positive ("AD") class.
struct PhantomConfig {
  Dims dims{32, 32, 32};
  int num_regions = 8;  ///< 1, 2, 4 or 8 octant-based parcels
  std::vector<RegionId> signal_regions{1, 2};
  double signal_delta = 0.4;
  double noise_sigma = 0.2;
  double base_intensity = 1.0;

  void validate() const;
};

/// Ellipsoid with semi-axes 0.45 * dims centered on the grid. Parcels split
/// at the centroid along x, then y, then z.
ParcellationAtlas make_synthetic_atlas(const PhantomConfig& cfg);

struct Phantom {
  Volume3D volume;
  int label = 0;  ///< 0 = CN, 1 = AD
};

Phantom make_phantom(const PhantomConfig& cfg, const ParcellationAtlas& atlas,
                     int class_id, Rng& rng);
Phantom make_phantom(const PhantomConfig& cfg, int class_id, Rng& rng);

}  // namespace barkit
