#include "barkit/phantom.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "barkit/error.hpp"

namespace barkit {

void PhantomConfig::validate() const {
  if (dims.nx < 8 || dims.ny < 8 || dims.nz < 8) {
    throw Error(ErrorKind::InvalidConfig, "phantom dims must be at least 8 per axis");
  }
  if (num_regions != 1 && num_regions != 2 && num_regions != 4 && num_regions != 8) {
    throw Error(ErrorKind::InvalidConfig, "num_regions must be 1, 2, 4 or 8");
  }
  for (RegionId id : signal_regions) {
    if (id < 1 || id > num_regions) {
      throw Error(ErrorKind::InvalidConfig,
                  "signal region " + std::to_string(id) + " outside 1.." +
                      std::to_string(num_regions));
    }
  }
  if (!(noise_sigma >= 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "noise_sigma must be non-negative");
  }
}

ParcellationAtlas make_synthetic_atlas(const PhantomConfig& cfg) {
  cfg.validate();
  const Dims& d = cfg.dims;
  const double cx = (d.nx - 1) / 2.0, cy = (d.ny - 1) / 2.0, cz = (d.nz - 1) / 2.0;
  const double ax = 0.45 * d.nx, ay = 0.45 * d.ny, az = 0.45 * d.nz;

  std::vector<RegionId> labels(d.voxels(), 0);
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        const double u = (x - cx) / ax, v = (y - cy) / ay, w = (z - cz) / az;
        if (u * u + v * v + w * w > 1.0) continue;
        int parcel = 0;
        if (cfg.num_regions >= 2 && x > cx) parcel |= 1;
        if (cfg.num_regions >= 4 && y > cy) parcel |= 2;
        if (cfg.num_regions >= 8 && z > cz) parcel |= 4;
        labels[d.index(x, y, z)] = parcel + 1;
      }
    }
  }

  RegionLut lut;
  for (RegionId id = 1; id <= cfg.num_regions; ++id) {
    lut.emplace(id, "parcel_" + std::to_string(id));
  }
  return ParcellationAtlas(d, scaling_affine({1.0, 1.0, 1.0}), std::move(labels),
                           std::move(lut));
}

Phantom make_phantom(const PhantomConfig& cfg, const ParcellationAtlas& atlas,
                     int class_id, Rng& rng) {
  cfg.validate();
  if (class_id != 0 && class_id != 1) {
    throw Error(ErrorKind::InvalidArgument, "class id must be 0 or 1");
  }
  if (!(atlas.dims() == cfg.dims)) {
    throw Error(ErrorKind::DimsMismatch, "atlas does not match phantom dims");
  }
  const std::set<RegionId> signal(cfg.signal_regions.begin(), cfg.signal_regions.end());
  const auto& labels = atlas.labels();
  std::vector<float> data(labels.size(), 0.0f);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 0) continue;
    double mean = cfg.base_intensity;
    if (class_id == 1 && signal.contains(labels[i])) mean -= cfg.signal_delta;
    const double noise = cfg.noise_sigma > 0.0 ? rng.normal(0.0, cfg.noise_sigma) : 0.0;
    data[i] = static_cast<float>(mean + noise);
  }
  Phantom p;
  p.volume = Volume3D(cfg.dims, {1.0, 1.0, 1.0}, atlas.affine(), DType::F32, std::move(data));
  p.label = class_id;
  return p;
}

Phantom make_phantom(const PhantomConfig& cfg, int class_id, Rng& rng) {
  return make_phantom(cfg, make_synthetic_atlas(cfg), class_id, rng);
}

}  // namespace barkit
