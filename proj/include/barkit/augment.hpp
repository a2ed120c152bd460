#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "barkit/atlas.hpp"
#include "barkit/random.hpp"
#include "barkit/soft_label.hpp"
#include "barkit/volume.hpp"
#include "json.hpp"

namespace barkit {

// ---------------------------------------------------------------------------
// Region selection

struct FixedCount {
  std::size_t k = 2;
};

struct Bernoulli {
  double p = 0.5;
};

/// How BAR picks the regions to replace. FixedCount{2} by default.
using RegionPolicy = std::variant<FixedCount, Bernoulli>;

/// FixedCount draws k distinct ids uniformly without replacement. Bernoulli
/// includes each region independently and redraws when nothing was picked.
RegionSet sample_regions(const ParcellationAtlas& atlas, const RegionPolicy& policy,
                         Rng& rng);

// ---------------------------------------------------------------------------
// Replacement kernels

struct Replacement {
  Volume3D volume;
  double ratio = 0.0;
  std::size_t replaced_voxels = 0;  ///< brain voxels taken from the donor
  std::size_t brain_voxels = 0;
  RegionMask replaced;              ///< brain voxels taken from the donor
};

/// Copies donor voxels wherever the atlas label is in `regions`.
/// ratio = replaced voxels / brain voxels.
Replacement bar_replace(const Volume3D& anchor, const Volume3D& donor,
                        const ParcellationAtlas& atlas, const RegionSet& regions);

/// Half-open voxel box [lo, hi) per axis.
struct Cuboid {
  std::array<std::int64_t, 3> lo{0, 0, 0};
  std::array<std::int64_t, 3> hi{0, 0, 0};

  std::size_t voxels() const noexcept;
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const noexcept {
    return x >= lo[0] && x < hi[0] && y >= lo[1] && y < hi[1] && z >= lo[2] && z < hi[2];
  }
  friend bool operator==(const Cuboid&, const Cuboid&) = default;
};

/// Side per axis = round(n * cbrt(1 - lambda)), placed at `center` and
/// clipped to the grid.
Cuboid cutmix_cuboid(const Dims& dims, double lambda,
                     const std::array<std::int64_t, 3>& center);

/// Copies donor voxels inside `box`; ratio counts brain voxels inside it.
Replacement cutmix_apply(const Volume3D& anchor, const Volume3D& donor,
                         const ParcellationAtlas& atlas, const Cuboid& box);

struct CutMixResult {
  Replacement replacement;
  Cuboid cuboid;
  double lambda = 1.0;
};

/// lambda ~ Beta(alpha, alpha), center uniform over the grid.
CutMixResult cutmix3d(const Volume3D& anchor, const Volume3D& donor, double alpha,
                      Rng& rng, const ParcellationAtlas& atlas);

/// Fraction of mask voxels with at least one 6-neighbour outside the mask
/// (grid exterior counts as outside).
double boundary_ratio(const RegionMask& replaced);

/// Mean boundary ratio of BAR masks against CutMix masks drawn at a matched
/// replacement ratio: CutMix draws are kept only when their ratio lies
/// within `ratio_window` of the BAR mean.
struct VariabilityComparison {
  double bar_boundary = 0.0;
  double bar_ratio = 0.0;
  double cutmix_boundary = 0.0;
  double cutmix_ratio = 0.0;
  std::size_t draws = 0;
  std::size_t cutmix_attempts = 0;
};

VariabilityComparison compare_variability(const ParcellationAtlas& atlas,
                                          const RegionPolicy& policy, double alpha,
                                          std::size_t draws, std::uint64_t seed,
                                          double ratio_window = 0.05);

// ---------------------------------------------------------------------------
// Samples and batches

enum class AugmentMethod { Bar, CutMix };

const char* method_name(AugmentMethod method) noexcept;

struct Provenance {
  AugmentMethod method = AugmentMethod::Bar;
  std::uint64_t seed = 0;
  std::vector<RegionId> regions;  ///< BAR only, ascending
  std::optional<Cuboid> cuboid;   ///< CutMix only
  std::string anchor_id;
  std::string donor_id;
};

struct AugmentedSample {
  Volume3D volume;
  double ratio = 0.0;
  SoftLabel label;
  Provenance provenance;
};

/// Read-only view of the volumes and labels a batch draws from.
struct SampleSource {
  std::span<const Volume3D> volumes;
  std::span<const SoftLabel> labels;

  std::size_t size() const noexcept { return volumes.size(); }
};

using PairList = std::vector<std::pair<std::size_t, std::size_t>>;

/// One BAR sample whose randomness comes entirely from `seed`.
AugmentedSample bar_sample(const Volume3D& anchor, const SoftLabel& anchor_label,
                           const Volume3D& donor, const SoftLabel& donor_label,
                           const ParcellationAtlas& atlas, const RegionPolicy& policy,
                           std::uint64_t seed);

AugmentedSample cutmix_sample(const Volume3D& anchor, const SoftLabel& anchor_label,
                              const Volume3D& donor, const SoftLabel& donor_label,
                              const ParcellationAtlas& atlas, double alpha,
                              std::uint64_t seed);

/// Pair i uses the sub-stream derived from (seed, i); output does not depend
/// on evaluation order.
std::vector<AugmentedSample> bar_batch(const PairList& pairs, const SampleSource& source,
                                       const ParcellationAtlas& atlas,
                                       const RegionPolicy& policy, std::uint64_t seed);

std::vector<AugmentedSample> cutmix_batch(const PairList& pairs, const SampleSource& source,
                                          const ParcellationAtlas& atlas, double alpha,
                                          std::uint64_t seed);

/// `{method, seed, ratio, label, regions|cuboid, anchor, donor}`
nlohmann::json sample_metadata(const AugmentedSample& sample);

}  // namespace barkit
