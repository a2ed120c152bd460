#include "barkit/augment.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>

#include "barkit/error.hpp"

namespace barkit {
namespace {

constexpr std::uint64_t kBarStream = 0xBA5;
constexpr std::uint64_t kCutMixStream = 0xC07;

void check_pair(const Volume3D& anchor, const Volume3D& donor,
                const ParcellationAtlas& atlas) {
  validate_alignment(anchor, atlas);
  validate_alignment(donor, atlas);
}

std::size_t checked_brain_count(const ParcellationAtlas& atlas) {
  const std::size_t brain = brain_voxel_count(atlas);
  if (brain == 0) {
    throw Error(ErrorKind::EmptyBrain, "atlas has no labelled voxels");
  }
  return brain;
}

}  // namespace

RegionSet sample_regions(const ParcellationAtlas& atlas, const RegionPolicy& policy,
                         Rng& rng) {
  const auto ids = atlas.region_ids();
  if (ids.empty()) {
    throw Error(ErrorKind::EmptyRegionSelection, "atlas has no regions");
  }

  if (const auto* fixed = std::get_if<FixedCount>(&policy)) {
    if (fixed->k == 0) {
      throw Error(ErrorKind::InvalidArgument, "region count must be positive");
    }
    if (fixed->k > ids.size()) {
      throw Error(ErrorKind::KTooLarge,
                  "k=" + std::to_string(fixed->k) + " but atlas has " +
                      std::to_string(ids.size()) + " regions");
    }
    std::vector<RegionId> picked;
    picked.reserve(fixed->k);
    std::sample(ids.begin(), ids.end(), std::back_inserter(picked),
                static_cast<std::ptrdiff_t>(fixed->k), rng.engine());
    return RegionSet(picked.begin(), picked.end());
  }

  const auto& bern = std::get<Bernoulli>(policy);
  if (!(bern.p > 0.0 && bern.p < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "Bernoulli p must lie in (0,1)");
  }
  RegionSet out;
  while (out.empty()) {
    for (RegionId id : ids) {
      if (rng.bernoulli(bern.p)) out.insert(id);
    }
  }
  return out;
}

Replacement bar_replace(const Volume3D& anchor, const Volume3D& donor,
                        const ParcellationAtlas& atlas, const RegionSet& regions) {
  check_pair(anchor, donor, atlas);
  if (regions.empty()) {
    throw Error(ErrorKind::EmptyRegionSelection, "no regions selected");
  }
  RegionMask mask = region_mask(atlas, regions);
  const std::size_t brain = checked_brain_count(atlas);

  const auto a = anchor.data();
  const auto d = donor.data();
  std::vector<float> out(a.begin(), a.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask.test(i)) out[i] = d[i];
  }

  Replacement result;
  result.replaced_voxels = mask.voxel_count();
  result.brain_voxels = brain;
  result.ratio = static_cast<double>(result.replaced_voxels) / static_cast<double>(brain);
  result.volume = anchor.with_data(std::move(out));
  result.replaced = std::move(mask);
  return result;
}

std::size_t Cuboid::voxels() const noexcept {
  std::size_t n = 1;
  for (int a = 0; a < 3; ++a) {
    n *= static_cast<std::size_t>(std::max<std::int64_t>(hi[a] - lo[a], 0));
  }
  return n;
}

Cuboid cutmix_cuboid(const Dims& dims, double lambda,
                     const std::array<std::int64_t, 3>& center) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::RatioOutOfRange, "lambda " + std::to_string(lambda));
  }
  // The double cbrt is off by an ulp at exact cubes such as 0.125, which
  // would break ties in the rounding below; the long double one is not.
  const long double scale = std::cbrt(static_cast<long double>(1.0 - lambda));
  Cuboid box;
  for (int a = 0; a < 3; ++a) {
    const std::int64_t n = dims[a];
    // std::round is half-away-from-zero
    const auto side = std::clamp<std::int64_t>(
        static_cast<std::int64_t>(std::round(static_cast<long double>(n) * scale)), 0, n);
    const std::int64_t lo = center[a] - side / 2;
    box.lo[a] = std::clamp<std::int64_t>(lo, 0, n);
    box.hi[a] = std::clamp<std::int64_t>(lo + side, 0, n);
  }
  return box;
}

Replacement cutmix_apply(const Volume3D& anchor, const Volume3D& donor,
                         const ParcellationAtlas& atlas, const Cuboid& box) {
  check_pair(anchor, donor, atlas);
  const std::size_t brain = checked_brain_count(atlas);
  const Dims& dims = anchor.dims();
  const auto a = anchor.data();
  const auto d = donor.data();
  const auto& labels = atlas.labels();

  std::vector<float> out(a.begin(), a.end());
  std::vector<std::uint8_t> bits(out.size(), 0);
  for (std::int64_t z = box.lo[2]; z < box.hi[2]; ++z) {
    for (std::int64_t y = box.lo[1]; y < box.hi[1]; ++y) {
      for (std::int64_t x = box.lo[0]; x < box.hi[0]; ++x) {
        const std::size_t i = dims.index(x, y, z);
        out[i] = d[i];
        if (labels[i] != 0) bits[i] = 1;
      }
    }
  }

  Replacement result;
  result.replaced = RegionMask(dims, std::move(bits));
  result.replaced_voxels = result.replaced.voxel_count();
  result.brain_voxels = brain;
  result.ratio = static_cast<double>(result.replaced_voxels) / static_cast<double>(brain);
  result.volume = anchor.with_data(std::move(out));
  return result;
}

CutMixResult cutmix3d(const Volume3D& anchor, const Volume3D& donor, double alpha,
                      Rng& rng, const ParcellationAtlas& atlas) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw Error(ErrorKind::InvalidArgument, "alpha must be positive");
  }
  check_pair(anchor, donor, atlas);
  const double lambda = rng.beta(alpha, alpha);
  const Dims& dims = anchor.dims();
  std::array<std::int64_t, 3> center{};
  for (int a = 0; a < 3; ++a) center[a] = rng.uniform_int(0, dims[a] - 1);

  CutMixResult result;
  result.lambda = lambda;
  result.cuboid = cutmix_cuboid(dims, lambda, center);
  result.replacement = cutmix_apply(anchor, donor, atlas, result.cuboid);
  return result;
}

double boundary_ratio(const RegionMask& replaced) {
  if (replaced.voxel_count() == 0) {
    throw Error(ErrorKind::EmptyMask, "boundary ratio of an empty mask");
  }
  const Dims& d = replaced.dims();
  std::size_t boundary = 0;
  for (std::int64_t z = 0; z < d.nz; ++z) {
    for (std::int64_t y = 0; y < d.ny; ++y) {
      for (std::int64_t x = 0; x < d.nx; ++x) {
        if (!replaced.test(x, y, z)) continue;
        const bool interior =
            x > 0 && x + 1 < d.nx && y > 0 && y + 1 < d.ny && z > 0 && z + 1 < d.nz &&
            replaced.test(x - 1, y, z) && replaced.test(x + 1, y, z) &&
            replaced.test(x, y - 1, z) && replaced.test(x, y + 1, z) &&
            replaced.test(x, y, z - 1) && replaced.test(x, y, z + 1);
        if (!interior) ++boundary;
      }
    }
  }
  return static_cast<double>(boundary) / static_cast<double>(replaced.voxel_count());
}

VariabilityComparison compare_variability(const ParcellationAtlas& atlas,
                                          const RegionPolicy& policy, double alpha,
                                          std::size_t draws, std::uint64_t seed,
                                          double ratio_window) {
  if (draws == 0) throw Error(ErrorKind::InvalidArgument, "draws must be positive");
  // Only the masks matter; both volumes are blank grids on the atlas.
  const Volume3D blank(atlas.dims(), {1.0, 1.0, 1.0}, atlas.affine(), DType::F32,
                       std::vector<float>(atlas.dims().voxels(), 0.0f));
  VariabilityComparison out;
  out.draws = draws;

  for (std::size_t i = 0; i < draws; ++i) {
    Rng rng = Rng::derive(seed, kBarStream, i);
    const Replacement rep = bar_replace(blank, blank, atlas, sample_regions(atlas, policy, rng));
    out.bar_boundary += boundary_ratio(rep.replaced);
    out.bar_ratio += rep.ratio;
  }
  out.bar_boundary /= static_cast<double>(draws);
  out.bar_ratio /= static_cast<double>(draws);

  const std::size_t max_attempts = 1000 * draws;
  std::size_t kept = 0;
  while (kept < draws) {
    if (out.cutmix_attempts == max_attempts) {
      throw Error(ErrorKind::InvalidArgument,
                  "CutMix never reaches the BAR replacement ratio");
    }
    Rng rng = Rng::derive(seed, kCutMixStream, out.cutmix_attempts++);
    const CutMixResult cm = cutmix3d(blank, blank, alpha, rng, atlas);
    const Replacement& rep = cm.replacement;
    if (rep.replaced_voxels == 0 || std::fabs(rep.ratio - out.bar_ratio) > ratio_window) {
      continue;
    }
    out.cutmix_boundary += boundary_ratio(rep.replaced);
    out.cutmix_ratio += rep.ratio;
    ++kept;
  }
  out.cutmix_boundary /= static_cast<double>(draws);
  out.cutmix_ratio /= static_cast<double>(draws);
  return out;
}

const char* method_name(AugmentMethod method) noexcept {
  return method == AugmentMethod::Bar ? "bar" : "cutmix";
}

AugmentedSample bar_sample(const Volume3D& anchor, const SoftLabel& anchor_label,
                           const Volume3D& donor, const SoftLabel& donor_label,
                           const ParcellationAtlas& atlas, const RegionPolicy& policy,
                           std::uint64_t seed) {
  Rng rng(seed);
  const RegionSet regions = sample_regions(atlas, policy, rng);
  Replacement rep = bar_replace(anchor, donor, atlas, regions);

  AugmentedSample sample;
  sample.label = mix_labels(anchor_label, donor_label, rep.ratio);
  sample.ratio = rep.ratio;
  sample.volume = std::move(rep.volume);
  sample.provenance.method = AugmentMethod::Bar;
  sample.provenance.seed = seed;
  sample.provenance.regions.assign(regions.begin(), regions.end());
  return sample;
}

AugmentedSample cutmix_sample(const Volume3D& anchor, const SoftLabel& anchor_label,
                              const Volume3D& donor, const SoftLabel& donor_label,
                              const ParcellationAtlas& atlas, double alpha,
                              std::uint64_t seed) {
  Rng rng(seed);
  CutMixResult cm = cutmix3d(anchor, donor, alpha, rng, atlas);

  AugmentedSample sample;
  sample.label = mix_labels(anchor_label, donor_label, cm.replacement.ratio);
  sample.ratio = cm.replacement.ratio;
  sample.volume = std::move(cm.replacement.volume);
  sample.provenance.method = AugmentMethod::CutMix;
  sample.provenance.seed = seed;
  sample.provenance.cuboid = cm.cuboid;
  return sample;
}

namespace {

template <typename MakeSample>
std::vector<AugmentedSample> run_batch(const PairList& pairs, const SampleSource& source,
                                       std::uint64_t seed, std::uint64_t stream,
                                       MakeSample&& make) {
  if (source.volumes.size() != source.labels.size()) {
    throw Error(ErrorKind::LengthMismatch, "volume and label counts differ");
  }
  std::vector<AugmentedSample> out;
  out.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto [anchor, donor] = pairs[i];
    if (anchor >= source.size() || donor >= source.size()) {
      throw Error(ErrorKind::InvalidArgument,
                  "pair " + std::to_string(i) + " references a missing sample");
    }
    const std::uint64_t sub = Rng::derive_seed(seed, stream, i);
    AugmentedSample s = make(source.volumes[anchor], source.labels[anchor],
                             source.volumes[donor], source.labels[donor], sub);
    s.provenance.anchor_id = std::to_string(anchor);
    s.provenance.donor_id = std::to_string(donor);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

std::vector<AugmentedSample> bar_batch(const PairList& pairs, const SampleSource& source,
                                       const ParcellationAtlas& atlas,
                                       const RegionPolicy& policy, std::uint64_t seed) {
  return run_batch(pairs, source, seed, kBarStream,
                   [&](const Volume3D& a, const SoftLabel& ya, const Volume3D& d,
                       const SoftLabel& yd, std::uint64_t sub) {
                     return bar_sample(a, ya, d, yd, atlas, policy, sub);
                   });
}

std::vector<AugmentedSample> cutmix_batch(const PairList& pairs, const SampleSource& source,
                                          const ParcellationAtlas& atlas, double alpha,
                                          std::uint64_t seed) {
  return run_batch(pairs, source, seed, kCutMixStream,
                   [&](const Volume3D& a, const SoftLabel& ya, const Volume3D& d,
                       const SoftLabel& yd, std::uint64_t sub) {
                     return cutmix_sample(a, ya, d, yd, atlas, alpha, sub);
                   });
}

nlohmann::json sample_metadata(const AugmentedSample& sample) {
  const Provenance& p = sample.provenance;
  nlohmann::json j;
  j["method"] = method_name(p.method);
  j["seed"] = p.seed;
  j["ratio"] = sample.ratio;
  j["label"] = sample.label.probs();
  if (p.method == AugmentMethod::Bar) {
    j["regions"] = p.regions;
  } else if (p.cuboid) {
    const Cuboid& c = *p.cuboid;
    j["cuboid"] = {c.lo[0], c.hi[0], c.lo[1], c.hi[1], c.lo[2], c.hi[2]};
  }
  j["anchor"] = p.anchor_id;
  j["donor"] = p.donor_id;
  return j;
}

}  // namespace barkit
