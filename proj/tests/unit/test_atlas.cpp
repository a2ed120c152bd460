#include <fstream>

#include "barkit/atlas.hpp"
#include "barkit/nifti.hpp"
#include "doctest.h"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace barkit;
using namespace barkit::testing;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

// 4x4x4 grid: label 1 fills the x<2,y<2,z<2 octant, everything else 0.
ParcellationAtlas single_octant_atlas() {
  const Dims d{4, 4, 4};
  std::vector<RegionId> labels(d.voxels(), 0);
  for (std::int64_t z = 0; z < 2; ++z)
    for (std::int64_t y = 0; y < 2; ++y)
      for (std::int64_t x = 0; x < 2; ++x) labels[d.index(x, y, z)] = 1;
  return ParcellationAtlas(d, identity_affine(), labels, {{1, "hippocampus"}});
}

}  // namespace

TEST_CASE("volume invariants") {
  CHECK(error_kind_of([] { volume_from({0, 1, 1}, {}); }) == ErrorKind::InvalidVolume);
  CHECK(error_kind_of([] { volume_from({2, 1, 1}, {1.0f}); }) == ErrorKind::InvalidVolume);
  CHECK(error_kind_of([] {
          Volume3D({1, 1, 1}, {1.0, 0.0, 1.0}, identity_affine(), DType::F32, {1.0f});
        }) == ErrorKind::InvalidVolume);
  CHECK(error_kind_of([] { volume_from({1, 1, 1}, {std::numeric_limits<float>::infinity()}); }) ==
        ErrorKind::NonFiniteData);
  const Volume3D z = Volume3D::zeros({2, 3, 4}, DType::I16);
  CHECK(z.size() == 24);
  CHECK(z.dtype() == DType::I16);
}

TEST_CASE("parse_lut") {
  const RegionLut lut = parse_lut("# comment\n1\thippocampus\r\n\n2\tleft ventricle\n");
  REQUIRE(lut.size() == 2);
  CHECK(lut.at(1) == "hippocampus");
  CHECK(lut.at(2) == "left ventricle");

  CHECK(error_kind_of([] { parse_lut("1\ta\n1\tb\n"); }) == ErrorKind::DuplicateLutId);
  CHECK(error_kind_of([] { parse_lut("0\tbackground\n"); }) == ErrorKind::InvalidLut);
  CHECK(error_kind_of([] { parse_lut("x\tname\n"); }) == ErrorKind::InvalidLut);
  CHECK(error_kind_of([] { parse_lut("3 no tab\n"); }) == ErrorKind::InvalidLut);
}

TEST_CASE("load_atlas from disk") {
  TempDir dir;
  const Dims d{4, 4, 4};
  std::vector<float> labels(d.voxels());
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<float>(i % 3);
  nifti::save(volume_from(d, labels, DType::U8), dir / "atlas.nii");
  write_text(dir / "lut.tsv", "1\thippocampus\n2\tventricle\n");

  const ParcellationAtlas atlas = load_atlas(dir / "atlas.nii", dir / "lut.tsv");
  CHECK(atlas.region_count() == 2);
  CHECK(atlas.region_ids() == std::vector<RegionId>{1, 2});

  SUBCASE("lut missing an id present in the grid") {
    write_text(dir / "short.tsv", "1\thippocampus\n");
    CHECK(error_kind_of([&] { load_atlas(dir / "atlas.nii", dir / "short.tsv"); }) ==
          ErrorKind::UnknownRegionInVolume);
  }
  SUBCASE("non-integer label value") {
    labels[5] = 3.5f;
    nifti::save(volume_from(d, labels, DType::F32), dir / "frac.nii");
    CHECK(error_kind_of([&] { load_atlas(dir / "frac.nii", dir / "lut.tsv"); }) ==
          ErrorKind::NonIntegerLabels);
  }
  SUBCASE("float labels within 1e-6 of an integer are accepted") {
    labels[5] = 2.0000005f;
    nifti::save(volume_from(d, labels, DType::F32), dir / "near.nii");
    CHECK(load_atlas(dir / "near.nii", dir / "lut.tsv").labels()[5] == 2);
  }
  SUBCASE("lut listing background") {
    write_text(dir / "bg.tsv", "0\tbackground\n1\ta\n2\tb\n");
    CHECK(error_kind_of([&] { load_atlas(dir / "atlas.nii", dir / "bg.tsv"); }) ==
          ErrorKind::InvalidLut);
  }
}

TEST_CASE("region masks and voxel accounting") {
  const ParcellationAtlas octant = single_octant_atlas();
  CHECK(region_mask(octant, {1}).voxel_count() == 8);
  CHECK(brain_voxel_count(octant) == 8);
  CHECK(region_mask(octant, {}).voxel_count() == 0);
  CHECK(error_kind_of([&] { region_mask(octant, {2}); }) == ErrorKind::UnknownRegionId);

  const ParcellationAtlas full = two_region_atlas();
  CHECK(brain_voxel_count(full) == 64);
  const auto all = region_mask(full, {1, 2});
  CHECK(all.bits() == brain_mask(full).bits());

  const ParcellationAtlas empty(Dims{2, 2, 2}, identity_affine(), std::vector<RegionId>(8, 0),
                                {{1, "unused"}});
  CHECK(brain_voxel_count(empty) == 0);
  CHECK(empty.region_voxel_counts().at(1) == 0);
}

TEST_CASE("mask algebra over random id sets") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const ParcellationAtlas atlas = random_atlas(random_dims(rng, 6), 6, 0.3, rng);
    RegionSet a, b;
    for (RegionId id = 1; id <= 6; ++id) {
      if (rng.bernoulli(0.5)) a.insert(id);
      if (rng.bernoulli(0.5)) b.insert(id);
    }
    RegionSet u = a, i;
    u.insert(b.begin(), b.end());
    for (RegionId id : a) {
      if (b.contains(id)) i.insert(id);
    }
    const auto ma = region_mask(atlas, a);
    const auto mb = region_mask(atlas, b);
    CHECK(region_mask(atlas, u).voxel_count() + region_mask(atlas, i).voxel_count() ==
          ma.voxel_count() + mb.voxel_count());
    CHECK((ma | mb).bits() == region_mask(atlas, u).bits());
    CHECK((ma & mb).bits() == region_mask(atlas, i).bits());
    CHECK(ma.voxel_count() == brute_label_count(atlas, a));
    const RegionSet every{1, 2, 3, 4, 5, 6};
    CHECK(brain_voxel_count(atlas) == region_mask(atlas, every).voxel_count());
    CHECK(brain_voxel_count(atlas) == brute_brain_count(atlas));
  }
}

TEST_CASE("validate_alignment") {
  const ParcellationAtlas atlas = two_region_atlas();
  CHECK_NOTHROW(validate_alignment(Volume3D::zeros({4, 4, 4}), atlas));
  CHECK(error_kind_of([&] { validate_alignment(Volume3D::zeros({4, 4, 5}), atlas); }) ==
        ErrorKind::DimsMismatch);

  Affine shifted = identity_affine();
  shifted[3] = 0.1;
  const Volume3D off({4, 4, 4}, {1, 1, 1}, shifted, DType::F32, std::vector<float>(64, 0.0f));
  CHECK(error_kind_of([&] { validate_alignment(off, atlas); }) == ErrorKind::AffineMismatch);

  Affine close = identity_affine();
  close[3] = 5e-5;
  const Volume3D near({4, 4, 4}, {1, 1, 1}, close, DType::F32, std::vector<float>(64, 0.0f));
  CHECK_NOTHROW(validate_alignment(near, atlas));

  try {
    validate_alignment(off, atlas);
  } catch (const Error& e) {
    CHECK(e.is_alignment());
  }
}
