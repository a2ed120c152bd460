#include "barkit/atlas.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "barkit/error.hpp"
#include "barkit/nifti.hpp"

namespace barkit {
namespace {

std::size_t popcount(const std::vector<std::uint8_t>& bits) {
  return static_cast<std::size_t>(
      std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

std::string dims_string(const Dims& d) {
  return "(" + std::to_string(d.nx) + "," + std::to_string(d.ny) + "," +
         std::to_string(d.nz) + ")";
}

}  // namespace

RegionMask::RegionMask(Dims dims, std::vector<std::uint8_t> bits)
    : dims_(dims), bits_(std::move(bits)) {
  if (bits_.size() != dims_.voxels()) {
    throw Error(ErrorKind::InvalidVolume, "mask length does not match dims");
  }
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
  count_ = popcount(bits_);
}

RegionMask RegionMask::operator|(const RegionMask& other) const {
  if (!(dims_ == other.dims_)) {
    throw Error(ErrorKind::DimsMismatch, "mask dims differ");
  }
  std::vector<std::uint8_t> out(bits_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = bits_[i] | other.bits_[i];
  return RegionMask(dims_, std::move(out));
}

RegionMask RegionMask::operator&(const RegionMask& other) const {
  if (!(dims_ == other.dims_)) {
    throw Error(ErrorKind::DimsMismatch, "mask dims differ");
  }
  std::vector<std::uint8_t> out(bits_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = bits_[i] & other.bits_[i];
  return RegionMask(dims_, std::move(out));
}

ParcellationAtlas::ParcellationAtlas(Dims dims, Affine affine,
                                     std::vector<RegionId> labels, RegionLut lut)
    : dims_(dims), affine_(affine), labels_(std::move(labels)), lut_(std::move(lut)) {
  if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0 ||
      labels_.size() != dims_.voxels()) {
    throw Error(ErrorKind::InvalidVolume, "label grid does not match dims");
  }
  if (lut_.contains(0)) {
    throw Error(ErrorKind::InvalidLut, "background id 0 must not be listed");
  }
  for (const auto& [id, name] : lut_) {
    if (id < 0) throw Error(ErrorKind::InvalidLut, "negative region id");
  }
  std::set<RegionId> seen;
  for (RegionId v : labels_) {
    if (v < 0) {
      throw Error(ErrorKind::NonIntegerLabels, "negative label value");
    }
    if (v != 0) seen.insert(v);
  }
  for (RegionId id : seen) {
    if (!lut_.contains(id)) {
      throw Error(ErrorKind::UnknownRegionInVolume,
                  "label " + std::to_string(id) + " missing from lookup table");
    }
  }
}

ParcellationAtlas ParcellationAtlas::from_volume(const Volume3D& labels, RegionLut lut) {
  std::vector<RegionId> ids(labels.size());
  const auto data = labels.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = data[i];
    const double r = std::round(v);
    if (std::fabs(v - r) > 1e-6) {
      throw Error(ErrorKind::NonIntegerLabels,
                  "voxel " + std::to_string(i) + " has value " + std::to_string(v));
    }
    ids[i] = static_cast<RegionId>(r);
  }
  return ParcellationAtlas(labels.dims(), labels.affine(), std::move(ids), std::move(lut));
}

std::vector<RegionId> ParcellationAtlas::region_ids() const {
  std::vector<RegionId> out;
  out.reserve(lut_.size());
  for (const auto& entry : lut_) out.push_back(entry.first);
  return out;
}

std::map<RegionId, std::size_t> ParcellationAtlas::region_voxel_counts() const {
  std::map<RegionId, std::size_t> counts;
  for (const auto& entry : lut_) counts[entry.first] = 0;
  for (RegionId v : labels_) {
    if (v != 0) ++counts[v];
  }
  return counts;
}

RegionLut parse_lut(std::string_view text) {
  RegionLut lut;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    const auto tab = line.find('\t');
    if (tab == std::string_view::npos || tab == 0 || tab + 1 >= line.size()) {
      throw Error(ErrorKind::InvalidLut,
                  "line " + std::to_string(line_no) + ": expected id<TAB>name");
    }
    const auto id_text = line.substr(0, tab);
    RegionId id = 0;
    auto [ptr, ec] = std::from_chars(id_text.data(), id_text.data() + id_text.size(), id);
    if (ec != std::errc() || ptr != id_text.data() + id_text.size()) {
      throw Error(ErrorKind::InvalidLut,
                  "line " + std::to_string(line_no) + ": bad id '" +
                      std::string(id_text) + "'");
    }
    if (id <= 0) {
      throw Error(ErrorKind::InvalidLut,
                  "line " + std::to_string(line_no) + ": ids must be positive");
    }
    if (lut.contains(id)) {
      throw Error(ErrorKind::DuplicateLutId,
                  "line " + std::to_string(line_no) + ": id " + std::to_string(id));
    }
    lut.emplace(id, std::string(line.substr(tab + 1)));
  }
  return lut;
}

RegionLut load_lut(const std::filesystem::path& path) {
  const auto bytes = nifti::read_file(path);
  return parse_lut(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

ParcellationAtlas load_atlas(const std::filesystem::path& label_path,
                             const std::filesystem::path& lut_path) {
  auto labels = nifti::load(label_path);
  auto lut = load_lut(lut_path);
  return ParcellationAtlas::from_volume(labels, std::move(lut));
}

RegionMask region_mask(const ParcellationAtlas& atlas, const RegionSet& ids) {
  for (RegionId id : ids) {
    if (!atlas.has_region(id)) {
      throw Error(ErrorKind::UnknownRegionId, "region " + std::to_string(id));
    }
  }
  const auto& labels = atlas.labels();
  std::vector<std::uint8_t> bits(labels.size(), 0);
  if (!ids.empty()) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      bits[i] = ids.contains(labels[i]) ? 1 : 0;
    }
  }
  return RegionMask(atlas.dims(), std::move(bits));
}

RegionMask brain_mask(const ParcellationAtlas& atlas) {
  const auto& labels = atlas.labels();
  std::vector<std::uint8_t> bits(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) bits[i] = labels[i] != 0 ? 1 : 0;
  return RegionMask(atlas.dims(), std::move(bits));
}

std::size_t brain_voxel_count(const ParcellationAtlas& atlas) {
  const auto& labels = atlas.labels();
  return static_cast<std::size_t>(
      std::count_if(labels.begin(), labels.end(), [](RegionId v) { return v != 0; }));
}

void validate_alignment(const Volume3D& vol, const ParcellationAtlas& atlas) {
  if (!(vol.dims() == atlas.dims())) {
    throw Error(ErrorKind::DimsMismatch,
                "volume " + dims_string(vol.dims()) + " vs atlas " +
                    dims_string(atlas.dims()));
  }
  for (std::size_t i = 0; i < 16; ++i) {
    if (std::fabs(vol.affine()[i] - atlas.affine()[i]) > kAffineTolerance) {
      throw Error(ErrorKind::AffineMismatch,
                  "affine entry " + std::to_string(i) + " differs by " +
                      std::to_string(std::fabs(vol.affine()[i] - atlas.affine()[i])));
    }
  }
}

}  // namespace barkit
