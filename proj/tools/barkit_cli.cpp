// barkit command-line tool: augment, atlas, loss-check, demo, preview.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "barkit/atlas.hpp"
#include "barkit/augment.hpp"
#include "barkit/error.hpp"
#include "barkit/nifti.hpp"
#include "barkit/pipeline.hpp"
#include "barkit/preview.hpp"
#include "barkit/supcon.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace barkit;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kIo = 3;
constexpr int kAlignment = 4;
constexpr int kCheckFailed = 5;

constexpr std::uint64_t kLossCheckStream = 0x1C;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadMagic:
    case ErrorKind::UnsupportedDtype:
    case ErrorKind::UnsupportedLayout:
    case ErrorKind::TruncatedFile:
    case ErrorKind::NonFiniteData:
    case ErrorKind::IoFailure:
    case ErrorKind::InvalidVolume:
    case ErrorKind::NonIntegerLabels:
    case ErrorKind::DuplicateLutId:
    case ErrorKind::UnknownRegionInVolume:
    case ErrorKind::InvalidLut:
      return kIo;
    case ErrorKind::DimsMismatch:
    case ErrorKind::AffineMismatch:
      return kAlignment;
    default:
      return kUsage;
  }
}

/// "0.7,0.3" -> SoftLabel, renormalized onto the simplex.
SoftLabel parse_label(const std::string& text, const char* flag) {
  std::vector<double> weights;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    char* end = nullptr;
    const double w = std::strtod(item.c_str(), &end);
    if (item.empty() || end != item.c_str() + item.size()) {
      throw Error(ErrorKind::InvalidLabel, std::string(flag) + ": '" + item + "' is not a number");
    }
    weights.push_back(w);
  }
  return SoftLabel::from_weights(weights);
}

void write_text(const fs::path& path, const std::string& text) {
  nifti::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct AugmentArgs {
  std::string method;
  std::string anchor, donor, atlas, lut;
  std::size_t regions = 2;
  double bernoulli = 0.5;
  double alpha = 1.0;
  std::string label_anchor, label_donor;
  std::uint64_t seed = 0;
  std::string out, meta;
  CLI::Option* regions_opt = nullptr;
  CLI::Option* bernoulli_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
};

int run_augment(const AugmentArgs& a) {
  const bool bar = a.method == "bar";
  if (bar && a.alpha_opt->count() > 0) {
    throw Error(ErrorKind::InvalidArgument, "--alpha applies to cutmix only");
  }
  if (!bar && (a.regions_opt->count() > 0 || a.bernoulli_opt->count() > 0)) {
    throw Error(ErrorKind::InvalidArgument, "--regions/--bernoulli apply to bar only");
  }
  const SoftLabel anchor_label = parse_label(a.label_anchor, "--label-anchor");
  const SoftLabel donor_label = parse_label(a.label_donor, "--label-donor");

  const ParcellationAtlas atlas = load_atlas(a.atlas, a.lut);
  const Volume3D anchor = nifti::load(a.anchor);
  const Volume3D donor = nifti::load(a.donor);

  AugmentedSample sample;
  if (bar) {
    RegionPolicy policy = FixedCount{a.regions};
    if (a.bernoulli_opt->count() > 0) policy = Bernoulli{a.bernoulli};
    sample = bar_sample(anchor, anchor_label, donor, donor_label, atlas, policy, a.seed);
  } else {
    sample = cutmix_sample(anchor, anchor_label, donor, donor_label, atlas, a.alpha, a.seed);
  }
  sample.provenance.anchor_id = a.anchor;
  sample.provenance.donor_id = a.donor;

  nifti::save(sample.volume, a.out);
  write_text(a.meta, sample_metadata(sample).dump(2) + "\n");
  std::printf("ratio=%.6f\n", sample.ratio);
  return kOk;
}

int run_atlas(const std::string& atlas_path, const std::string& lut_path) {
  const ParcellationAtlas atlas = load_atlas(atlas_path, lut_path);
  const std::size_t brain = brain_voxel_count(atlas);
  if (brain == 0) {
    std::cerr << "warning: atlas has no labelled voxels\n";
    return kOk;
  }
  const RegionLut& lut = atlas.lut();
  for (const auto& [id, count] : atlas.region_voxel_counts()) {
    std::printf("%d\t%s\t%zu\t%.6f\n", id, lut.at(id).c_str(), count,
                static_cast<double>(count) / static_cast<double>(brain));
  }
  return kOk;
}

struct LossCheckArgs {
  Eigen::Index n = 8;
  Eigen::Index d = 16;
  double tau = 0.1;
  std::uint64_t seed = 0;
  std::size_t trials = 1;
  double epsilon = 1e-4;
  double tolerance = 1e-5;
};

int run_loss_check(const LossCheckArgs& a) {
  if (!(a.tau > 0.0)) throw Error(ErrorKind::InvalidBatch, "--tau must be positive");
  bool ok = true;
  for (std::size_t t = 0; t < a.trials; ++t) {
    Rng rng = Rng::derive(a.seed, kLossCheckStream, t);
    const EmbeddingBatch batch = random_batch(a.n, a.d, a.tau, rng);
    const double loss = soft_supcon_loss(batch).value;
    const double err = finite_diff_check(batch, a.epsilon);
    std::cout << loss_check_line(a.n, a.d, a.tau, loss, err) << "\n";
    if (!(err < a.tolerance)) ok = false;
  }
  if (!ok) {
    std::cerr << "gradient check exceeded " << a.tolerance << "\n";
    return kCheckFailed;
  }
  return kOk;
}

int run_demo(const std::string& config_path, const std::string& out_dir) {
  const auto bytes = nifti::read_file(config_path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  const DemoConfig cfg = parse_demo_config(j);
  const ComparisonReport report = run_comparison(cfg);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::IoFailure, "cannot create " + out_dir + ": " + ec.message());
  const std::string table = format_table(report);
  write_text(fs::path(out_dir) / "report.json", to_json(report).dump(2) + "\n");
  write_text(fs::path(out_dir) / "report.txt", table);
  std::cout << table;
  return kOk;
}

int run_preview(const std::string& in, const std::string& axis, std::int64_t index,
                const std::string& out) {
  const Volume3D vol = nifti::load(in);
  const int ax = axis == "x" ? 0 : axis == "y" ? 1 : 2;
  const Slice slice = extract_slice(vol, ax, index);
  nifti::write_file(out, encode_pgm(slice));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brain-aware replacement augmentation toolkit", "barkit"};
  app.require_subcommand(1);

  AugmentArgs aug;
  auto* augment = app.add_subcommand("augment", "BAR or CutMix one anchor/donor pair");
  augment->add_option("method", aug.method, "bar | cutmix")
      ->required()
      ->check(CLI::IsMember({"bar", "cutmix"}));
  augment->add_option("--anchor", aug.anchor, "anchor NIfTI")->required();
  augment->add_option("--donor", aug.donor, "donor NIfTI")->required();
  augment->add_option("--atlas", aug.atlas, "label-valued atlas NIfTI")->required();
  augment->add_option("--lut", aug.lut, "region lookup table (id<TAB>name)")->required();
  aug.regions_opt = augment->add_option("--regions", aug.regions, "replace exactly k regions");
  aug.bernoulli_opt =
      augment->add_option("--bernoulli", aug.bernoulli, "replace each region with probability p");
  aug.regions_opt->excludes(aug.bernoulli_opt);
  aug.alpha_opt = augment->add_option("--alpha", aug.alpha, "CutMix Beta(alpha, alpha)");
  augment->add_option("--label-anchor", aug.label_anchor, "class weights, e.g. 1,0")->required();
  augment->add_option("--label-donor", aug.label_donor, "class weights, e.g. 0,1")->required();
  augment->add_option("--seed", aug.seed)->required();
  augment->add_option("--out", aug.out, "output NIfTI")->required();
  augment->add_option("--meta", aug.meta, "output metadata JSON")->required();

  std::string atlas_path, lut_path;
  auto* atlas = app.add_subcommand("atlas", "per-region voxel counts as TSV");
  atlas->add_option("--atlas", atlas_path)->required();
  atlas->add_option("--lut", lut_path)->required();

  LossCheckArgs lc;
  auto* loss = app.add_subcommand("loss-check", "soft contrastive loss and gradient check");
  loss->add_option("--n", lc.n, "batch size")->capture_default_str();
  loss->add_option("--d", lc.d, "embedding dimension")->capture_default_str();
  loss->add_option("--tau", lc.tau, "temperature")->capture_default_str();
  loss->add_option("--seed", lc.seed)->capture_default_str();
  loss->add_option("--trials", lc.trials)->capture_default_str()->check(CLI::PositiveNumber);
  loss->add_option("--epsilon", lc.epsilon, "finite-difference step")->capture_default_str();
  loss->add_option("--tolerance", lc.tolerance, "max relative error")->capture_default_str();

  std::string config_path, out_dir;
  auto* demo = app.add_subcommand("demo", "phantom training comparison");
  demo->add_option("--config", config_path, "demo JSON config")->required();
  demo->add_option("--out-dir", out_dir, "directory for report.json and report.txt")->required();

  std::string preview_in, preview_axis, preview_out;
  std::int64_t preview_index = 0;
  auto* preview = app.add_subcommand("preview", "write one slice as binary PGM");
  preview->add_option("--in", preview_in)->required();
  preview->add_option("--axis", preview_axis)->required()->check(CLI::IsMember({"x", "y", "z"}));
  preview->add_option("--index", preview_index)->required();
  preview->add_option("--out", preview_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n";
    const auto used = app.get_subcommands();
    std::cerr << (used.empty() ? app.help() : used.front()->help());
    return kUsage;
  }

  try {
    if (*augment) return run_augment(aug);
    if (*atlas) return run_atlas(atlas_path, lut_path);
    if (*loss) return run_loss_check(lc);
    if (*demo) return run_demo(config_path, out_dir);
    if (*preview) return run_preview(preview_in, preview_axis, preview_index, preview_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  }
  return kUsage;
}
