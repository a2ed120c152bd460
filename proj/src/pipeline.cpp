#include "barkit/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "barkit/error.hpp"

namespace barkit {
namespace {

constexpr std::uint64_t kInitStream = 0x1417;
constexpr std::uint64_t kVariabilityStream = 0x7A8;

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& where) {
  if (!obj.is_object()) {
    throw Error(ErrorKind::InvalidConfig, where + " must be an object");
  }
  for (const auto& item : obj.items()) {
    if (!known.contains(item.key())) {
      throw Error(ErrorKind::InvalidConfig, "unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidConfig, std::string("bad value for '") + key + "': " + e.what());
  }
}

void read_count(const json& obj, const char* key, std::size_t& out) {
  if (!obj.contains(key)) return;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw Error(ErrorKind::InvalidConfig, std::string("'") + key + "' must be a non-negative integer");
  }
  out = v.get<std::size_t>();
}

PhantomConfig parse_phantom(const json& j) {
  reject_unknown(j, {"dims", "num_regions", "signal_regions", "signal_delta", "noise_sigma",
                     "base_intensity"},
                 "phantom");
  PhantomConfig p;
  if (j.contains("dims")) {
    std::vector<std::int64_t> dims;
    read(j, "dims", dims);
    if (dims.size() != 3) throw Error(ErrorKind::InvalidConfig, "dims needs three entries");
    p.dims = {dims[0], dims[1], dims[2]};
  }
  read(j, "num_regions", p.num_regions);
  read(j, "signal_regions", p.signal_regions);
  read(j, "signal_delta", p.signal_delta);
  read(j, "noise_sigma", p.noise_sigma);
  read(j, "base_intensity", p.base_intensity);
  p.validate();
  return p;
}

TrainConfig parse_train(const json& j) {
  reject_unknown(j, {"seed", "batch_size", "pretrain_epochs", "finetune_epochs",
                     "learning_rate", "temperature", "policy", "train_size", "test_size",
                     "views", "finetune_encoder", "cutmix_alpha", "variability_draws"},
                 "train");
  TrainConfig t;
  read(j, "seed", t.seed);
  read_count(j, "batch_size", t.batch_size);
  read_count(j, "pretrain_epochs", t.pretrain_epochs);
  read_count(j, "finetune_epochs", t.finetune_epochs);
  read(j, "learning_rate", t.learning_rate);
  read(j, "temperature", t.temperature);
  read_count(j, "train_size", t.train_size);
  read_count(j, "test_size", t.test_size);
  read_count(j, "views", t.views);
  read(j, "finetune_encoder", t.finetune_encoder);
  read(j, "cutmix_alpha", t.cutmix_alpha);
  read_count(j, "variability_draws", t.variability_draws);
  if (j.contains("policy")) {
    const json& pol = j.at("policy");
    reject_unknown(pol, {"fixed_count", "bernoulli"}, "policy");
    if (pol.size() != 1) {
      throw Error(ErrorKind::InvalidConfig, "policy needs exactly one of fixed_count, bernoulli");
    }
    if (pol.contains("fixed_count")) {
      std::size_t k = 0;
      read_count(pol, "fixed_count", k);
      t.policy = FixedCount{k};
    } else {
      double p = 0.0;
      read(pol, "bernoulli", p);
      t.policy = Bernoulli{p};
    }
  }
  t.validate();
  return t;
}

json policy_json(const RegionPolicy& policy) {
  if (const auto* fixed = std::get_if<FixedCount>(&policy)) return {{"fixed_count", fixed->k}};
  return {{"bernoulli", std::get<Bernoulli>(policy).p}};
}

}  // namespace

DemoConfig parse_demo_config(const json& j) {
  reject_unknown(j, {"phantom", "train"}, "config");
  DemoConfig cfg;
  if (j.contains("phantom")) cfg.phantom = parse_phantom(j.at("phantom"));
  if (j.contains("train")) cfg.train = parse_train(j.at("train"));
  cfg.phantom.validate();
  cfg.train.validate();
  if (const auto* fixed = std::get_if<FixedCount>(&cfg.train.policy)) {
    if (fixed->k > static_cast<std::size_t>(cfg.phantom.num_regions)) {
      throw Error(ErrorKind::InvalidConfig, "policy k exceeds num_regions");
    }
  }
  const EncoderParams shape;
  if (cfg.phantom.dims.nx % shape.pool_grid != 0 || cfg.phantom.dims.ny % shape.pool_grid != 0 ||
      cfg.phantom.dims.nz % shape.pool_grid != 0) {
    throw Error(ErrorKind::InvalidConfig, "phantom dims must be divisible by the pooling grid");
  }
  return cfg;
}

json to_json(const DemoConfig& cfg) {
  const PhantomConfig& p = cfg.phantom;
  const TrainConfig& t = cfg.train;
  return {
      {"phantom",
       {{"dims", {p.dims.nx, p.dims.ny, p.dims.nz}},
        {"num_regions", p.num_regions},
        {"signal_regions", p.signal_regions},
        {"signal_delta", p.signal_delta},
        {"noise_sigma", p.noise_sigma},
        {"base_intensity", p.base_intensity}}},
      {"train",
       {{"seed", t.seed},
        {"batch_size", t.batch_size},
        {"pretrain_epochs", t.pretrain_epochs},
        {"finetune_epochs", t.finetune_epochs},
        {"learning_rate", t.learning_rate},
        {"temperature", t.temperature},
        {"policy", policy_json(t.policy)},
        {"train_size", t.train_size},
        {"test_size", t.test_size},
        {"views", t.views},
        {"finetune_encoder", t.finetune_encoder},
        {"cutmix_alpha", t.cutmix_alpha},
        {"variability_draws", t.variability_draws}}},
  };
}

ComparisonReport run_comparison(const DemoConfig& cfg) {
  cfg.phantom.validate();
  cfg.train.validate();
  const TrainConfig& tc = cfg.train;
  const ParcellationAtlas atlas = make_synthetic_atlas(cfg.phantom);

  Rng init_rng = Rng::derive(tc.seed, kInitStream, 0);
  const EncoderParams initial = EncoderParams::init(init_rng);

  // Train ids [0, train_size), test ids [train_size, train_size + test_size).
  const Dataset train =
      make_dataset(cfg.phantom, atlas, tc.seed, 0, tc.train_size, initial.pool_grid);
  const Dataset test =
      make_dataset(cfg.phantom, atlas, tc.seed, tc.train_size, tc.test_size, initial.pool_grid);

  ComparisonReport report;
  report.config = cfg;
  report.test_ids = test.ids;

  auto pretrained_arm = [&](const char* name, AugmentMethod method) {
    TrainResult pre = pretrain_contrastive(initial, train, atlas, tc, method);
    TrainResult fine = finetune_ce(std::move(pre.params), train, tc, tc.finetune_encoder);
    ArmResult arm{name, evaluate(fine.params, test)};
    arm.report.pretrain_loss = std::move(pre.loss_curve);
    arm.report.finetune_loss = std::move(fine.loss_curve);
    return arm;
  };

  report.arms.push_back(pretrained_arm("bar_pretrain_finetune", AugmentMethod::Bar));
  {
    TrainResult scratch = finetune_ce(initial, train, tc, /*train_encoder=*/true);
    ArmResult arm{"from_scratch_ce", evaluate(scratch.params, test)};
    arm.report.finetune_loss = std::move(scratch.loss_curve);
    report.arms.push_back(std::move(arm));
  }
  report.arms.push_back(pretrained_arm("cutmix_pretrain_finetune", AugmentMethod::CutMix));

  report.variability = compare_variability(
      atlas, tc.policy, tc.cutmix_alpha, tc.variability_draws,
      Rng::derive_seed(tc.seed, kVariabilityStream, 0));
  return report;
}

json to_json(const ComparisonReport& report) {
  json arms = json::array();
  for (const auto& arm : report.arms) {
    json a = to_json(arm.report);
    a["name"] = arm.name;
    arms.push_back(std::move(a));
  }
  const VariabilityComparison& v = report.variability;
  return {
      {"config", to_json(report.config)},
      {"arms", std::move(arms)},
      {"variability",
       {{"draws", v.draws},
        {"bar_mean_boundary_ratio", v.bar_boundary},
        {"bar_mean_replacement_ratio", v.bar_ratio},
        {"cutmix_mean_boundary_ratio", v.cutmix_boundary},
        {"cutmix_mean_replacement_ratio", v.cutmix_ratio},
        {"cutmix_attempts", v.cutmix_attempts}}},
      {"test_ids", report.test_ids},
  };
}

std::string format_table(const ComparisonReport& report) {
  auto cell = [](double value, bool defined) {
    char buf[32];
    if (!defined) return std::string("undef");
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return std::string(buf);
  };
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-26s %9s %9s %9s %5s %5s %5s %5s\n", "arm", "accuracy",
                "precision", "recall", "tp", "fp", "fn", "tn");
  out << line;
  for (const auto& arm : report.arms) {
    const EvalReport& r = arm.report;
    std::snprintf(line, sizeof line, "%-26s %9s %9s %9s %5zu %5zu %5zu %5zu\n", arm.name.c_str(),
                  cell(r.accuracy, true).c_str(), cell(r.precision, r.precision_defined).c_str(),
                  cell(r.recall, r.recall_defined).c_str(), r.confusion.tp, r.confusion.fp,
                  r.confusion.fn, r.confusion.tn);
    out << line;
  }
  const VariabilityComparison& v = report.variability;
  std::snprintf(line, sizeof line,
                "\nboundary ratio over %zu draws: bar %.4f (ratio %.4f)  cutmix %.4f (ratio %.4f)\n",
                v.draws, v.bar_boundary, v.bar_ratio, v.cutmix_boundary, v.cutmix_ratio);
  out << line;
  return out.str();
}

}  // namespace barkit
