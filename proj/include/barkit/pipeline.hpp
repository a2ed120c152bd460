#pragma once

#include <string>
#include <vector>

#include "barkit/training.hpp"
#include "json.hpp"

namespace barkit {

struct DemoConfig {
  PhantomConfig phantom;
  TrainConfig train;
};

/// Strict parse of a demo config: unknown keys and out-of-range values raise
/// InvalidConfig. Missing keys keep their defaults.
DemoConfig parse_demo_config(const nlohmann::json& j);
nlohmann::json to_json(const DemoConfig& cfg);

struct ArmResult {
  std::string name;
  EvalReport report;
};

struct ComparisonReport {
  DemoConfig config;
  std::vector<ArmResult> arms;  ///< bar_pretrain, from_scratch, cutmix_pretrain
  VariabilityComparison variability;
  std::vector<std::uint64_t> test_ids;
};

/// (a) BAR pretrain + fine-tune, (b) from-scratch cross-entropy,
/// (c) CutMix pretrain + fine-tune; identical splits, seeds and initial
/// weights across arms.
ComparisonReport run_comparison(const DemoConfig& cfg);

nlohmann::json to_json(const ComparisonReport& report);
std::string format_table(const ComparisonReport& report);

}  // namespace barkit
