#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "xmodal/dataset.hpp"
#include "xmodal/encoder.hpp"
#include "xmodal/losses.hpp"
#include "xmodal/mining.hpp"

namespace xmodal {

// Training scenarios: the full model, its ablations, and the pairwise
// baseline. Names double as the CLI-facing identifiers.
enum class Scenario {
  Adamine,        // instance + semantic triplets, adaptive aggregation
  AdamineIns,     // instance triplets only, adaptive
  AdamineSem,     // semantic triplets only, adaptive
  AdamineInsCls,  // instance triplets + classification head, adaptive
  AdamineAvg,     // instance + semantic triplets, average aggregation
  Pwpp,           // double-margin pairwise loss, average aggregation
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);
std::vector<std::string> scenario_names();

enum class FreezeBranch { None, A, B };

struct TrainConfig {
  Scenario scenario = Scenario::Adamine;
  LossConfig loss;
  double learning_rate = 1e-4;
  std::size_t epochs = 50;
  std::size_t batch_size = 100;
  double labeled_fraction = 0.5;
  FreezeBranch freeze_branch = FreezeBranch::None;
  std::size_t unfreeze_epoch = 0;  // first epoch trained unfrozen (1-based)
  std::size_t eval_every = 1;
  std::uint64_t seed = 1;

  void validate() const;
};

// Which loss families and aggregation strategy a scenario activates.
struct ScenarioLosses {
  bool instance = false;
  bool semantic = false;
  bool classification = false;
  bool pairwise = false;
  AggregationStrategy strategy = AggregationStrategy::Adaptive;

  bool needs_labels() const {
    return semantic || classification;
  }
};

ScenarioLosses scenario_losses(Scenario scenario);

struct AdamState {
  EncoderParams m;
  EncoderParams v;
  std::size_t step = 0;
};

AdamState make_adam_state(const EncoderParams& params);

// Standard bias-corrected Adam (beta1 0.9, beta2 0.999, eps 1e-8) applied to
// the unfrozen parameters only; frozen parameters keep their values and
// moments untouched.
void adam_step(EncoderParams& params, const EncoderParams& grads,
               AdamState& state, double learning_rate,
               FreezeBranch frozen = FreezeBranch::None);

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double mean_beta_r = 0.0;
  double mean_beta_s = 0.0;
  double mean_update_norm = 0.0;
  // Smallest per-batch (adaptive norm / average norm) this epoch; NaN when
  // the strategy is not adaptive.
  double min_update_norm_ratio = 0.0;
  double val_medr_ab = 0.0;  // NaN when the epoch was not evaluated
  double val_medr_ba = 0.0;
  // Batches whose labeled count deviated from the configured quota because
  // one of the pools ran dry.
  std::size_t quota_fallback_batches = 0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;     // 1-based; 0 when never evaluated
  double best_val_medr = 0.0;     // mean over directions at best_epoch
};

struct TrainResult {
  EncoderParams best_params;
  TrainHistory history;
};

using ProgressFn = std::function<void(const EpochRecord&)>;

// Full training loop: epoch batch construction, triplet mining / pairwise or
// classification terms per scenario, Adam updates, periodic validation MedR
// and best-snapshot selection (lowest mean validation MedR, earliest epoch
// on ties). Deterministic for a given config and seed.
TrainResult train(const TrainConfig& config, const EncoderSpec& spec,
                  const Dataset& train_set, const Dataset& validation_set,
                  const ProgressFn& progress = nullptr);

}  // namespace xmodal
