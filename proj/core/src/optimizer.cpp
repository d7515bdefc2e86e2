#include "xmodal/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xmodal/error.hpp"
#include "xmodal/evaluation.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/sampling.hpp"

namespace xmodal {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kEpsilon = 1e-8;

const double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::Adamine: return "adamine";
    case Scenario::AdamineIns: return "adamine_ins";
    case Scenario::AdamineSem: return "adamine_sem";
    case Scenario::AdamineInsCls: return "adamine_ins_cls";
    case Scenario::AdamineAvg: return "adamine_avg";
    case Scenario::Pwpp: return "pwpp";
  }
  return "?";
}

std::vector<std::string> scenario_names() {
  return {"adamine",         "adamine_ins", "adamine_sem",
          "adamine_ins_cls", "adamine_avg", "pwpp"};
}

Scenario parse_scenario(const std::string& name) {
  if (name == "adamine") return Scenario::Adamine;
  if (name == "adamine_ins") return Scenario::AdamineIns;
  if (name == "adamine_sem") return Scenario::AdamineSem;
  if (name == "adamine_ins_cls") return Scenario::AdamineInsCls;
  if (name == "adamine_avg") return Scenario::AdamineAvg;
  if (name == "pwpp") return Scenario::Pwpp;
  std::string valid;
  for (const auto& n : scenario_names()) {
    if (!valid.empty()) valid += ", ";
    valid += n;
  }
  throw ConfigError("unknown scenario '" + name + "' (valid: " + valid + ")");
}

ScenarioLosses scenario_losses(Scenario scenario) {
  ScenarioLosses sl;
  switch (scenario) {
    case Scenario::Adamine:
      sl.instance = sl.semantic = true;
      sl.strategy = AggregationStrategy::Adaptive;
      break;
    case Scenario::AdamineIns:
      sl.instance = true;
      sl.strategy = AggregationStrategy::Adaptive;
      break;
    case Scenario::AdamineSem:
      sl.semantic = true;
      sl.strategy = AggregationStrategy::Adaptive;
      break;
    case Scenario::AdamineInsCls:
      sl.instance = sl.classification = true;
      sl.strategy = AggregationStrategy::Adaptive;
      break;
    case Scenario::AdamineAvg:
      sl.instance = sl.semantic = true;
      sl.strategy = AggregationStrategy::Average;
      break;
    case Scenario::Pwpp:
      sl.pairwise = true;
      sl.strategy = AggregationStrategy::Average;
      break;
  }
  return sl;
}

void TrainConfig::validate() const {
  loss.validate();
  if (learning_rate <= 0.0) {
    throw ConfigError("train config: learning_rate must be positive");
  }
  if (epochs < 1) throw ConfigError("train config: epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("train config: batch_size must be >= 2");
  if (labeled_fraction < 0.0 || labeled_fraction > 1.0) {
    throw ConfigError("train config: labeled_fraction must be in [0, 1]");
  }
  if (eval_every < 1) throw ConfigError("train config: eval_every must be >= 1");
}

AdamState make_adam_state(const EncoderParams& params) {
  AdamState s;
  s.m = zeros_like(params);
  s.v = zeros_like(params);
  s.step = 0;
  return s;
}

namespace {

void adam_update_layer(DenseLayer& p, const DenseLayer& g, DenseLayer& m,
                       DenseLayer& v, double lr, double bc1, double bc2) {
  auto update = [&](double& pv, double gv, double& mv, double& vv) {
    mv = kBeta1 * mv + (1.0 - kBeta1) * gv;
    vv = kBeta2 * vv + (1.0 - kBeta2) * gv * gv;
    pv -= lr * (mv * bc1) / (std::sqrt(vv * bc2) + kEpsilon);
  };
  for (std::size_t r = 0; r < p.weight.size(); ++r) {
    for (std::size_t c = 0; c < p.weight[r].size(); ++c) {
      update(p.weight[r][c], g.weight[r][c], m.weight[r][c], v.weight[r][c]);
    }
  }
  for (std::size_t i = 0; i < p.bias.size(); ++i) {
    update(p.bias[i], g.bias[i], m.bias[i], v.bias[i]);
  }
}

}  // namespace

void adam_step(EncoderParams& params, const EncoderParams& grads,
               AdamState& state, double learning_rate, FreezeBranch frozen) {
  ++state.step;
  const double bc1 = 1.0 / (1.0 - std::pow(kBeta1, double(state.step)));
  const double bc2 = 1.0 / (1.0 - std::pow(kBeta2, double(state.step)));

  if (frozen != FreezeBranch::A) {
    for (std::size_t i = 0; i < params.branch_a.size(); ++i) {
      adam_update_layer(params.branch_a[i], grads.branch_a[i],
                        state.m.branch_a[i], state.v.branch_a[i],
                        learning_rate, bc1, bc2);
    }
  }
  if (frozen != FreezeBranch::B) {
    for (std::size_t i = 0; i < params.branch_b.size(); ++i) {
      adam_update_layer(params.branch_b[i], grads.branch_b[i],
                        state.m.branch_b[i], state.v.branch_b[i],
                        learning_rate, bc1, bc2);
    }
  }
  if (params.head) {
    adam_update_layer(*params.head, *grads.head, *state.m.head, *state.v.head,
                      learning_rate, bc1, bc2);
  }
}

namespace {

BatchData materialize_batch(const Dataset& ds, const MiniBatch& mb) {
  BatchData bd;
  bd.features_a.reserve(mb.pair_indices.size());
  bd.features_b.reserve(mb.pair_indices.size());
  bd.labels.reserve(mb.pair_indices.size());
  for (std::size_t idx : mb.pair_indices) {
    const auto& s = ds.samples[idx];
    bd.features_a.push_back(s.features_a);
    bd.features_b.push_back(s.features_b);
    bd.labels.push_back(s.class_label);
  }
  return bd;
}

struct BatchStepResult {
  EncoderParams update;
  double loss = 0.0;
  std::size_t beta_r = 0;
  std::size_t beta_s = 0;
  double norm_ratio = 0.0;  // adaptive/average; NaN when not applicable
};

// Pairwise baseline: every item of each modality against every item of the
// other one, the matching counterpart positive and the rest negative,
// averaged over all enumerated pairs.
BatchStepResult pairwise_batch_step(const EncoderParams& params,
                                    const BatchData& batch,
                                    const BatchEmbeddings& emb,
                                    const LossConfig& loss_cfg) {
  BatchStepResult out;
  out.norm_ratio = kNaN;
  const std::size_t n = batch.size();
  EncoderParams sum = zeros_like(params);
  double loss_sum = 0.0;
  std::size_t active = 0;

  std::vector<Vector> up_a(n, Vector(params.spec.latent_dim, 0.0));
  std::vector<Vector> up_b(n, Vector(params.spec.latent_dim, 0.0));
  std::vector<bool> touched_a(n, false), touched_b(n, false);

  for (Direction dir : {Direction::AtoB, Direction::BtoA}) {
    const bool a_to_b = dir == Direction::AtoB;
    const auto& q_lat = a_to_b ? emb.latent_a : emb.latent_b;
    const auto& c_lat = a_to_b ? emb.latent_b : emb.latent_a;
    auto& q_up = a_to_b ? up_a : up_b;
    auto& c_up = a_to_b ? up_b : up_a;
    auto& q_touch = a_to_b ? touched_a : touched_b;
    auto& c_touch = a_to_b ? touched_b : touched_a;
    for (std::size_t q = 0; q < n; ++q) {
      for (std::size_t j = 0; j < n; ++j) {
        auto r = pairwise_loss(q_lat[q], c_lat[j], j == q ? 1 : 0,
                               loss_cfg.alpha_pos, loss_cfg.alpha_neg);
        if (r.loss <= 0.0) continue;
        ++active;
        loss_sum += r.loss;
        for (std::size_t i = 0; i < r.grad_query.size(); ++i) {
          q_up[q][i] += r.grad_query[i];
          c_up[j][i] += r.grad_candidate[i];
        }
        q_touch[q] = true;
        c_touch[j] = true;
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (touched_a[i]) {
      encode_backward_accum(params, Branch::A, batch.features_a[i], up_a[i],
                            sum);
    }
    if (touched_b[i]) {
      encode_backward_accum(params, Branch::B, batch.features_b[i], up_b[i],
                            sum);
    }
  }
  const auto total = static_cast<double>(2 * n * n);
  out.update = zeros_like(params);
  axpy_params(1.0 / total, sum, out.update);
  out.loss = loss_sum / total;
  out.beta_r = active;
  return out;
}

// Classification-head term for the ins+cls scenario: mean softmax
// cross-entropy over both latents of every labeled pair, weighted by lambda.
void add_classification_term(const EncoderParams& params,
                             const BatchData& batch,
                             const BatchEmbeddings& emb, double lambda,
                             BatchStepResult& step) {
  EncoderParams ce_sum = zeros_like(params);
  double ce_loss_sum = 0.0;
  std::size_t ce_terms = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!batch.labels[i]) continue;
    const std::size_t label = *batch.labels[i];
    for (Branch br : {Branch::A, Branch::B}) {
      const Vector& latent =
          br == Branch::A ? emb.latent_a[i] : emb.latent_b[i];
      const Vector& features =
          br == Branch::A ? batch.features_a[i] : batch.features_b[i];
      const Vector scores = classification_head_forward(params, latent);
      auto ce = softmax_cross_entropy(scores, label);
      ce_loss_sum += ce.loss;
      ++ce_terms;
      const Vector grad_latent =
          classification_head_backward(params, latent, ce.grad_scores, ce_sum);
      encode_backward_accum(params, br, features, grad_latent, ce_sum);
    }
  }
  if (ce_terms == 0) return;
  const double scale = lambda / static_cast<double>(ce_terms);
  axpy_params(scale, ce_sum, step.update);
  step.loss += lambda * (ce_loss_sum / static_cast<double>(ce_terms));
}

BatchStepResult triplet_batch_step(const EncoderParams& params,
                                   const BatchData& batch,
                                   const BatchEmbeddings& emb,
                                   const ScenarioLosses& sl,
                                   const LossConfig& loss_cfg,
                                   Rng& semantic_rng) {
  BatchStepResult out;
  const TripletSet triplets = enumerate_batch_triplets(
      batch.labels, sl.instance, sl.semantic, semantic_rng);
  RawBatchGradients raw =
      accumulate_triplet_gradients(params, batch, emb, triplets, loss_cfg);
  GradientAccumulator acc =
      finalize_gradients(raw, sl.strategy, loss_cfg.lambda);
  out.loss = total_loss(acc.instance_loss, acc.semantic_loss, loss_cfg.lambda);
  out.beta_r = acc.beta_r;
  out.beta_s = acc.beta_s;
  if (sl.strategy == AggregationStrategy::Adaptive) {
    GradientAccumulator avg =
        finalize_gradients(raw, AggregationStrategy::Average, loss_cfg.lambda);
    const double na = params_l2_norm(acc.update);
    const double nv = params_l2_norm(avg.update);
    out.norm_ratio = (na == 0.0 && nv == 0.0) ? 1.0 : na / nv;
  } else {
    out.norm_ratio = kNaN;
  }
  out.update = std::move(acc.update);
  return out;
}

}  // namespace

TrainResult train(const TrainConfig& config, const EncoderSpec& spec,
                  const Dataset& train_set, const Dataset& validation_set,
                  const ProgressFn& progress) {
  config.validate();
  spec.validate();
  const ScenarioLosses sl = scenario_losses(config.scenario);

  if (train_set.size() == 0 || validation_set.size() == 0) {
    throw ConfigError("train: datasets must be nonempty");
  }
  if (train_set.size() < config.batch_size) {
    throw ConfigError("train: dataset has " +
                      std::to_string(train_set.size()) +
                      " pairs, smaller than batch_size " +
                      std::to_string(config.batch_size));
  }
  if (spec.input_dim_a != train_set.dim_a ||
      spec.input_dim_b != train_set.dim_b) {
    throw ConfigError("train: encoder input dims (" +
                      std::to_string(spec.input_dim_a) + ", " +
                      std::to_string(spec.input_dim_b) +
                      ") do not match dataset dims (" +
                      std::to_string(train_set.dim_a) + ", " +
                      std::to_string(train_set.dim_b) + ")");
  }
  if (sl.needs_labels() && train_set.labeled_count() == 0) {
    throw ConfigError("train: scenario '" + scenario_name(config.scenario) +
                      "' needs class labels but the training set has none");
  }
  if (sl.classification && train_set.n_classes == 0) {
    throw ConfigError("train: classification head needs n_classes > 0");
  }

  EncoderParams params = init_params(
      spec,
      sl.classification ? std::optional<std::size_t>(train_set.n_classes)
                        : std::nullopt,
      derive_seed(config.seed, 0));
  AdamState adam = make_adam_state(params);

  Rng sampling_rng(derive_seed(config.seed, 1));
  Rng semantic_rng(derive_seed(config.seed, 2));
  const std::uint64_t eval_seed = derive_seed(config.seed, 3);
  const std::size_t val_subset =
      std::min<std::size_t>(1000, validation_set.size());

  TrainResult result;
  result.history.best_epoch = 0;
  result.history.best_val_medr = std::numeric_limits<double>::infinity();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const FreezeBranch frozen =
        (config.freeze_branch != FreezeBranch::None &&
         epoch < config.unfreeze_epoch)
            ? config.freeze_branch
            : FreezeBranch::None;

    const auto batches = build_epoch_batches(
        train_set, config.batch_size, config.labeled_fraction, sampling_rng);
    if (batches.empty()) {
      throw ConfigError("train: no full batch fits the training set");
    }

    double loss_sum = 0.0, beta_r_sum = 0.0, beta_s_sum = 0.0, norm_sum = 0.0;
    double min_ratio = std::numeric_limits<double>::infinity();
    bool has_ratio = false;
    std::size_t quota_fallbacks = 0;
    const auto quota = static_cast<std::size_t>(
        std::llround(config.batch_size * config.labeled_fraction));

    for (const auto& mb : batches) {
      if (mb.labeled_count != quota) ++quota_fallbacks;
      const BatchData batch = materialize_batch(train_set, mb);
      const BatchEmbeddings emb = encode_batch(params, batch);

      BatchStepResult step =
          sl.pairwise
              ? pairwise_batch_step(params, batch, emb, config.loss)
              : triplet_batch_step(params, batch, emb, sl, config.loss,
                                   semantic_rng);
      if (sl.classification) {
        add_classification_term(params, batch, emb, config.loss.lambda, step);
      }

      loss_sum += step.loss;
      beta_r_sum += static_cast<double>(step.beta_r);
      beta_s_sum += static_cast<double>(step.beta_s);
      norm_sum += params_l2_norm(step.update);
      if (!std::isnan(step.norm_ratio)) {
        min_ratio = std::min(min_ratio, step.norm_ratio);
        has_ratio = true;
      }

      adam_step(params, step.update, adam, config.learning_rate, frozen);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    const auto nb = static_cast<double>(batches.size());
    rec.mean_loss = loss_sum / nb;
    rec.mean_beta_r = beta_r_sum / nb;
    rec.mean_beta_s = beta_s_sum / nb;
    rec.mean_update_norm = norm_sum / nb;
    rec.min_update_norm_ratio = has_ratio ? min_ratio : kNaN;
    rec.val_medr_ab = kNaN;
    rec.val_medr_ba = kNaN;
    rec.quota_fallback_batches = quota_fallbacks;

    if (epoch % config.eval_every == 0 || epoch == config.epochs) {
      const ValidationMedR v =
          validation_medr(params, validation_set, val_subset, eval_seed);
      rec.val_medr_ab = v.a_to_b;
      rec.val_medr_ba = v.b_to_a;
      if (v.mean() < result.history.best_val_medr) {
        result.history.best_val_medr = v.mean();
        result.history.best_epoch = epoch;
        result.best_params = params;
      }
    }

    result.history.epochs.push_back(rec);
    if (progress) progress(rec);
  }
  return result;
}

}  // namespace xmodal
