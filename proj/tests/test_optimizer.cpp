#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "xmodal/error.hpp"
#include "xmodal/optimizer.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/synthetic.hpp"

using namespace xmodal;

namespace {

// Hand-built single-weight parameter container for scalar Adam checks.
EncoderParams scalar_params(double w) {
  EncoderParams p;
  DenseLayer l;
  l.weight = {{w}};
  p.branch_a.push_back(l);
  return p;
}

double scalar_value(const EncoderParams& p) {
  return p.branch_a[0].weight[0][0];
}

SyntheticSpec toy_spec(std::uint64_t seed) {
  SyntheticSpec spec;
  spec.n_classes = 2;
  spec.pairs_per_class = 60;
  spec.latent_dim_true = 4;
  spec.dim_a = 6;
  spec.dim_b = 5;
  spec.within_class_noise = 0.0;
  spec.cross_modal_noise = 0.0;
  spec.unlabeled_fraction = 0.0;
  spec.seed = seed;
  return spec;
}

EncoderSpec toy_encoder(const SyntheticSpec& s) {
  EncoderSpec spec;
  spec.input_dim_a = s.dim_a;
  spec.input_dim_b = s.dim_b;
  spec.latent_dim = 4;
  return spec;
}

bool history_equal(const TrainHistory& a, const TrainHistory& b) {
  if (a.epochs.size() != b.epochs.size() || a.best_epoch != b.best_epoch) {
    return false;
  }
  auto eq = [](double x, double y) {
    return (std::isnan(x) && std::isnan(y)) || x == y;
  };
  for (std::size_t i = 0; i < a.epochs.size(); ++i) {
    const auto& x = a.epochs[i];
    const auto& y = b.epochs[i];
    if (x.epoch != y.epoch || !eq(x.mean_loss, y.mean_loss) ||
        !eq(x.mean_beta_r, y.mean_beta_r) ||
        !eq(x.mean_beta_s, y.mean_beta_s) ||
        !eq(x.mean_update_norm, y.mean_update_norm) ||
        !eq(x.val_medr_ab, y.val_medr_ab) ||
        !eq(x.val_medr_ba, y.val_medr_ba)) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("scenario loss table") {
  auto sl = scenario_losses(Scenario::Adamine);
  CHECK(sl.instance);
  CHECK(sl.semantic);
  CHECK(!sl.classification);
  CHECK(!sl.pairwise);
  CHECK(sl.strategy == AggregationStrategy::Adaptive);

  sl = scenario_losses(Scenario::AdamineIns);
  CHECK(sl.instance);
  CHECK(!sl.semantic);

  sl = scenario_losses(Scenario::AdamineSem);
  CHECK(!sl.instance);  // the instance loss is discarded
  CHECK(sl.semantic);

  sl = scenario_losses(Scenario::AdamineInsCls);
  CHECK(sl.instance);
  CHECK(sl.classification);
  CHECK(!sl.semantic);

  sl = scenario_losses(Scenario::AdamineAvg);
  CHECK(sl.instance);
  CHECK(sl.semantic);
  CHECK(sl.strategy == AggregationStrategy::Average);

  sl = scenario_losses(Scenario::Pwpp);
  CHECK(sl.pairwise);
  CHECK(!sl.instance);
  CHECK(sl.strategy == AggregationStrategy::Average);

  CHECK(parse_scenario("adamine_avg") == Scenario::AdamineAvg);
  CHECK_THROWS_WITH_AS(parse_scenario("nope"), doctest::Contains("adamine_ins"),
                       ConfigError);
}

TEST_CASE("adam: zero gradients from a fresh state change nothing") {
  auto p = scalar_params(1.5);
  auto g = scalar_params(0.0);
  auto state = make_adam_state(p);
  adam_step(p, g, state, 0.1);
  CHECK(scalar_value(p) == 1.5);
  CHECK(state.step == 1);
}

TEST_CASE("adam: first step has the closed form") {
  auto p = scalar_params(0.0);
  auto g = scalar_params(1.0);
  auto state = make_adam_state(p);
  adam_step(p, g, state, 1e-4);
  CHECK(std::abs(scalar_value(p) + 1e-4) < 1e-8);
}

TEST_CASE("adam matches a reference implementation on a quadratic") {
  auto p = scalar_params(5.0);
  auto state = make_adam_state(p);
  oracle::ReferenceAdam ref(0.1);
  double ref_w = 5.0;
  for (int step = 0; step < 10; ++step) {
    const double grad = scalar_value(p) - 3.0;  // d/dw (w-3)^2/2
    const double ref_grad = ref_w - 3.0;
    auto g = scalar_params(grad);
    adam_step(p, g, state, 0.1);
    ref_w = ref.step(ref_w, ref_grad);
    CHECK(std::abs(scalar_value(p) - ref_w) < 1e-10);
  }
  CHECK(std::abs(scalar_value(p) - 5.0) > 0.5);  // it actually moved
}

TEST_CASE("adam honors branch freezing") {
  EncoderSpec spec;
  spec.input_dim_a = 3;
  spec.input_dim_b = 3;
  spec.latent_dim = 2;
  auto p = init_params(spec, std::nullopt, 3);
  const auto before = p;
  auto g = zeros_like(p);
  for (auto& row : g.branch_a[0].weight)
    for (auto& w : row) w = 0.5;
  for (auto& row : g.branch_b[0].weight)
    for (auto& w : row) w = 0.5;
  auto state = make_adam_state(p);
  adam_step(p, g, state, 0.01, FreezeBranch::A);
  CHECK(p.branch_a[0].weight == before.branch_a[0].weight);  // bit identical
  CHECK(p.branch_b[0].weight != before.branch_b[0].weight);
}

TEST_CASE("train rejects inconsistent configurations") {
  const auto spec = toy_spec(3);
  auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.batch_size = 20;
  cfg.epochs = 1;

  // Strip all labels: semantic scenarios must fail fast.
  auto unlabeled_train = splits.train;
  for (auto& s : unlabeled_train.samples) s.class_label.reset();
  cfg.scenario = Scenario::Adamine;
  CHECK_THROWS_AS(
      train(cfg, toy_encoder(spec), unlabeled_train, splits.validation),
      ConfigError);

  // Instance-only training runs on unlabeled data.
  cfg.scenario = Scenario::AdamineIns;
  cfg.labeled_fraction = 0.0;
  const auto result =
      train(cfg, toy_encoder(spec), unlabeled_train, splits.validation);
  CHECK(result.history.epochs.size() == 1);
  CHECK(result.history.epochs[0].mean_beta_s == 0.0);

  // Batch larger than the dataset.
  cfg.batch_size = 10000;
  CHECK_THROWS_AS(
      train(cfg, toy_encoder(spec), unlabeled_train, splits.validation),
      ConfigError);
}

TEST_CASE("training is deterministic given config and seed") {
  const auto spec = toy_spec(5);
  const auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.scenario = Scenario::Adamine;
  cfg.epochs = 3;
  cfg.batch_size = 20;
  cfg.seed = 17;
  const auto r1 = train(cfg, toy_encoder(spec), splits.train, splits.validation);
  const auto r2 = train(cfg, toy_encoder(spec), splits.train, splits.validation);
  CHECK(history_equal(r1.history, r2.history));
  CHECK(params_equal(r1.best_params, r2.best_params));

  cfg.seed = 18;
  const auto r3 = train(cfg, toy_encoder(spec), splits.train, splits.validation);
  CHECK(!history_equal(r1.history, r3.history));
}

TEST_CASE("same seed gives the same epoch-1 batches across strategies") {
  const auto spec = toy_spec(6);
  const auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 20;
  cfg.seed = 4;
  cfg.scenario = Scenario::Adamine;
  const auto adaptive =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);
  cfg.scenario = Scenario::AdamineAvg;
  const auto average =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);
  // Identical sampling and triplet selection: identical active counts.
  CHECK(adaptive.history.epochs[0].mean_beta_r ==
        average.history.epochs[0].mean_beta_r);
  CHECK(adaptive.history.epochs[0].mean_beta_s ==
        average.history.epochs[0].mean_beta_s);
}

TEST_CASE("frozen branch stays bit-identical until unfreeze") {
  const auto spec = toy_spec(7);
  const auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.scenario = Scenario::AdamineIns;
  cfg.epochs = 2;
  cfg.batch_size = 20;
  cfg.seed = 9;
  cfg.freeze_branch = FreezeBranch::A;
  cfg.unfreeze_epoch = 100;  // frozen for the whole run
  const auto result =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);

  const auto initial =
      init_params(toy_encoder(spec), std::nullopt, derive_seed(cfg.seed, 0));
  for (std::size_t li = 0; li < initial.branch_a.size(); ++li) {
    CHECK(result.best_params.branch_a[li].weight ==
          initial.branch_a[li].weight);
    CHECK(result.best_params.branch_a[li].bias == initial.branch_a[li].bias);
  }
  // The other branch trained.
  CHECK(result.best_params.branch_b[0].weight != initial.branch_b[0].weight);

  // Unfrozen from epoch 1 when unfreeze_epoch <= 1.
  cfg.unfreeze_epoch = 1;
  const auto unfrozen =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);
  CHECK(unfrozen.best_params.branch_a[0].weight != initial.branch_a[0].weight);
}

TEST_CASE("loss descends on a separable toy problem") {
  const auto spec = toy_spec(11);
  const auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.scenario = Scenario::AdamineIns;
  cfg.epochs = 20;
  cfg.batch_size = 20;
  cfg.learning_rate = 1e-3;
  cfg.seed = 2;
  cfg.labeled_fraction = 0.0;
  const auto result =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);
  CHECK(result.history.epochs.back().mean_loss <
        result.history.epochs.front().mean_loss);
}

TEST_CASE("model selection returns the argmin of recorded validation MedR") {
  const auto spec = toy_spec(13);
  const auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.scenario = Scenario::AdamineIns;
  cfg.epochs = 5;
  cfg.batch_size = 20;
  cfg.learning_rate = 1e-3;
  cfg.labeled_fraction = 0.0;
  cfg.seed = 3;
  const auto result =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  for (const auto& rec : result.history.epochs) {
    if (std::isnan(rec.val_medr_ab)) continue;
    const double mean = 0.5 * (rec.val_medr_ab + rec.val_medr_ba);
    if (mean < best) {
      best = mean;
      best_epoch = rec.epoch;
    }
  }
  CHECK(result.history.best_epoch == best_epoch);
  CHECK(result.history.best_val_medr == best);
}

TEST_CASE("pairwise scenario trains without labels") {
  const auto spec = toy_spec(15);
  auto splits = generate_synthetic(spec);
  for (auto& s : splits.train.samples) s.class_label.reset();
  TrainConfig cfg;
  cfg.scenario = Scenario::Pwpp;
  cfg.epochs = 1;
  cfg.batch_size = 10;
  cfg.labeled_fraction = 0.0;
  cfg.seed = 1;
  const auto result =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);
  CHECK(result.history.epochs.size() == 1);
  CHECK(result.history.epochs[0].mean_beta_s == 0.0);
  CHECK(std::isnan(result.history.epochs[0].min_update_norm_ratio));
}

TEST_CASE("classification-head scenario trains and carries a head") {
  const auto spec = toy_spec(16);
  const auto splits = generate_synthetic(spec);
  TrainConfig cfg;
  cfg.scenario = Scenario::AdamineInsCls;
  cfg.epochs = 1;
  cfg.batch_size = 20;
  cfg.seed = 5;
  const auto result =
      train(cfg, toy_encoder(spec), splits.train, splits.validation);
  CHECK(result.best_params.head.has_value());
  CHECK(result.best_params.head->weight.size() == 2);  // two classes
}
