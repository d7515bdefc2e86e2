#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "xmodal/encoder.hpp"
#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"

using namespace xmodal;

namespace {

EncoderSpec small_spec(std::vector<std::size_t> hidden = {},
                       Activation act = Activation::Relu) {
  EncoderSpec spec;
  spec.input_dim_a = 5;
  spec.input_dim_b = 3;
  spec.hidden_dims = std::move(hidden);
  spec.latent_dim = 4;
  spec.activation = act;
  return spec;
}

Vector random_vector(std::size_t dim, Rng& rng) {
  Vector v(dim);
  for (auto& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

}  // namespace

TEST_CASE("init_params structure and determinism") {
  const auto spec = small_spec();
  const auto p = init_params(spec, std::nullopt, 11);
  CHECK(p.branch_a.size() == 1);  // no hidden layers: single affine layer
  CHECK(p.branch_b.size() == 1);
  CHECK(!p.head.has_value());
  CHECK(p.branch_a[0].weight.size() == 4);
  CHECK(p.branch_a[0].weight[0].size() == 5);

  const auto q = init_params(spec, std::nullopt, 11);
  CHECK(params_equal(p, q));
  const auto r = init_params(spec, std::nullopt, 12);
  CHECK(!params_equal(p, r));

  const auto with_head = init_params(spec, 6, 11);
  CHECK(with_head.head.has_value());
  CHECK(with_head.head->weight.size() == 6);
  // Head drawn last: branch parameters are unchanged by its presence.
  CHECK(with_head.branch_a[0].weight == p.branch_a[0].weight);
}

TEST_CASE("init_params respects the uniform bound") {
  EncoderSpec spec;
  spec.input_dim_a = 16;
  spec.input_dim_b = 16;
  spec.latent_dim = 8;
  const auto p = init_params(spec, std::nullopt, 1);
  const double bound = std::sqrt(6.0 / 24.0);
  for (const auto& row : p.branch_a[0].weight) {
    for (double w : row) {
      CHECK(w >= -bound);
      CHECK(w <= bound);
    }
  }
  for (double b : p.branch_a[0].bias) CHECK(b == 0.0);
}

TEST_CASE("encode applies affine then normalization") {
  EncoderSpec spec;
  spec.input_dim_a = 2;
  spec.input_dim_b = 2;
  spec.latent_dim = 2;
  auto p = init_params(spec, std::nullopt, 0);
  p.branch_a[0].weight = {{1, 0}, {0, 1}};
  p.branch_a[0].bias = {0, 0};
  const Vector out = encode(p, Branch::A, {3, 4});
  CHECK(out[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(out[1] == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("encode output is unit norm and deterministic") {
  Rng rng(7);
  const auto spec = small_spec({6}, Activation::Tanh);
  const auto p = init_params(spec, std::nullopt, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector x = random_vector(5, rng);
    const Vector a = encode(p, Branch::A, x);
    const Vector b = encode(p, Branch::A, x);
    CHECK(a == b);  // bitwise
    CHECK(norm(a) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("encode errors") {
  const auto p = init_params(small_spec(), std::nullopt, 3);
  CHECK_THROWS_AS(encode(p, Branch::A, {1, 2}), DimensionError);
  // Zero weights and biases make the pre-normalization vector zero.
  auto degenerate = p;
  for (auto& row : degenerate.branch_a[0].weight) {
    std::fill(row.begin(), row.end(), 0.0);
  }
  CHECK_THROWS_AS(encode(degenerate, Branch::A, {1, 2, 3, 4, 5}),
                  DegenerateInputError);
}

TEST_CASE("encode matches the naive forward oracle") {
  Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::size_t> hidden;
    const std::size_t n_hidden = rng.uniform_index(3);
    for (std::size_t i = 0; i < n_hidden; ++i) {
      hidden.push_back(2 + rng.uniform_index(6));
    }
    const auto spec = small_spec(
        hidden, rng.uniform() < 0.5 ? Activation::Relu : Activation::Tanh);
    const auto p = init_params(spec, std::nullopt, rng.next_u64());
    const Vector x = random_vector(5, rng);
    const Vector ours = encode(p, Branch::A, x);
    const Vector ref = oracle::naive_encode(p, Branch::A, x);
    for (std::size_t i = 0; i < ours.size(); ++i) {
      CHECK(std::abs(ours[i] - ref[i]) < 1e-12);
    }
  }
}

TEST_CASE("encode_backward: zero upstream gives zero gradients") {
  const auto p = init_params(small_spec({4}), std::nullopt, 5);
  const auto g =
      encode_backward(p, Branch::A, {1, 2, 3, 4, 5}, Vector(4, 0.0));
  CHECK(params_l2_norm(g) == 0.0);
}

TEST_CASE("encode_backward matches finite differences") {
  Rng rng(21);
  auto check_spec = [&](const EncoderSpec& spec) {
    const auto p = init_params(spec, std::nullopt, rng.next_u64());
    const Vector x = random_vector(spec.input_dim_a, rng);
    Vector upstream(spec.latent_dim);
    for (auto& u : upstream) u = rng.uniform(-1.0, 1.0);

    const auto analytic = encode_backward(p, Branch::A, x, upstream);
    const auto fd = oracle::fd_gradient(
        p,
        [&](const EncoderParams& pp) {
          return dot(encode(pp, Branch::A, x), upstream);
        },
        1e-6);
    CHECK(oracle::max_rel_error(oracle::flatten(analytic), fd) < 1e-5);
  };

  check_spec(small_spec());  // single affine layer
  // Two hidden layers, relu, dims 8 -> 16 -> 8 -> 4.
  EncoderSpec deep;
  deep.input_dim_a = 8;
  deep.input_dim_b = 8;
  deep.hidden_dims = {16, 8};
  deep.latent_dim = 4;
  deep.activation = Activation::Relu;
  check_spec(deep);
  deep.activation = Activation::Tanh;
  check_spec(deep);
}

TEST_CASE("relu dead units zero out earlier layers exactly") {
  EncoderSpec spec;
  spec.input_dim_a = 3;
  spec.input_dim_b = 3;
  spec.hidden_dims = {4};
  spec.latent_dim = 2;
  spec.activation = Activation::Relu;
  auto p = init_params(spec, std::nullopt, 2);
  // Push every hidden pre-activation below zero for a positive input.
  for (auto& row : p.branch_a[0].weight) {
    for (auto& w : row) w = -std::abs(w) - 0.1;
  }
  std::fill(p.branch_a[0].bias.begin(), p.branch_a[0].bias.end(), -1.0);
  // Output layer bias keeps the pre-normalization vector nonzero.
  p.branch_a[1].bias = {0.3, 0.7};

  const Vector x = {1.0, 2.0, 0.5};
  const auto g = encode_backward(p, Branch::A, x, {0.4, -0.2});
  for (const auto& row : g.branch_a[0].weight) {
    for (double w : row) CHECK(w == 0.0);
  }
  for (double b : g.branch_a[0].bias) CHECK(b == 0.0);
  // The output layer bias still receives gradient.
  CHECK(params_l2_norm(g) > 0.0);
}

TEST_CASE("classification head forward") {
  const auto spec = small_spec();
  auto p = init_params(spec, 3, 5);

  auto zeroed = p;
  for (auto& row : zeroed.head->weight) std::fill(row.begin(), row.end(), 0.0);
  std::fill(zeroed.head->bias.begin(), zeroed.head->bias.end(), 0.0);
  const Vector latent = l2_normalize({1, 2, 3, 4});
  const Vector zero_scores = classification_head_forward(zeroed, latent);
  for (double s : zero_scores) CHECK(s == 0.0);

  // Basis-selecting head rows pick out single latent coordinates.
  auto basis = p;
  basis.head->weight = {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}};
  std::fill(basis.head->bias.begin(), basis.head->bias.end(), 0.0);
  const Vector u = l2_normalize({0, 0, 5, 0});
  const Vector scores = classification_head_forward(basis, u);
  CHECK(scores[0] == doctest::Approx(0.0));
  CHECK(scores[1] == doctest::Approx(0.0));
  CHECK(scores[2] == doctest::Approx(1.0));

  // Random case against a naive matrix multiply.
  Rng rng(17);
  const Vector v = l2_normalize(random_vector(4, rng));
  const Vector got = classification_head_forward(p, v);
  for (std::size_t o = 0; o < 3; ++o) {
    double want = p.head->bias[o];
    for (std::size_t i = 0; i < 4; ++i) want += p.head->weight[o][i] * v[i];
    CHECK(std::abs(got[o] - want) < 1e-12);
  }

  const auto headless = init_params(spec, std::nullopt, 5);
  CHECK_THROWS_AS(classification_head_forward(headless, latent), ConfigError);
}
