#include <doctest.h>

#include <cmath>

#include "xmodal/error.hpp"
#include "xmodal/evaluation.hpp"
#include "xmodal/rng.hpp"

using namespace xmodal;

namespace {

// Identity-encoder params over dim-d features for both branches.
EncoderParams identity_params(std::size_t d) {
  EncoderSpec spec;
  spec.input_dim_a = d;
  spec.input_dim_b = d;
  spec.latent_dim = d;
  auto p = init_params(spec, std::nullopt, 0);
  for (auto* branch : {&p.branch_a, &p.branch_b}) {
    for (std::size_t r = 0; r < d; ++r) {
      std::fill((*branch)[0].weight[r].begin(), (*branch)[0].weight[r].end(),
                0.0);
      (*branch)[0].weight[r][r] = 1.0;
    }
    std::fill((*branch)[0].bias.begin(), (*branch)[0].bias.end(), 0.0);
  }
  return p;
}

Dataset aligned_dataset(std::size_t n, std::size_t d, std::uint64_t seed) {
  Dataset ds;
  ds.dim_a = d;
  ds.dim_b = d;
  ds.n_classes = 0;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    PairedSample s;
    s.id = "p" + std::to_string(i);
    Vector v(d);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    s.features_a = v;
    s.features_b = v;  // both modalities identical: a perfect model
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

TEST_CASE("rank_of_match basics") {
  const Vector q = {1, 0};
  // Unique nearest candidate.
  CHECK(rank_of_match(q, {{1, 0.01}, {0, 1}, {-1, 0}}, 0) == 1);
  // Farthest of three.
  CHECK(rank_of_match(q, {{1, 0.01}, {0, 1}, {-1, 0}}, 2) == 3);
  // Equal distances: ties break by candidate index.
  const std::vector<Vector> tied = {{0, 1}, {0, 1}, {0, 1}};
  CHECK(rank_of_match(q, tied, 1) == 2);
  CHECK(rank_of_match(q, tied, 0) == 1);
  CHECK(rank_of_match(q, tied, 2) == 3);
}

TEST_CASE("rank is permutation consistent without ties") {
  Rng rng(17);
  std::vector<Vector> candidates;
  for (int i = 0; i < 12; ++i) {
    Vector v = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    candidates.push_back(l2_normalize(v));
  }
  const Vector q = l2_normalize({0.3, -0.5, 0.8});
  const std::size_t match = 4;
  const std::size_t base_rank = rank_of_match(q, candidates, match);

  std::vector<std::size_t> perm(candidates.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  for (int trial = 0; trial < 10; ++trial) {
    rng.shuffle(perm);
    std::vector<Vector> shuffled(candidates.size());
    std::size_t new_match = 0;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      shuffled[i] = candidates[perm[i]];
      if (perm[i] == match) new_match = i;
    }
    CHECK(rank_of_match(q, shuffled, new_match) == base_rank);
  }
}

TEST_CASE("medr and recall") {
  CHECK(medr({1, 2, 3}) == doctest::Approx(2.0));
  CHECK(medr({1, 1, 1, 1}) == doctest::Approx(1.0));
  CHECK(medr({4, 1}) == doctest::Approx(2.5));  // even count: central mean
  CHECK(recall_at_k({1, 1, 1}, 1) == doctest::Approx(100.0));
  CHECK(recall_at_k({1, 6, 3, 20}, 5) == doctest::Approx(50.0));
  CHECK_THROWS_AS(medr({}), ConfigError);
  CHECK_THROWS_AS(recall_at_k({1}, 0), ConfigError);
}

TEST_CASE("recall is monotone in k") {
  Rng rng(3);
  std::vector<std::size_t> ranks;
  for (int i = 0; i < 100; ++i) ranks.push_back(1 + rng.uniform_index(50));
  double prev = 0.0;
  for (std::size_t k = 1; k <= 50; ++k) {
    const double r = recall_at_k(ranks, k);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(prev == doctest::Approx(100.0));
}

TEST_CASE("perfect model scores MedR 1 and R@1 100") {
  const auto ds = aligned_dataset(40, 6, 11);
  const auto params = identity_params(6);
  const auto report = subset_protocol(params, ds, 40, 1, 5);
  CHECK(report.a_to_b.medr_mean == doctest::Approx(1.0));
  CHECK(report.b_to_a.medr_mean == doctest::Approx(1.0));
  CHECK(report.a_to_b.r1_mean == doctest::Approx(100.0));
  CHECK(report.b_to_a.r1_mean == doctest::Approx(100.0));
  CHECK(report.a_to_b.medr_std == doctest::Approx(0.0));
}

TEST_CASE("subset protocol is deterministic and validates sizes") {
  const auto ds = aligned_dataset(30, 4, 2);
  const auto params = identity_params(4);
  const auto r1 = subset_protocol(params, ds, 20, 3, 9);
  const auto r2 = subset_protocol(params, ds, 20, 3, 9);
  CHECK(r1.a_to_b.medr_mean == r2.a_to_b.medr_mean);
  CHECK(r1.b_to_a.r5_mean == r2.b_to_a.r5_mean);

  CHECK_THROWS_WITH_AS(subset_protocol(params, ds, 31, 1, 9),
                       doctest::Contains("requires at least 31"), ConfigError);
}

TEST_CASE("ranks are invariant under scaling one modality") {
  // Scale-equivariant check done end to end: multiply branch B's weights by
  // a positive constant; cosine distances and hence every rank stay put.
  Rng rng(23);
  Dataset ds;
  ds.dim_a = 5;
  ds.dim_b = 5;
  for (int i = 0; i < 25; ++i) {
    PairedSample s;
    s.id = "p" + std::to_string(i);
    Vector a(5), b(5);
    for (auto& x : a) x = rng.uniform(-1, 1);
    for (auto& x : b) x = rng.uniform(-1, 1);
    s.features_a = a;
    s.features_b = b;
    ds.samples.push_back(std::move(s));
  }
  auto params = identity_params(5);
  const auto base = subset_protocol(params, ds, 25, 2, 3);
  for (auto& row : params.branch_b[0].weight) {
    for (auto& w : row) w *= 7.5;
  }
  const auto scaled = subset_protocol(params, ds, 25, 2, 3);
  CHECK(base.a_to_b.medr_mean == scaled.a_to_b.medr_mean);
  CHECK(base.b_to_a.medr_mean == scaled.b_to_a.medr_mean);
  CHECK(base.a_to_b.r10_mean == scaled.a_to_b.r10_mean);
}

TEST_CASE("random latents score near chance MedR") {
  // Uniform random unit latents, subset 1000: the match lands uniformly, so
  // the median rank concentrates near 500.
  Rng rng(99);
  Dataset ds;
  ds.dim_a = 16;
  ds.dim_b = 16;
  for (int i = 0; i < 1000; ++i) {
    PairedSample s;
    s.id = "p" + std::to_string(i);
    Vector a(16), b(16);
    for (auto& x : a) x = rng.normal();
    for (auto& x : b) x = rng.normal();
    s.features_a = a;
    s.features_b = b;
    ds.samples.push_back(std::move(s));
  }
  const auto params = identity_params(16);
  const auto report = subset_protocol(params, ds, 1000, 3, 7);
  CHECK(report.a_to_b.medr_mean > 400.0);
  CHECK(report.a_to_b.medr_mean < 600.0);
  CHECK(report.b_to_a.medr_mean > 400.0);
  CHECK(report.b_to_a.medr_mean < 600.0);
  // Expected R@10 is about 1%.
  CHECK(report.a_to_b.r10_mean < 5.0);
}

TEST_CASE("validation medr helper") {
  const auto ds = aligned_dataset(50, 4, 8);
  const auto params = identity_params(4);
  const auto v = validation_medr(params, ds, 30, 21);
  CHECK(v.a_to_b == doctest::Approx(1.0));
  CHECK(v.b_to_a == doctest::Approx(1.0));
  CHECK(v.mean() == doctest::Approx(1.0));
}
