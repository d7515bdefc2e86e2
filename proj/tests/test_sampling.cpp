#include <doctest.h>

#include <algorithm>
#include <set>

#include "xmodal/error.hpp"
#include "xmodal/sampling.hpp"

using namespace xmodal;

namespace {

Dataset make_dataset(std::size_t n, double labeled_fraction,
                     std::uint32_t n_classes, std::uint64_t seed) {
  Dataset ds;
  ds.dim_a = 2;
  ds.dim_b = 2;
  ds.n_classes = n_classes;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    PairedSample s;
    s.id = "p" + std::to_string(i);
    s.features_a = {rng.uniform(), rng.uniform()};
    s.features_b = {rng.uniform(), rng.uniform()};
    if (rng.uniform() < labeled_fraction) {
      s.class_label = static_cast<std::uint32_t>(rng.uniform_index(n_classes));
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace

TEST_CASE("epoch batches honor the labeled quota") {
  const auto ds = make_dataset(400, 0.5, 4, 1);
  Rng rng(7);
  const auto batches = build_epoch_batches(ds, 100, 0.5, rng);
  CHECK(batches.size() == 4);
  for (const auto& b : batches) {
    CHECK(b.pair_indices.size() == 100);
    std::size_t labeled = 0;
    for (std::size_t idx : b.pair_indices) {
      if (ds.samples[idx].class_label) ++labeled;
    }
    CHECK(labeled == b.labeled_count);
    CHECK(b.labeled_count + b.unlabeled_count == 100);
  }
}

TEST_CASE("labeled_fraction zero means unlabeled-only batches") {
  const auto ds = make_dataset(200, 0.3, 4, 2);
  Rng rng(7);
  const auto batches = build_epoch_batches(ds, 50, 0.0, rng);
  REQUIRE(!batches.empty());
  // Unlabeled pool has ~140 pairs; the first two batches need no fallback.
  CHECK(batches[0].labeled_count == 0);
  CHECK(batches[1].labeled_count == 0);
}

TEST_CASE("trailing partial batch is dropped and pairs are used once") {
  const auto ds = make_dataset(230, 0.5, 3, 3);
  Rng rng(11);
  const auto batches = build_epoch_batches(ds, 100, 0.5, rng);
  CHECK(batches.size() == 2);
  std::set<std::size_t> used;
  for (const auto& b : batches) {
    for (std::size_t idx : b.pair_indices) {
      CHECK(used.insert(idx).second);  // no pair twice per epoch
    }
  }
  CHECK(used.size() == 200);
}

TEST_CASE("batch construction is reproducible per seed") {
  const auto ds = make_dataset(150, 0.6, 3, 4);
  Rng r1(99), r2(99);
  const auto b1 = build_epoch_batches(ds, 30, 0.5, r1);
  const auto b2 = build_epoch_batches(ds, 30, 0.5, r2);
  REQUIRE(b1.size() == b2.size());
  for (std::size_t i = 0; i < b1.size(); ++i) {
    CHECK(b1[i].pair_indices == b2[i].pair_indices);
  }
  Rng r3(100);
  const auto b3 = build_epoch_batches(ds, 30, 0.5, r3);
  CHECK(b1[0].pair_indices != b3[0].pair_indices);
}

TEST_CASE("quota falls back to unlabeled fill when labeled runs dry") {
  // 20 labeled, 180 unlabeled; quota 25 per batch of 50.
  Dataset ds = make_dataset(200, 0.0, 2, 5);
  for (std::size_t i = 0; i < 20; ++i) {
    ds.samples[i].class_label = static_cast<std::uint32_t>(i % 2);
  }
  Rng rng(6);
  const auto batches = build_epoch_batches(ds, 50, 0.5, rng);
  CHECK(batches.size() == 4);
  // First batch can at most take the 20 available labeled pairs.
  CHECK(batches[0].labeled_count == 20);
  CHECK(batches[0].unlabeled_count == 30);
  for (const auto& b : batches) {
    CHECK(b.pair_indices.size() == 50);
  }
}

TEST_CASE("class proportional draws follow frequencies") {
  // 90/10 split: largest-remainder quotas are deterministic 9 and 1.
  std::vector<std::pair<std::size_t, std::uint32_t>> pool;
  for (std::size_t i = 0; i < 90; ++i) pool.push_back({i, 0});
  for (std::size_t i = 90; i < 100; ++i) pool.push_back({i, 1});

  double mean_major = 0.0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    Rng rng(1000 + t);
    const auto drawn = class_proportional_draw(pool, 10, rng);
    CHECK(drawn.size() == 10);
    std::size_t major = 0;
    std::set<std::size_t> unique(drawn.begin(), drawn.end());
    CHECK(unique.size() == 10);  // without replacement
    for (std::size_t idx : drawn) {
      if (idx < 90) ++major;
    }
    mean_major += static_cast<double>(major);
  }
  mean_major /= trials;
  CHECK(mean_major > 8.5);
  CHECK(mean_major < 9.5);
}

TEST_CASE("class proportional draw edge cases") {
  std::vector<std::pair<std::size_t, std::uint32_t>> single;
  for (std::size_t i = 0; i < 10; ++i) single.push_back({i, 3});
  Rng rng(8);
  const auto all_single = class_proportional_draw(single, 4, rng);
  CHECK(all_single.size() == 4);
  for (std::size_t idx : all_single) CHECK(idx < 10);

  // k equal to the pool size exhausts it: an exact permutation.
  const auto permutation = class_proportional_draw(single, 10, rng);
  std::set<std::size_t> unique(permutation.begin(), permutation.end());
  CHECK(unique.size() == 10);

  CHECK_THROWS_AS(class_proportional_draw({}, 1, rng), ConfigError);
  CHECK_THROWS_AS(class_proportional_draw(single, 11, rng), ConfigError);
}
