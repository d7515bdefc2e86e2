#include "xmodal/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "xmodal/error.hpp"

namespace xmodal {

std::vector<std::size_t> class_proportional_draw(
    const std::vector<std::pair<std::size_t, std::uint32_t>>& pool,
    std::size_t k, Rng& rng) {
  if (pool.empty()) {
    throw ConfigError("class_proportional_draw: empty pool");
  }
  if (k > pool.size()) {
    throw ConfigError("class_proportional_draw: k exceeds pool size");
  }

  // Group members per class; map keeps class order deterministic.
  std::map<std::uint32_t, std::vector<std::size_t>> by_class;
  for (const auto& [index, cls] : pool) {
    by_class[cls].push_back(index);
  }

  const double n = static_cast<double>(pool.size());
  std::vector<std::uint32_t> classes;
  std::vector<std::size_t> quota;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (const auto& [cls, members] : by_class) {
    const double exact = k * (members.size() / n);
    const auto base = static_cast<std::size_t>(exact);
    classes.push_back(cls);
    quota.push_back(base);
    remainders.push_back({exact - base, quota.size() - 1});
    assigned += base;
  }
  std::stable_sort(
      remainders.begin(), remainders.end(),
      [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; r < k - assigned; ++r) {
    quota[remainders[r % remainders.size()].second]++;
  }

  std::vector<std::size_t> result;
  result.reserve(k);
  std::vector<std::size_t> overflow;  // quota beyond a class's size
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    auto& members = by_class[classes[ci]];
    rng.shuffle(members);
    const std::size_t take = std::min(quota[ci], members.size());
    result.insert(result.end(), members.begin(), members.begin() + take);
    members.erase(members.begin(), members.begin() + take);
    if (quota[ci] > take) overflow.push_back(quota[ci] - take);
  }
  // Redistribute any unmet quota over the remaining members.
  if (result.size() < k) {
    std::vector<std::size_t> rest;
    for (const auto& cls : classes) {
      const auto& members = by_class[cls];
      rest.insert(rest.end(), members.begin(), members.end());
    }
    rng.shuffle(rest);
    const std::size_t need = k - result.size();
    result.insert(result.end(), rest.begin(), rest.begin() + need);
  }
  return result;
}

std::vector<MiniBatch> build_epoch_batches(const Dataset& dataset,
                                           std::size_t batch_size,
                                           double labeled_fraction, Rng& rng) {
  if (batch_size < 2) {
    throw ConfigError("build_epoch_batches: batch_size must be >= 2");
  }
  if (labeled_fraction < 0.0 || labeled_fraction > 1.0) {
    throw ConfigError("build_epoch_batches: labeled_fraction must be in [0,1]");
  }

  const std::size_t n_batches = dataset.size() / batch_size;
  std::vector<MiniBatch> batches;
  if (n_batches == 0) return batches;

  // Both pools reshuffled each epoch.
  std::vector<std::pair<std::size_t, std::uint32_t>> labeled;
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset.samples[i].class_label) {
      labeled.push_back({i, *dataset.samples[i].class_label});
    } else {
      unlabeled.push_back(i);
    }
  }
  rng.shuffle(labeled);
  rng.shuffle(unlabeled);

  const auto quota =
      static_cast<std::size_t>(std::llround(batch_size * labeled_fraction));

  std::size_t unlabeled_cursor = 0;
  for (std::size_t b = 0; b < n_batches; ++b) {
    MiniBatch batch;
    const std::size_t labeled_take = std::min(quota, labeled.size());
    if (labeled_take > 0) {
      auto drawn = class_proportional_draw(labeled, labeled_take, rng);
      for (std::size_t idx : drawn) batch.pair_indices.push_back(idx);
      // Remove drawn indices from the labeled pool.
      std::vector<bool> taken(dataset.size(), false);
      for (std::size_t idx : drawn) taken[idx] = true;
      std::erase_if(labeled,
                    [&taken](const auto& e) { return taken[e.first]; });
      batch.labeled_count = labeled_take;
    }

    std::size_t unlabeled_take =
        std::min(batch_size - batch.pair_indices.size(),
                 unlabeled.size() - unlabeled_cursor);
    for (std::size_t k = 0; k < unlabeled_take; ++k) {
      batch.pair_indices.push_back(unlabeled[unlabeled_cursor++]);
    }
    batch.unlabeled_count = unlabeled_take;

    // Fallback fills: labeled quota unmet -> more unlabeled; unlabeled pool
    // dry -> more labeled.
    while (batch.pair_indices.size() < batch_size &&
           unlabeled_cursor < unlabeled.size()) {
      batch.pair_indices.push_back(unlabeled[unlabeled_cursor++]);
      ++batch.unlabeled_count;
    }
    while (batch.pair_indices.size() < batch_size && !labeled.empty()) {
      const std::size_t pick = rng.uniform_index(labeled.size());
      batch.pair_indices.push_back(labeled[pick].first);
      labeled.erase(labeled.begin() + pick);
      ++batch.labeled_count;
    }
    batches.push_back(std::move(batch));
  }
  return batches;
}

}  // namespace xmodal
