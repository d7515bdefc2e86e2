#pragma once

#include <cstdint>
#include <vector>

#include "xmodal/dataset.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

// One mini-batch of dataset pair indices. labeled_count counts how many of
// them carry a class label; when it falls short of the configured quota the
// builder has fallen back to unlabeled fill (and vice versa).
struct MiniBatch {
  std::vector<std::size_t> pair_indices;
  std::size_t labeled_count = 0;
  std::size_t unlabeled_count = 0;
};

// Stratified without-replacement draw of k pairs from a labeled pool,
// with per-class quotas proportional to class frequencies (largest-remainder
// rounding). pool entries are (dataset index, class) pairs.
std::vector<std::size_t> class_proportional_draw(
    const std::vector<std::pair<std::size_t, std::uint32_t>>& pool,
    std::size_t k, Rng& rng);

// Epoch batch plan: floor(N / batch_size) batches, each pair used at most
// once, labeled quota round(batch_size * labeled_fraction) drawn
// class-proportionally and the rest uniformly from the unlabeled pool. When
// one pool runs dry the other fills the gap; trailing partial batches are
// dropped. Both pools are reshuffled per call.
std::vector<MiniBatch> build_epoch_batches(const Dataset& dataset,
                                           std::size_t batch_size,
                                           double labeled_fraction, Rng& rng);

}  // namespace xmodal
