#pragma once

#include <cstdint>
#include <vector>

#include "xmodal/dataset.hpp"
#include "xmodal/encoder.hpp"
#include "xmodal/math.hpp"

namespace xmodal {

struct DirectionMetrics {
  double medr_mean = 0.0;
  double medr_std = 0.0;
  double r1_mean = 0.0;
  double r1_std = 0.0;
  double r5_mean = 0.0;
  double r5_std = 0.0;
  double r10_mean = 0.0;
  double r10_std = 0.0;
};

// Cross-modal retrieval metrics over repeated subsets, per direction.
// All recall values are percentages in [0, 100].
struct RetrievalReport {
  DirectionMetrics a_to_b;
  DirectionMetrics b_to_a;
  std::size_t subset_size = 0;
  std::size_t n_subsets = 0;
  std::uint64_t seed = 0;
};

// 1-based rank of the matching candidate by cosine distance, ties broken by
// candidate index.
std::size_t rank_of_match(const Vector& query,
                          const std::vector<Vector>& candidates,
                          std::size_t match_index);

// Median; even counts average the two central order statistics.
double medr(const std::vector<std::size_t>& ranks);

// Percentage of ranks <= k.
double recall_at_k(const std::vector<std::size_t>& ranks, std::size_t k);

// Repeated-subset protocol: draws n_subsets subsets of matching pairs
// (without replacement within a subset), ranks every item of each modality
// against the other modality's subset, and reports mean and standard
// deviation of MedR and R@{1,5,10} per direction. Throws ConfigError naming
// the required size when the dataset is smaller than subset_size.
RetrievalReport subset_protocol(const EncoderParams& params,
                                const Dataset& dataset,
                                std::size_t subset_size, std::size_t n_subsets,
                                std::uint64_t seed);

// Single-direction MedR on one seeded subset, used for validation-based
// model selection during training.
struct ValidationMedR {
  double a_to_b = 0.0;
  double b_to_a = 0.0;

  double mean() const { return 0.5 * (a_to_b + b_to_a); }
};

ValidationMedR validation_medr(const EncoderParams& params,
                               const Dataset& dataset,
                               std::size_t subset_size, std::uint64_t seed);

}  // namespace xmodal
