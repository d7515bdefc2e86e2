#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xmodal/encoder.hpp"
#include "xmodal/losses.hpp"
#include "xmodal/math.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

enum class TripletKind { Instance, Semantic };
enum class Direction { AtoB, BtoA };

// Batch-local triplet. The query lives in the direction's source modality,
// positive and negative in the target modality.
struct Triplet {
  std::size_t query = 0;
  std::size_t positive = 0;
  std::size_t negative = 0;
  TripletKind kind = TripletKind::Instance;
  Direction direction = Direction::AtoB;
};

// Materialized mini-batch as seen by the mining layer: raw features of both
// modalities plus the per-pair class labels (nullopt for unlabeled pairs).
struct BatchData {
  std::vector<Vector> features_a;
  std::vector<Vector> features_b;
  std::vector<std::optional<std::uint32_t>> labels;

  std::size_t size() const { return labels.size(); }
};

struct BatchEmbeddings {
  std::vector<Vector> latent_a;
  std::vector<Vector> latent_b;
};

BatchEmbeddings encode_batch(const EncoderParams& params,
                             const BatchData& batch);

// Instance triplets for one query: the matching counterpart is the single
// positive, every other item of the target modality a negative. B-1 triplets
// for a batch of B pairs; empty for B = 1.
std::vector<Triplet> enumerate_instance_triplets(std::size_t batch_size,
                                                 std::size_t query_index,
                                                 Direction direction);

// Smallest different-class negative-set size over the labeled queries that
// have a valid semantic positive. Every semantic negative set is truncated
// to this size so queries compete on equal footing. nullopt when the batch
// admits no semantic triplet at all (no valid query, or zero minimum).
std::optional<std::size_t> compute_negative_cap(
    const std::vector<std::optional<std::uint32_t>>& labels);

// Semantic triplets for one query: one randomly chosen same-class
// non-matching positive, negatives drawn from the different-class items and
// subsampled down to negative_cap. Unlabeled queries and queries without a
// same-class candidate yield an empty list.
std::vector<Triplet> enumerate_semantic_triplets(
    const std::vector<std::optional<std::uint32_t>>& labels,
    std::size_t query_index, Direction direction, std::size_t negative_cap,
    Rng& rng);

struct TripletSet {
  std::vector<Triplet> instance;
  std::vector<Triplet> semantic;
};

// All triplets of a batch in fixed enumeration order (direction AtoB then
// BtoA, queries ascending). Only the semantic selection consumes rng.
TripletSet enumerate_batch_triplets(
    const std::vector<std::optional<std::uint32_t>>& labels,
    bool want_instance, bool want_semantic, Rng& rng);

// Per-kind parameter-gradient sums over all active triplets, before any
// strategy normalization.
struct RawBatchGradients {
  EncoderParams instance_sum;
  EncoderParams semantic_sum;
  std::size_t active_instance = 0;   // triplets with strictly positive loss
  std::size_t active_semantic = 0;
  std::size_t total_instance = 0;
  std::size_t total_semantic = 0;
  double instance_loss_sum = 0.0;
  double semantic_loss_sum = 0.0;
};

RawBatchGradients accumulate_triplet_gradients(const EncoderParams& params,
                                               const BatchData& batch,
                                               const BatchEmbeddings& emb,
                                               const TripletSet& triplets,
                                               const LossConfig& config);

enum class AggregationStrategy { Adaptive, Average };

// The normalized update direction fed to the optimizer, together with the
// active-triplet counts beta_r / beta_s it was normalized by.
struct GradientAccumulator {
  EncoderParams update;
  std::size_t beta_r = 0;
  std::size_t beta_s = 0;
  std::size_t total_r = 0;
  std::size_t total_s = 0;
  double instance_loss = 0.0;  // normalized, without the lambda weight
  double semantic_loss = 0.0;
};

// Adaptive: each kind's gradient sum is divided by its count of active
// triplets, so late-phase updates do not vanish as constraints stop being
// violated. A kind with no active triplet contributes nothing.
GradientAccumulator finalize_gradients(const RawBatchGradients& raw,
                                       AggregationStrategy strategy,
                                       double lambda);

GradientAccumulator aggregate_adaptive(const EncoderParams& params,
                                       const BatchData& batch,
                                       const BatchEmbeddings& emb,
                                       const TripletSet& triplets,
                                       const LossConfig& config);

// Average baseline: divides by the total enumerated triplet count per kind.
GradientAccumulator aggregate_average(const EncoderParams& params,
                                      const BatchData& batch,
                                      const BatchEmbeddings& emb,
                                      const TripletSet& triplets,
                                      const LossConfig& config);

}  // namespace xmodal
