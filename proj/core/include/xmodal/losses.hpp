#pragma once

#include "xmodal/math.hpp"

namespace xmodal {

// Margins and loss weights. alpha is the triplet hinge margin, lambda the
// weight of the semantic term, alpha_pos/alpha_neg the pairwise margins.
struct LossConfig {
  double alpha = 0.3;
  double lambda = 0.3;
  double alpha_pos = 0.3;
  double alpha_neg = 0.9;

  void validate() const;
};

struct TripletLossResult {
  double loss = 0.0;
  Vector grad_query;
  Vector grad_positive;
  Vector grad_negative;
};

// Hinge triplet loss max(0, d(q,p) + alpha - d(q,n)) on cosine distance,
// with exact subgradients (zero whenever the hinge is inactive). The same
// functional form serves both the instance and the semantic triplets; which
// triples it is applied to is decided by the mining layer.
TripletLossResult triplet_loss(const Vector& query, const Vector& positive,
                               const Vector& negative, double alpha);

struct PairwiseLossResult {
  double loss = 0.0;
  Vector grad_query;
  Vector grad_candidate;
};

// Double-margin pairwise loss:
//   y=1: max(0, d(q,x) - alpha_pos)
//   y=0: max(0, alpha_neg - d(q,x))
// Throws ConfigError for labels outside {0, 1}.
PairwiseLossResult pairwise_loss(const Vector& query, const Vector& candidate,
                                 int label, double alpha_pos,
                                 double alpha_neg);

struct CrossEntropyResult {
  double loss = 0.0;
  Vector grad_scores;  // softmax(scores) - one_hot(label)
};

// Softmax cross-entropy over raw class scores.
CrossEntropyResult softmax_cross_entropy(const Vector& scores,
                                         std::size_t label);

// Joint objective: instance part plus lambda times the semantic part. Each
// part is expected to be already normalized by the active aggregation
// strategy.
double total_loss(double instance_part, double semantic_part, double lambda);

}  // namespace xmodal
