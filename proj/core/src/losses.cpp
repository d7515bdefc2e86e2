#include "xmodal/losses.hpp"

#include <cmath>
#include <string>

#include "xmodal/error.hpp"

namespace xmodal {

void LossConfig::validate() const {
  if (alpha <= 0.0) throw ConfigError("loss config: alpha must be positive");
  if (lambda < 0.0) throw ConfigError("loss config: lambda must be >= 0");
  if (alpha_pos < 0.0 || alpha_pos >= alpha_neg || alpha_neg > 2.0) {
    throw ConfigError(
        "loss config: require 0 <= alpha_pos < alpha_neg <= 2");
  }
}

TripletLossResult triplet_loss(const Vector& query, const Vector& positive,
                               const Vector& negative, double alpha) {
  TripletLossResult r;
  const double d_pos = cosine_distance(query, positive);
  const double d_neg = cosine_distance(query, negative);
  const double margin = d_pos + alpha - d_neg;
  r.grad_query.assign(query.size(), 0.0);
  r.grad_positive.assign(positive.size(), 0.0);
  r.grad_negative.assign(negative.size(), 0.0);
  if (margin <= 0.0) {
    return r;  // inactive constraint: zero loss, zero subgradient
  }
  r.loss = margin;
  auto gp = cosine_distance_grad(query, positive);
  auto gn = cosine_distance_grad(query, negative);
  for (std::size_t i = 0; i < query.size(); ++i) {
    r.grad_query[i] = gp.grad_x[i] - gn.grad_x[i];
  }
  r.grad_positive = std::move(gp.grad_y);
  for (std::size_t i = 0; i < negative.size(); ++i) {
    r.grad_negative[i] = -gn.grad_y[i];
  }
  return r;
}

PairwiseLossResult pairwise_loss(const Vector& query, const Vector& candidate,
                                 int label, double alpha_pos,
                                 double alpha_neg) {
  if (label != 0 && label != 1) {
    throw ConfigError("pairwise_loss: label must be 0 or 1, got " +
                      std::to_string(label));
  }
  PairwiseLossResult r;
  r.grad_query.assign(query.size(), 0.0);
  r.grad_candidate.assign(candidate.size(), 0.0);
  const double d = cosine_distance(query, candidate);
  const double margin = label == 1 ? d - alpha_pos : alpha_neg - d;
  if (margin <= 0.0) return r;
  r.loss = margin;
  auto g = cosine_distance_grad(query, candidate);
  const double sign = label == 1 ? 1.0 : -1.0;
  for (std::size_t i = 0; i < query.size(); ++i) {
    r.grad_query[i] = sign * g.grad_x[i];
    r.grad_candidate[i] = sign * g.grad_y[i];
  }
  return r;
}

CrossEntropyResult softmax_cross_entropy(const Vector& scores,
                                         std::size_t label) {
  if (label >= scores.size()) {
    throw ConfigError("softmax_cross_entropy: label " + std::to_string(label) +
                      " out of range for " + std::to_string(scores.size()) +
                      " classes");
  }
  double max_score = scores[0];
  for (double s : scores) max_score = std::max(max_score, s);
  double sum = 0.0;
  for (double s : scores) sum += std::exp(s - max_score);
  const double log_sum = std::log(sum) + max_score;

  CrossEntropyResult r;
  r.loss = log_sum - scores[label];
  r.grad_scores.resize(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    r.grad_scores[i] = std::exp(scores[i] - log_sum);
  }
  r.grad_scores[label] -= 1.0;
  return r;
}

double total_loss(double instance_part, double semantic_part, double lambda) {
  return instance_part + lambda * semantic_part;
}

}  // namespace xmodal
