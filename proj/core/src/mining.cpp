#include "xmodal/mining.hpp"

#include <algorithm>

#include "xmodal/error.hpp"

namespace xmodal {

BatchEmbeddings encode_batch(const EncoderParams& params,
                             const BatchData& batch) {
  BatchEmbeddings emb;
  emb.latent_a.reserve(batch.size());
  emb.latent_b.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    emb.latent_a.push_back(encode(params, Branch::A, batch.features_a[i]));
    emb.latent_b.push_back(encode(params, Branch::B, batch.features_b[i]));
  }
  return emb;
}

std::vector<Triplet> enumerate_instance_triplets(std::size_t batch_size,
                                                 std::size_t query_index,
                                                 Direction direction) {
  std::vector<Triplet> out;
  if (batch_size < 2) return out;
  out.reserve(batch_size - 1);
  for (std::size_t j = 0; j < batch_size; ++j) {
    if (j == query_index) continue;
    out.push_back({query_index, query_index, j, TripletKind::Instance,
                   direction});
  }
  return out;
}

namespace {

// Different-class negative count for a labeled query; the matching
// counterpart shares the pair's class and is therefore never a negative.
std::size_t negative_count(
    const std::vector<std::optional<std::uint32_t>>& labels,
    std::uint32_t query_class) {
  std::size_t n = 0;
  for (const auto& l : labels) {
    if (l && *l != query_class) ++n;
  }
  return n;
}

bool has_same_class_candidate(
    const std::vector<std::optional<std::uint32_t>>& labels,
    std::size_t query_index, std::uint32_t query_class) {
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (j != query_index && labels[j] && *labels[j] == query_class) {
      return true;
    }
  }
  return false;
}

}  // namespace

std::optional<std::size_t> compute_negative_cap(
    const std::vector<std::optional<std::uint32_t>>& labels) {
  std::optional<std::size_t> cap;
  for (std::size_t q = 0; q < labels.size(); ++q) {
    if (!labels[q]) continue;
    if (!has_same_class_candidate(labels, q, *labels[q])) continue;
    const std::size_t negs = negative_count(labels, *labels[q]);
    if (!cap || negs < *cap) cap = negs;
  }
  if (cap && *cap == 0) return std::nullopt;
  return cap;
}

std::vector<Triplet> enumerate_semantic_triplets(
    const std::vector<std::optional<std::uint32_t>>& labels,
    std::size_t query_index, Direction direction, std::size_t negative_cap,
    Rng& rng) {
  std::vector<Triplet> out;
  if (!labels[query_index]) return out;
  const std::uint32_t cls = *labels[query_index];

  std::vector<std::size_t> positives;
  std::vector<std::size_t> negatives;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (!labels[j]) continue;
    if (j == query_index) continue;
    if (*labels[j] == cls) {
      positives.push_back(j);
    } else {
      negatives.push_back(j);
    }
  }
  if (positives.empty() || negatives.empty() || negative_cap == 0) return out;

  const std::size_t pos = positives[rng.uniform_index(positives.size())];
  if (negatives.size() > negative_cap) {
    rng.shuffle(negatives);
    negatives.resize(negative_cap);
  }
  out.reserve(negatives.size());
  for (std::size_t n : negatives) {
    out.push_back({query_index, pos, n, TripletKind::Semantic, direction});
  }
  return out;
}

TripletSet enumerate_batch_triplets(
    const std::vector<std::optional<std::uint32_t>>& labels,
    bool want_instance, bool want_semantic, Rng& rng) {
  TripletSet set;
  const std::size_t batch_size = labels.size();
  if (want_instance) {
    for (Direction dir : {Direction::AtoB, Direction::BtoA}) {
      for (std::size_t q = 0; q < batch_size; ++q) {
        auto triplets = enumerate_instance_triplets(batch_size, q, dir);
        set.instance.insert(set.instance.end(), triplets.begin(),
                            triplets.end());
      }
    }
  }
  if (want_semantic) {
    const auto cap = compute_negative_cap(labels);
    if (cap) {
      for (Direction dir : {Direction::AtoB, Direction::BtoA}) {
        for (std::size_t q = 0; q < batch_size; ++q) {
          auto triplets =
              enumerate_semantic_triplets(labels, q, dir, *cap, rng);
          set.semantic.insert(set.semantic.end(), triplets.begin(),
                              triplets.end());
        }
      }
    }
  }
  return set;
}

namespace {

// Per-item upstream gradients for one triplet kind, with occupancy flags so
// untouched items skip the backward pass.
struct UpstreamBuffer {
  std::vector<Vector> grad_a;
  std::vector<Vector> grad_b;
  std::vector<bool> touched_a;
  std::vector<bool> touched_b;

  explicit UpstreamBuffer(std::size_t batch_size, std::size_t latent_dim)
      : grad_a(batch_size, Vector(latent_dim, 0.0)),
        grad_b(batch_size, Vector(latent_dim, 0.0)),
        touched_a(batch_size, false),
        touched_b(batch_size, false) {}

  void add(Direction dir, bool target_side, std::size_t index,
           const Vector& g) {
    // target_side: false = the query's modality, true = the other one.
    const bool side_a = (dir == Direction::AtoB) != target_side;
    auto& dst = side_a ? grad_a[index] : grad_b[index];
    auto& flag = side_a ? touched_a : touched_b;
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
    flag[index] = true;
  }
};

struct KindStats {
  std::size_t active = 0;
  double loss_sum = 0.0;
};

KindStats process_triplets(const std::vector<Triplet>& triplets,
                           const BatchEmbeddings& emb, double alpha,
                           UpstreamBuffer& up) {
  KindStats stats;
  for (const Triplet& t : triplets) {
    const bool a_to_b = t.direction == Direction::AtoB;
    const auto& query_side = a_to_b ? emb.latent_a : emb.latent_b;
    const auto& target_side = a_to_b ? emb.latent_b : emb.latent_a;
    auto r = triplet_loss(query_side[t.query], target_side[t.positive],
                          target_side[t.negative], alpha);
    if (r.loss <= 0.0) continue;
    ++stats.active;
    stats.loss_sum += r.loss;
    up.add(t.direction, false, t.query, r.grad_query);
    up.add(t.direction, true, t.positive, r.grad_positive);
    up.add(t.direction, true, t.negative, r.grad_negative);
  }
  return stats;
}

void backprop_upstreams(const EncoderParams& params, const BatchData& batch,
                        const UpstreamBuffer& up, EncoderParams& sum) {
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (up.touched_a[i]) {
      encode_backward_accum(params, Branch::A, batch.features_a[i],
                            up.grad_a[i], sum);
    }
    if (up.touched_b[i]) {
      encode_backward_accum(params, Branch::B, batch.features_b[i],
                            up.grad_b[i], sum);
    }
  }
}

}  // namespace

RawBatchGradients accumulate_triplet_gradients(const EncoderParams& params,
                                               const BatchData& batch,
                                               const BatchEmbeddings& emb,
                                               const TripletSet& triplets,
                                               const LossConfig& config) {
  RawBatchGradients raw;
  raw.instance_sum = zeros_like(params);
  raw.semantic_sum = zeros_like(params);
  raw.total_instance = triplets.instance.size();
  raw.total_semantic = triplets.semantic.size();

  const std::size_t latent_dim = params.spec.latent_dim;
  if (!triplets.instance.empty()) {
    UpstreamBuffer up(batch.size(), latent_dim);
    const auto stats = process_triplets(triplets.instance, emb, config.alpha, up);
    raw.active_instance = stats.active;
    raw.instance_loss_sum = stats.loss_sum;
    backprop_upstreams(params, batch, up, raw.instance_sum);
  }
  if (!triplets.semantic.empty()) {
    UpstreamBuffer up(batch.size(), latent_dim);
    const auto stats = process_triplets(triplets.semantic, emb, config.alpha, up);
    raw.active_semantic = stats.active;
    raw.semantic_loss_sum = stats.loss_sum;
    backprop_upstreams(params, batch, up, raw.semantic_sum);
  }
  return raw;
}

GradientAccumulator finalize_gradients(const RawBatchGradients& raw,
                                       AggregationStrategy strategy,
                                       double lambda) {
  GradientAccumulator acc;
  acc.update = zeros_like(raw.instance_sum);
  acc.beta_r = raw.active_instance;
  acc.beta_s = raw.active_semantic;
  acc.total_r = raw.total_instance;
  acc.total_s = raw.total_semantic;

  const bool adaptive = strategy == AggregationStrategy::Adaptive;
  const std::size_t div_r = adaptive ? raw.active_instance : raw.total_instance;
  const std::size_t div_s = adaptive ? raw.active_semantic : raw.total_semantic;

  if (div_r > 0) {
    const double inv = 1.0 / static_cast<double>(div_r);
    axpy_params(inv, raw.instance_sum, acc.update);
    acc.instance_loss = raw.instance_loss_sum * inv;
  }
  if (div_s > 0) {
    const double inv = 1.0 / static_cast<double>(div_s);
    axpy_params(lambda * inv, raw.semantic_sum, acc.update);
    acc.semantic_loss = raw.semantic_loss_sum * inv;
  }
  return acc;
}

GradientAccumulator aggregate_adaptive(const EncoderParams& params,
                                       const BatchData& batch,
                                       const BatchEmbeddings& emb,
                                       const TripletSet& triplets,
                                       const LossConfig& config) {
  return finalize_gradients(
      accumulate_triplet_gradients(params, batch, emb, triplets, config),
      AggregationStrategy::Adaptive, config.lambda);
}

GradientAccumulator aggregate_average(const EncoderParams& params,
                                      const BatchData& batch,
                                      const BatchEmbeddings& emb,
                                      const TripletSet& triplets,
                                      const LossConfig& config) {
  return finalize_gradients(
      accumulate_triplet_gradients(params, batch, emb, triplets, config),
      AggregationStrategy::Average, config.lambda);
}

}  // namespace xmodal
