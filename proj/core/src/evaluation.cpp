#include "xmodal/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

namespace {

std::size_t rank_from_distances(const std::vector<double>& distances,
                                std::size_t match_index) {
  const double d_match = distances[match_index];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < distances.size(); ++j) {
    if (j == match_index) continue;
    if (distances[j] < d_match || (distances[j] == d_match && j < match_index)) {
      ++rank;
    }
  }
  return rank;
}

struct LatentTable {
  std::vector<Vector> latent;
  std::vector<double> norms;
};

LatentTable encode_all(const EncoderParams& params, const Dataset& dataset,
                       Branch branch) {
  LatentTable t;
  t.latent.reserve(dataset.size());
  t.norms.reserve(dataset.size());
  for (const auto& s : dataset.samples) {
    t.latent.push_back(encode(
        params, branch, branch == Branch::A ? s.features_a : s.features_b));
    t.norms.push_back(norm(t.latent.back()));
  }
  return t;
}

// Ranks for every query of one direction within a subset.
std::vector<std::size_t> subset_ranks(const LatentTable& queries,
                                      const LatentTable& candidates,
                                      const std::vector<std::size_t>& subset) {
  std::vector<std::size_t> ranks;
  ranks.reserve(subset.size());
  std::vector<double> distances(subset.size());
  for (std::size_t qi = 0; qi < subset.size(); ++qi) {
    const Vector& q = queries.latent[subset[qi]];
    const double qn = queries.norms[subset[qi]];
    for (std::size_t cj = 0; cj < subset.size(); ++cj) {
      const std::size_t c = subset[cj];
      distances[cj] =
          1.0 - dot(q, candidates.latent[c]) / (qn * candidates.norms[c]);
    }
    ranks.push_back(rank_from_distances(distances, qi));
  }
  return ranks;
}

struct Accumulated {
  std::vector<double> medrs, r1s, r5s, r10s;

  void add(const std::vector<std::size_t>& ranks) {
    medrs.push_back(medr(ranks));
    r1s.push_back(recall_at_k(ranks, 1));
    r5s.push_back(recall_at_k(ranks, 5));
    r10s.push_back(recall_at_k(ranks, 10));
  }
};

void mean_std(const std::vector<double>& v, double& mean, double& std_dev) {
  mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  std_dev = std::sqrt(ss / v.size());
}

DirectionMetrics to_metrics(const Accumulated& acc) {
  DirectionMetrics m;
  mean_std(acc.medrs, m.medr_mean, m.medr_std);
  mean_std(acc.r1s, m.r1_mean, m.r1_std);
  mean_std(acc.r5s, m.r5_mean, m.r5_std);
  mean_std(acc.r10s, m.r10_mean, m.r10_std);
  return m;
}

std::vector<std::size_t> draw_subset(std::size_t n, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  rng.shuffle(all);
  all.resize(k);
  return all;
}

}  // namespace

std::size_t rank_of_match(const Vector& query,
                          const std::vector<Vector>& candidates,
                          std::size_t match_index) {
  if (candidates.empty()) {
    throw ConfigError("rank_of_match: empty candidate list");
  }
  if (match_index >= candidates.size()) {
    throw ConfigError("rank_of_match: match index out of range");
  }
  std::vector<double> distances(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    distances[j] = cosine_distance(query, candidates[j]);
  }
  return rank_from_distances(distances, match_index);
}

double medr(const std::vector<std::size_t>& ranks) {
  if (ranks.empty()) {
    throw ConfigError("medr: empty rank list");
  }
  std::vector<std::size_t> sorted = ranks;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return static_cast<double>(sorted[n / 2]);
  return 0.5 * (static_cast<double>(sorted[n / 2 - 1]) +
                static_cast<double>(sorted[n / 2]));
}

double recall_at_k(const std::vector<std::size_t>& ranks, std::size_t k) {
  if (ranks.empty()) {
    throw ConfigError("recall_at_k: empty rank list");
  }
  if (k < 1) {
    throw ConfigError("recall_at_k: k must be >= 1");
  }
  std::size_t hits = 0;
  for (std::size_t r : ranks) {
    if (r <= k) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
}

RetrievalReport subset_protocol(const EncoderParams& params,
                                const Dataset& dataset,
                                std::size_t subset_size, std::size_t n_subsets,
                                std::uint64_t seed) {
  if (subset_size == 0 || n_subsets == 0) {
    throw ConfigError("subset_protocol: subset_size and n_subsets must be >= 1");
  }
  if (dataset.size() < subset_size) {
    throw ConfigError("subset_protocol: dataset has " +
                      std::to_string(dataset.size()) +
                      " pairs but the protocol requires at least " +
                      std::to_string(subset_size));
  }
  const LatentTable table_a = encode_all(params, dataset, Branch::A);
  const LatentTable table_b = encode_all(params, dataset, Branch::B);

  Rng rng(seed);
  Accumulated acc_ab, acc_ba;
  for (std::size_t s = 0; s < n_subsets; ++s) {
    const auto subset = draw_subset(dataset.size(), subset_size, rng);
    acc_ab.add(subset_ranks(table_a, table_b, subset));
    acc_ba.add(subset_ranks(table_b, table_a, subset));
  }

  RetrievalReport report;
  report.a_to_b = to_metrics(acc_ab);
  report.b_to_a = to_metrics(acc_ba);
  report.subset_size = subset_size;
  report.n_subsets = n_subsets;
  report.seed = seed;
  return report;
}

ValidationMedR validation_medr(const EncoderParams& params,
                               const Dataset& dataset,
                               std::size_t subset_size, std::uint64_t seed) {
  if (dataset.size() < subset_size || subset_size == 0) {
    throw ConfigError("validation_medr: invalid subset size");
  }
  const LatentTable table_a = encode_all(params, dataset, Branch::A);
  const LatentTable table_b = encode_all(params, dataset, Branch::B);
  Rng rng(seed);
  const auto subset = draw_subset(dataset.size(), subset_size, rng);
  ValidationMedR v;
  v.a_to_b = medr(subset_ranks(table_a, table_b, subset));
  v.b_to_a = medr(subset_ranks(table_b, table_a, subset));
  return v;
}

}  // namespace xmodal
