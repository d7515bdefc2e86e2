#include "xmodal/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <utility>

#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

namespace {

std::vector<Vector> random_matrix(std::size_t rows, std::size_t cols,
                                  double scale, Rng& rng) {
  std::vector<Vector> m(rows, Vector(cols));
  for (auto& row : m) {
    for (auto& v : row) v = scale * rng.normal();
  }
  return m;
}

Vector matvec(const std::vector<Vector>& m, const Vector& x) {
  Vector out(m.size(), 0.0);
  for (std::size_t r = 0; r < m.size(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += m[r][c] * x[c];
    out[r] = s;
  }
  return out;
}

// Largest-remainder allocation of n items over the given fractions.
std::vector<std::size_t> allocate(std::size_t n,
                                  const std::vector<double>& fractions) {
  std::vector<std::size_t> counts(fractions.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double exact = n * fractions[i];
    counts[i] = static_cast<std::size_t>(exact);
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; k < n - assigned; ++k) {
    counts[remainders[k % remainders.size()].second]++;
  }
  return counts;
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_classes == 0 || pairs_per_class == 0 || latent_dim_true == 0 ||
      dim_a == 0 || dim_b == 0) {
    throw ConfigError("synthetic spec: all counts must be >= 1");
  }
  if (within_class_noise < 0.0 || cross_modal_noise < 0.0) {
    throw ConfigError("synthetic spec: noise levels must be >= 0");
  }
  if (unlabeled_fraction < 0.0 || unlabeled_fraction > 1.0) {
    throw ConfigError("synthetic spec: unlabeled_fraction must be in [0, 1]");
  }
}

SyntheticSplits generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);

  // Unit-norm centers keep the noise levels meaningful as relative spreads.
  std::vector<Vector> centers;
  centers.reserve(spec.n_classes);
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    Vector center(spec.latent_dim_true);
    double n = 0.0;
    do {
      for (auto& v : center) v = rng.normal();
      n = 0.0;
      for (double v : center) n += v * v;
    } while (n == 0.0);
    n = std::sqrt(n);
    for (auto& v : center) v /= n;
    centers.push_back(std::move(center));
  }

  const double map_scale = 0.40 / std::sqrt(double(spec.latent_dim_true));
  const auto map_a =
      random_matrix(spec.dim_a, spec.latent_dim_true, map_scale, rng);
  const auto map_b =
      random_matrix(spec.dim_b, spec.latent_dim_true, map_scale, rng);

  const std::size_t total = spec.n_classes * spec.pairs_per_class;
  std::vector<PairedSample> samples;
  std::vector<std::uint32_t> true_class(total);
  samples.reserve(total);
  char id_buf[32];
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    for (std::size_t p = 0; p < spec.pairs_per_class; ++p) {
      const std::size_t index = samples.size();
      true_class[index] = static_cast<std::uint32_t>(c);

      Vector latent = centers[c];
      for (auto& v : latent) v += spec.within_class_noise * rng.normal();

      PairedSample s;
      std::snprintf(id_buf, sizeof(id_buf), "pair%06zu", index);
      s.id = id_buf;
      s.class_label = static_cast<std::uint32_t>(c);
      s.features_a = matvec(map_a, latent);
      for (auto& v : s.features_a) v += spec.cross_modal_noise * rng.normal();
      s.features_b = matvec(map_b, latent);
      for (auto& v : s.features_b) v += spec.cross_modal_noise * rng.normal();
      samples.push_back(std::move(s));
    }
  }

  // Strip labels from a uniform random subset.
  {
    std::vector<std::size_t> order(total);
    for (std::size_t i = 0; i < total; ++i) order[i] = i;
    rng.shuffle(order);
    const auto strip =
        static_cast<std::size_t>(std::llround(total * spec.unlabeled_fraction));
    for (std::size_t k = 0; k < strip; ++k) {
      samples[order[k]].class_label.reset();
    }
  }

  // 70/15/15 by pair, stratified by true class.
  SyntheticSplits splits;
  for (Dataset* ds : {&splits.train, &splits.validation, &splits.test}) {
    ds->dim_a = spec.dim_a;
    ds->dim_b = spec.dim_b;
    ds->n_classes = static_cast<std::uint32_t>(spec.n_classes);
  }
  splits.train.split = "train";
  splits.validation.split = "validation";
  splits.test.split = "test";

  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < total; ++i) {
      if (true_class[i] == c) members.push_back(i);
    }
    rng.shuffle(members);
    const auto counts = allocate(members.size(), {0.70, 0.15, 0.15});
    std::size_t cursor = 0;
    Dataset* dsts[3] = {&splits.train, &splits.validation, &splits.test};
    for (std::size_t part = 0; part < 3; ++part) {
      for (std::size_t k = 0; k < counts[part]; ++k) {
        dsts[part]->samples.push_back(samples[members[cursor++]]);
      }
    }
  }
  return splits;
}

}  // namespace xmodal
