#pragma once

#include <cstdint>

#include "xmodal/dataset.hpp"

namespace xmodal {

// Clustered cross-modal generator. Each class has a latent center; each
// pair's true latent is its center plus within-class noise, and the two
// modality features are independent fixed linear images of that latent plus
// cross-modal noise. A fraction of pairs has the label stripped while the
// class structure stays latent.
struct SyntheticSpec {
  std::size_t n_classes = 20;
  std::size_t pairs_per_class = 150;
  std::size_t latent_dim_true = 16;
  std::size_t dim_a = 64;
  std::size_t dim_b = 48;
  double within_class_noise = 0.2;
  double cross_modal_noise = 0.1;
  double unlabeled_fraction = 0.5;
  std::uint64_t seed = 13;

  void validate() const;
};

struct SyntheticSplits {
  Dataset train;
  Dataset validation;
  Dataset test;
};

// 70/15/15 split by pair, stratified by (true) class, deterministic per seed.
SyntheticSplits generate_synthetic(const SyntheticSpec& spec);

}  // namespace xmodal
