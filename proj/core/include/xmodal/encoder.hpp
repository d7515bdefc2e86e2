#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xmodal/math.hpp"

namespace xmodal {

enum class Branch { A, B };
enum class Activation { Relu, Tanh };

// Architecture of the two branches that map per-modality feature vectors
// into the shared latent space. Both branches use the same hidden stack and
// the same latent dimension; only the input dimensions differ.
struct EncoderSpec {
  std::size_t input_dim_a = 0;
  std::size_t input_dim_b = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t latent_dim = 0;
  Activation activation = Activation::Relu;

  // Throws ConfigError if any dimension is invalid (latent_dim must be >= 2).
  void validate() const;

  std::size_t input_dim(Branch b) const {
    return b == Branch::A ? input_dim_a : input_dim_b;
  }
};

// One dense layer: out_dim rows of in_dim weights plus an out_dim bias.
struct DenseLayer {
  std::vector<Vector> weight;  // weight[out][in]
  Vector bias;

  std::size_t out_dim() const { return bias.size(); }
  std::size_t in_dim() const { return weight.empty() ? 0 : weight[0].size(); }
};

// All trainable state: the two branch stacks and the optional linear
// classification head (latent_dim -> n_classes). The spec is embedded so
// that forward/backward passes are self-contained.
struct EncoderParams {
  EncoderSpec spec;
  std::vector<DenseLayer> branch_a;
  std::vector<DenseLayer> branch_b;
  std::optional<DenseLayer> head;

  std::vector<DenseLayer>& branch(Branch b) {
    return b == Branch::A ? branch_a : branch_b;
  }
  const std::vector<DenseLayer>& branch(Branch b) const {
    return b == Branch::A ? branch_a : branch_b;
  }
};

// Weights drawn uniformly from [-s, s] with s = sqrt(6/(fan_in+fan_out));
// biases zero. Deterministic for a given seed; the head, when requested, is
// drawn last so branch parameters do not depend on its presence.
EncoderParams init_params(const EncoderSpec& spec,
                          std::optional<std::size_t> n_classes,
                          std::uint64_t seed);

// Forward pass: hidden layers with the chosen activation, linear output
// layer, then L2 normalization. The result is a unit-norm latent point.
Vector encode(const EncoderParams& params, Branch branch,
              const Vector& features);

// Gradient of (upstream . latent) with respect to all parameters. Only the
// selected branch receives nonzero entries; the result has the full
// EncoderParams shape.
EncoderParams encode_backward(const EncoderParams& params, Branch branch,
                              const Vector& features, const Vector& upstream);

// As encode_backward but adds into an existing gradient structure.
void encode_backward_accum(const EncoderParams& params, Branch branch,
                           const Vector& features, const Vector& upstream,
                           EncoderParams& grads);

// Affine map of a latent point to class scores. Throws ConfigError when no
// head is present.
Vector classification_head_forward(const EncoderParams& params,
                                   const Vector& latent);

// Accumulates head parameter gradients for an upstream score gradient and
// returns the gradient with respect to the latent input.
Vector classification_head_backward(const EncoderParams& params,
                                    const Vector& latent,
                                    const Vector& grad_scores,
                                    EncoderParams& grads);

// Parameter-structure arithmetic shared by gradient accumulation and Adam.
EncoderParams zeros_like(const EncoderParams& params);
void scale_params(EncoderParams& params, double factor);
// y += a * x
void axpy_params(double a, const EncoderParams& x, EncoderParams& y);
double params_l2_norm(const EncoderParams& params);
bool params_equal(const EncoderParams& a, const EncoderParams& b);

}  // namespace xmodal
