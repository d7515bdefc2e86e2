#include "xmodal/encoder.hpp"

#include <cmath>
#include <string>

#include "xmodal/error.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

namespace {

double activate(Activation a, double z) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? z : 0.0;
    case Activation::Tanh:
      return std::tanh(z);
  }
  return 0.0;
}

// Derivative expressed through the pre-activation. Relu uses the
// subgradient 0 at exactly zero.
double activate_deriv(Activation a, double z) {
  switch (a) {
    case Activation::Relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: {
      double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 0.0;
}

DenseLayer init_layer(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  DenseLayer layer;
  const double s = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  layer.weight.assign(out_dim, Vector(in_dim));
  for (auto& row : layer.weight) {
    for (auto& w : row) w = rng.uniform(-s, s);
  }
  layer.bias.assign(out_dim, 0.0);
  return layer;
}

std::vector<DenseLayer> init_branch(std::size_t input_dim,
                                    const std::vector<std::size_t>& hidden,
                                    std::size_t latent_dim, Rng& rng) {
  std::vector<DenseLayer> layers;
  std::size_t in = input_dim;
  for (std::size_t h : hidden) {
    layers.push_back(init_layer(in, h, rng));
    in = h;
  }
  layers.push_back(init_layer(in, latent_dim, rng));
  return layers;
}

void affine(const DenseLayer& layer, const Vector& in, Vector& out) {
  out.resize(layer.out_dim());
  for (std::size_t o = 0; o < layer.out_dim(); ++o) {
    double s = layer.bias[o];
    const Vector& row = layer.weight[o];
    for (std::size_t i = 0; i < in.size(); ++i) s += row[i] * in[i];
    out[o] = s;
  }
}

struct ForwardTrace {
  // inputs[i] is what layer i consumed; pre_acts[i] its affine output.
  std::vector<Vector> inputs;
  std::vector<Vector> pre_acts;
  Vector pre_norm;  // output-layer result before normalization
  Vector latent;
};

ForwardTrace forward_trace(const EncoderParams& params, Branch branch,
                           const Vector& features) {
  const auto& layers = params.branch(branch);
  if (features.size() != params.spec.input_dim(branch)) {
    throw DimensionError(
        "encode: feature dimension " + std::to_string(features.size()) +
        " does not match branch input dimension " +
        std::to_string(params.spec.input_dim(branch)));
  }
  ForwardTrace t;
  Vector cur = features;
  for (std::size_t li = 0; li < layers.size(); ++li) {
    t.inputs.push_back(cur);
    Vector z;
    affine(layers[li], cur, z);
    t.pre_acts.push_back(z);
    if (li + 1 < layers.size()) {
      cur.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) {
        cur[i] = activate(params.spec.activation, z[i]);
      }
    } else {
      cur = z;
    }
  }
  t.pre_norm = cur;
  t.latent = l2_normalize(cur);
  return t;
}

}  // namespace

void EncoderSpec::validate() const {
  if (input_dim_a == 0 || input_dim_b == 0) {
    throw ConfigError("encoder spec: input dimensions must be positive");
  }
  if (latent_dim < 2) {
    throw ConfigError("encoder spec: latent_dim must be at least 2");
  }
  for (std::size_t h : hidden_dims) {
    if (h == 0) throw ConfigError("encoder spec: hidden dims must be positive");
  }
}

EncoderParams init_params(const EncoderSpec& spec,
                          std::optional<std::size_t> n_classes,
                          std::uint64_t seed) {
  spec.validate();
  Rng rng(seed);
  EncoderParams params;
  params.spec = spec;
  params.branch_a =
      init_branch(spec.input_dim_a, spec.hidden_dims, spec.latent_dim, rng);
  params.branch_b =
      init_branch(spec.input_dim_b, spec.hidden_dims, spec.latent_dim, rng);
  if (n_classes) {
    if (*n_classes == 0) {
      throw ConfigError("init_params: classification head needs n_classes > 0");
    }
    params.head = init_layer(spec.latent_dim, *n_classes, rng);
  }
  return params;
}

Vector encode(const EncoderParams& params, Branch branch,
              const Vector& features) {
  return forward_trace(params, branch, features).latent;
}

void encode_backward_accum(const EncoderParams& params, Branch branch,
                           const Vector& features, const Vector& upstream,
                           EncoderParams& grads) {
  if (upstream.size() != params.spec.latent_dim) {
    throw DimensionError("encode_backward: upstream has " +
                         std::to_string(upstream.size()) +
                         " entries, expected latent_dim " +
                         std::to_string(params.spec.latent_dim));
  }
  ForwardTrace t = forward_trace(params, branch, features);
  const auto& layers = params.branch(branch);
  auto& layer_grads = grads.branch(branch);

  // Through the final normalization.
  Vector g = l2_normalize_backward(t.pre_norm, upstream);

  for (std::size_t li = layers.size(); li-- > 0;) {
    if (li + 1 < layers.size()) {
      // g currently holds the gradient w.r.t. this layer's activation output.
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] *= activate_deriv(params.spec.activation, t.pre_acts[li][i]);
      }
    }
    const Vector& in = t.inputs[li];
    DenseLayer& lg = layer_grads[li];
    for (std::size_t o = 0; o < g.size(); ++o) {
      const double go = g[o];
      if (go != 0.0) {
        Vector& wrow = lg.weight[o];
        for (std::size_t i = 0; i < in.size(); ++i) wrow[i] += go * in[i];
      }
      lg.bias[o] += go;
    }
    if (li > 0) {
      Vector prev(in.size(), 0.0);
      for (std::size_t o = 0; o < g.size(); ++o) {
        const double go = g[o];
        if (go == 0.0) continue;
        const Vector& row = layers[li].weight[o];
        for (std::size_t i = 0; i < in.size(); ++i) prev[i] += go * row[i];
      }
      g = std::move(prev);
    }
  }
}

EncoderParams encode_backward(const EncoderParams& params, Branch branch,
                              const Vector& features, const Vector& upstream) {
  EncoderParams grads = zeros_like(params);
  encode_backward_accum(params, branch, features, upstream, grads);
  return grads;
}

Vector classification_head_forward(const EncoderParams& params,
                                   const Vector& latent) {
  if (!params.head) {
    throw ConfigError("classification head requested but not present");
  }
  if (latent.size() != params.spec.latent_dim) {
    throw DimensionError("classification head: latent dimension mismatch");
  }
  Vector scores;
  affine(*params.head, latent, scores);
  return scores;
}

Vector classification_head_backward(const EncoderParams& params,
                                    const Vector& latent,
                                    const Vector& grad_scores,
                                    EncoderParams& grads) {
  if (!params.head) {
    throw ConfigError("classification head requested but not present");
  }
  if (grad_scores.size() != params.head->out_dim()) {
    throw DimensionError("classification head: score gradient size mismatch");
  }
  DenseLayer& hg = *grads.head;
  Vector grad_latent(latent.size(), 0.0);
  for (std::size_t o = 0; o < grad_scores.size(); ++o) {
    const double go = grad_scores[o];
    hg.bias[o] += go;
    Vector& wrow = hg.weight[o];
    const Vector& prow = params.head->weight[o];
    for (std::size_t i = 0; i < latent.size(); ++i) {
      wrow[i] += go * latent[i];
      grad_latent[i] += go * prow[i];
    }
  }
  return grad_latent;
}

namespace {

template <typename F>
void for_each_layer_pair(const EncoderParams& a, EncoderParams& b, F&& f) {
  for (std::size_t i = 0; i < a.branch_a.size(); ++i)
    f(a.branch_a[i], b.branch_a[i]);
  for (std::size_t i = 0; i < a.branch_b.size(); ++i)
    f(a.branch_b[i], b.branch_b[i]);
  if (a.head && b.head) f(*a.head, *b.head);
}

}  // namespace

EncoderParams zeros_like(const EncoderParams& params) {
  EncoderParams z = params;
  auto clear_layer = [](DenseLayer& l) {
    for (auto& row : l.weight) std::fill(row.begin(), row.end(), 0.0);
    std::fill(l.bias.begin(), l.bias.end(), 0.0);
  };
  for (auto& l : z.branch_a) clear_layer(l);
  for (auto& l : z.branch_b) clear_layer(l);
  if (z.head) clear_layer(*z.head);
  return z;
}

void scale_params(EncoderParams& params, double factor) {
  auto scale_layer = [factor](DenseLayer& l) {
    for (auto& row : l.weight)
      for (auto& w : row) w *= factor;
    for (auto& b : l.bias) b *= factor;
  };
  for (auto& l : params.branch_a) scale_layer(l);
  for (auto& l : params.branch_b) scale_layer(l);
  if (params.head) scale_layer(*params.head);
}

void axpy_params(double a, const EncoderParams& x, EncoderParams& y) {
  for_each_layer_pair(x, y, [a](const DenseLayer& xl, DenseLayer& yl) {
    for (std::size_t r = 0; r < xl.weight.size(); ++r) {
      for (std::size_t c = 0; c < xl.weight[r].size(); ++c) {
        yl.weight[r][c] += a * xl.weight[r][c];
      }
    }
    for (std::size_t i = 0; i < xl.bias.size(); ++i) {
      yl.bias[i] += a * xl.bias[i];
    }
  });
}

double params_l2_norm(const EncoderParams& params) {
  double s = 0.0;
  auto add_layer = [&s](const DenseLayer& l) {
    for (const auto& row : l.weight)
      for (double w : row) s += w * w;
    for (double b : l.bias) s += b * b;
  };
  for (const auto& l : params.branch_a) add_layer(l);
  for (const auto& l : params.branch_b) add_layer(l);
  if (params.head) add_layer(*params.head);
  return std::sqrt(s);
}

bool params_equal(const EncoderParams& a, const EncoderParams& b) {
  if (a.branch_a.size() != b.branch_a.size() ||
      a.branch_b.size() != b.branch_b.size() ||
      a.head.has_value() != b.head.has_value()) {
    return false;
  }
  auto layer_eq = [](const DenseLayer& x, const DenseLayer& y) {
    return x.weight == y.weight && x.bias == y.bias;
  };
  for (std::size_t i = 0; i < a.branch_a.size(); ++i)
    if (!layer_eq(a.branch_a[i], b.branch_a[i])) return false;
  for (std::size_t i = 0; i < a.branch_b.size(); ++i)
    if (!layer_eq(a.branch_b[i], b.branch_b[i])) return false;
  if (a.head && !layer_eq(*a.head, *b.head)) return false;
  return true;
}

}  // namespace xmodal
