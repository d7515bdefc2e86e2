#pragma once

#include <vector>

namespace xmodal {

// Dense real vector. All entries are expected to stay finite; operations
// that would silently produce NaN raise DegenerateInputError instead.
using Vector = std::vector<double>;

double dot(const Vector& x, const Vector& y);
double norm(const Vector& x);

// 1 - (x.y)/(|x||y|), in [0, 2]. Symmetric; 0 iff x and y are colinear with
// positive scale. Throws DimensionError on size mismatch and
// DegenerateInputError when either norm is zero.
double cosine_distance(const Vector& x, const Vector& y);

struct CosineDistanceGrad {
  Vector grad_x;
  Vector grad_y;
};

// Analytic gradient of cosine_distance with respect to both arguments.
CosineDistanceGrad cosine_distance_grad(const Vector& x, const Vector& y);

// x / |x|. Throws DegenerateInputError when |x| = 0.
Vector l2_normalize(const Vector& x);

// Jacobian-vector product of l2_normalize at x for an upstream gradient:
// returns (upstream - (upstream.u) u) / |x| with u = x/|x|.
Vector l2_normalize_backward(const Vector& x, const Vector& upstream);

}  // namespace xmodal
