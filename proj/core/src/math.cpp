#include "xmodal/math.hpp"

#include <cmath>
#include <string>

#include "xmodal/error.hpp"

namespace xmodal {

namespace {

void check_same_dim(const Vector& x, const Vector& y) {
  if (x.size() != y.size()) {
    throw DimensionError("vector dimension mismatch: " +
                         std::to_string(x.size()) + " vs " +
                         std::to_string(y.size()));
  }
}

void check_nonzero(double n, const char* what) {
  if (n == 0.0) {
    throw DegenerateInputError(std::string(what) + ": zero-norm vector");
  }
}

}  // namespace

double dot(const Vector& x, const Vector& y) {
  check_same_dim(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm(const Vector& x) { return std::sqrt(dot(x, x)); }

double cosine_distance(const Vector& x, const Vector& y) {
  check_same_dim(x, y);
  const double nx = norm(x);
  const double ny = norm(y);
  check_nonzero(nx, "cosine_distance");
  check_nonzero(ny, "cosine_distance");
  return 1.0 - dot(x, y) / (nx * ny);
}

CosineDistanceGrad cosine_distance_grad(const Vector& x, const Vector& y) {
  check_same_dim(x, y);
  const double nx = norm(x);
  const double ny = norm(y);
  check_nonzero(nx, "cosine_distance_grad");
  check_nonzero(ny, "cosine_distance_grad");
  const double s = dot(x, y);
  const double inv = 1.0 / (nx * ny);
  // d = 1 - s/(|x||y|)
  // dd/dx = -y/(|x||y|) + s x / (|x|^3 |y|)
  const double cx = s / (nx * nx);
  const double cy = s / (ny * ny);
  CosineDistanceGrad g;
  g.grad_x.resize(x.size());
  g.grad_y.resize(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.grad_x[i] = (cx * x[i] - y[i]) * inv;
    g.grad_y[i] = (cy * y[i] - x[i]) * inv;
  }
  return g;
}

Vector l2_normalize(const Vector& x) {
  const double n = norm(x);
  check_nonzero(n, "l2_normalize");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] / n;
  return out;
}

Vector l2_normalize_backward(const Vector& x, const Vector& upstream) {
  check_same_dim(x, upstream);
  const double n = norm(x);
  check_nonzero(n, "l2_normalize_backward");
  const double proj = dot(x, upstream) / (n * n);
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = (upstream[i] - proj * x[i]) / n;
  }
  return out;
}

}  // namespace xmodal
