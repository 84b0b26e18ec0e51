#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "staf/types.hpp"

namespace staf {

enum class ShrinkMode { kShrinking, kConstantOne };

/// Scale factor that contracts the center polytope as the state approaches
/// the origin: (x'x + eps0) / (1 + nu2 x'x), or identically one.
template <typename Scalar>
struct ShrinkFunction {
  Scalar eps0 = Scalar(0.01);
  Scalar nu2 = Scalar(1);
  Scalar scale = Scalar(0.7);
  ShrinkMode mode = ShrinkMode::kShrinking;

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    if (mode == ShrinkMode::kConstantOne) return Scalar(1);
    const Scalar sq = x.squaredNorm();
    return (sq + eps0) / (Scalar(1) + nu2 * sq);
  }
};

/// State-following exponential kernels sigma_i(x, c_i) = exp(x'c_i) - 1 with
/// centers c_i(x) = x + scale * shrink(x) * d_i.
template <typename Scalar>
struct StaFBasis {
  int dimension = 0;
  MatrixX<Scalar> offsets;  // L x n, row i is d_i
  ShrinkFunction<Scalar> shrink;

  int num_kernels() const { return static_cast<int>(offsets.rows()); }

  void validate() const {
    if (dimension <= 0) throw ConfigError("basis dimension must be positive");
    if (offsets.rows() <= 0) throw ConfigError("basis needs at least one kernel");
    if (offsets.cols() != dimension)
      throw ConfigError("basis offsets must have " + std::to_string(dimension) + " columns");
    if (shrink.eps0 < 0 || shrink.nu2 < 0 || shrink.scale < 0)
      throw ConfigError("shrink constants must be nonnegative");
  }
};

namespace detail {

template <typename Scalar>
Scalar checked_exp(Scalar exponent) {
  using std::exp;
  using std::isfinite;
  // exp overflows double near 709.78
  if (!isfinite(exponent) || exponent > Scalar(700))
    throw NumericRangeError("kernel exponent out of range: " + std::to_string(double(exponent)));
  return exp(exponent);
}

}  // namespace detail

/// Kernel centers anchored at `x`; row i is c_i(x).
template <typename Scalar, typename Derived>
MatrixX<Scalar> centers(const StaFBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& x) {
  require(x.size() == basis.dimension, "centers: state dimension mismatch");
  const Scalar factor = basis.shrink.scale * basis.shrink.value(x);
  MatrixX<Scalar> c = factor * basis.offsets;
  c.rowwise() += x.transpose();
  return c;
}

/// Kernel vector at `x` for explicitly supplied centers (L x n).
template <typename Scalar, typename Derived>
VectorX<Scalar> sigma_at(const Eigen::MatrixBase<Derived>& x, const MatrixX<Scalar>& c) {
  require(x.size() == c.cols(), "sigma_at: state dimension mismatch");
  VectorX<Scalar> s(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    s(i) = detail::checked_exp<Scalar>(c.row(i).dot(x.transpose())) - Scalar(1);
  return s;
}

/// Partial gradient of sigma in its first argument, centers held fixed.
/// Row i is c_i' exp(x'c_i).
template <typename Scalar, typename Derived>
MatrixX<Scalar> grad_sigma_at(const Eigen::MatrixBase<Derived>& x, const MatrixX<Scalar>& c) {
  require(x.size() == c.cols(), "grad_sigma_at: state dimension mismatch");
  MatrixX<Scalar> g(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i)
    g.row(i) = detail::checked_exp<Scalar>(c.row(i).dot(x.transpose())) * c.row(i);
  return g;
}

template <typename Scalar, typename Derived>
VectorX<Scalar> sigma(const StaFBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& x) {
  return sigma_at<Scalar>(x, centers(basis, x));
}

template <typename Scalar, typename Derived>
MatrixX<Scalar> grad_sigma(const StaFBasis<Scalar>& basis, const Eigen::MatrixBase<Derived>& x) {
  return grad_sigma_at<Scalar>(x, centers(basis, x));
}

/// Vertices of a regular simplex in R^n (n + 1 rows), centroid at the origin,
/// unit circumradius. Built recursively from the (n-1)-simplex.
template <typename Scalar>
MatrixX<Scalar> regular_simplex(int n) {
  require(n >= 1, "regular_simplex: dimension must be >= 1");
  MatrixX<Scalar> v(2, 1);
  v << Scalar(1), Scalar(-1);
  for (int k = 2; k <= n; ++k) {
    using std::sqrt;
    const Scalar kk = Scalar(k);
    MatrixX<Scalar> next = MatrixX<Scalar>::Zero(k + 1, k);
    next.topLeftCorner(k, k - 1) = sqrt(Scalar(1) - Scalar(1) / (kk * kk)) * v;
    next.topRightCorner(k, 1).setConstant(Scalar(-1) / kk);
    next(k, k - 1) = Scalar(1);
    v = std::move(next);
  }
  return v;
}

/// Three kernels on a shrinking equilateral triangle around the state.
template <typename Scalar>
StaFBasis<Scalar> regulation_basis(Scalar nu2 = Scalar(1)) {
  StaFBasis<Scalar> b;
  b.dimension = 2;
  b.offsets.resize(3, 2);
  b.offsets << Scalar(0), Scalar(1), Scalar(0.87), Scalar(-0.5), Scalar(-0.87), Scalar(-0.5);
  b.shrink = ShrinkFunction<Scalar>{Scalar(0.01), nu2, Scalar(0.7), ShrinkMode::kShrinking};
  return b;
}

/// n + 1 kernels on a fixed-size regular simplex around the state.
template <typename Scalar>
StaFBasis<Scalar> simplex_basis(int n, Scalar scale) {
  StaFBasis<Scalar> b;
  b.dimension = n;
  b.offsets = regular_simplex<Scalar>(n);
  b.shrink = ShrinkFunction<Scalar>{Scalar(0.01), Scalar(1), scale, ShrinkMode::kConstantOne};
  return b;
}

}  // namespace staf
