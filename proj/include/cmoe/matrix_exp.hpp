#pragma once

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace cmoe {

// Matrix exponential by scaling and squaring with a truncated Taylor series.
// The input is scaled by 2^-s so that its 1-norm is at most 1; an order-16
// Taylor remainder is then below 1/17! relative to the leading term.
template <class Derived>
typename Derived::PlainObject expm_taylor(const Eigen::MatrixBase<Derived>& a, int order = 16) {
  using Plain = typename Derived::PlainObject;
  const Eigen::Index n = a.rows();
  const double norm1 = n == 0 ? 0.0 : a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 1.0) squarings = static_cast<int>(std::ceil(std::log2(norm1)));
  const Plain scaled = a / std::ldexp(1.0, squarings);

  // Horner: I + A/1 (I + A/2 (I + ... (I + A/order))). Dilation generators are
  // tridiagonal, so the products go through a sparse copy when A is sparse.
  const Eigen::SparseMatrix<typename Plain::Scalar> sparse = scaled.sparseView();
  const bool use_sparse = sparse.nonZeros() * 8 <= n * n;
  Plain result = Plain::Identity(n, n);
  for (int k = order; k >= 1; --k) {
    Plain next = use_sparse ? Plain(sparse * result) : Plain(scaled * result);
    next /= static_cast<double>(k);
    next.diagonal().array() += 1.0;
    result.swap(next);
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

}  // namespace cmoe
