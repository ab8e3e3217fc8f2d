#pragma once

// Dense complex Hermitian linear algebra on truncated Fock spaces.
//
// Fock basis |0>,...,|d-1>. Two-mode operators use system-major flattening:
// joint index = m_sys * d_env + n_env.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cmoe/errors.hpp"

namespace cmoe {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr std::size_t kMaxJointDim = 16384;
inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kNegativeEigenvalueTol = 1e-10;

namespace detail {

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline void require_square(const ComplexMatrix& m, const char* who) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw InvalidDimension(std::string(who) + ": matrix must be square with dim >= 1, got " +
                           std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!m.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite entries");
}

}  // namespace detail

// Hermitian PSD matrix in the Fock basis plus the probability mass lost to
// truncation. The deficit is 1 - trace; it is never renormalized away.
class DensityMatrix {
 public:
  DensityMatrix() : matrix_(ComplexMatrix::Identity(1, 1)) {}

  explicit DensityMatrix(ComplexMatrix m) : matrix_(std::move(m)) {
    detail::require_square(matrix_, "DensityMatrix");
    const double scale = std::max(1.0, detail::max_abs(matrix_));
    const double defect = detail::hermiticity_defect(matrix_);
    if (defect > kHermitianTol * scale) {
      throw InvalidArgument("DensityMatrix: not Hermitian (defect " + std::to_string(defect) + ")");
    }
    matrix_ = (matrix_ + matrix_.adjoint()).eval() * 0.5;
    const double tr = matrix_.trace().real();
    if (tr > 1.0 + 1e-10) {
      throw InvalidArgument("DensityMatrix: trace " + std::to_string(tr) + " exceeds 1");
    }
    trace_deficit_ = std::max(0.0, 1.0 - tr);
  }

  static DensityMatrix pure(const ComplexVector& psi) {
    return DensityMatrix(psi * psi.adjoint());
  }

  static DensityMatrix fock(std::size_t n, std::size_t dim) {
    if (n >= dim) throw InvalidArgument("DensityMatrix::fock: n >= dim");
    ComplexMatrix m = ComplexMatrix::Zero(dim, dim);
    m(n, n) = 1.0;
    return DensityMatrix(std::move(m));
  }

  std::size_t dim() const { return static_cast<std::size_t>(matrix_.rows()); }
  const ComplexMatrix& matrix() const { return matrix_; }
  double trace_deficit() const { return trace_deficit_; }
  double trace() const { return matrix_.trace().real(); }
  cplx operator()(std::size_t m, std::size_t n) const { return matrix_(m, n); }

  // Zero-pads to a larger Fock cutoff; cropping is never implicit.
  DensityMatrix embedded(std::size_t new_dim) const {
    if (new_dim < dim()) throw InvalidArgument("DensityMatrix::embedded: cannot shrink");
    ComplexMatrix m = ComplexMatrix::Zero(new_dim, new_dim);
    m.topLeftCorner(dim(), dim()) = matrix_;
    return DensityMatrix(std::move(m));
  }

  // Throws PositivityError when the minimum eigenvalue is below -1e-10.
  void validate() const;

 private:
  ComplexMatrix matrix_;
  double trace_deficit_ = 0.0;
};

// Phase-invariant (Fock-diagonal) state.
class DiagonalState {
 public:
  DiagonalState() : probs_{1.0} {}

  // Negative entries down to -1e-14 are clamped to zero. When `deficit` is
  // negative it is derived as 1 - sum(probs).
  explicit DiagonalState(std::vector<double> probs, double deficit = -1.0)
      : probs_(std::move(probs)) {
    if (probs_.empty()) throw InvalidDimension("DiagonalState: empty probability vector");
    for (double& p : probs_) {
      if (!std::isfinite(p)) throw InvalidArgument("DiagonalState: non-finite probability");
      if (p < -1e-14) throw PositivityError("DiagonalState: negative probability", p);
      p = std::max(p, 0.0);
    }
    const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
    if (total > 1.0 + 1e-10) throw InvalidArgument("DiagonalState: total probability exceeds 1");
    trace_deficit_ = deficit >= 0.0 ? deficit : std::max(0.0, 1.0 - total);
  }

  std::size_t cutoff() const { return probs_.size(); }
  const std::vector<double>& probs() const { return probs_; }
  double trace_deficit() const { return trace_deficit_; }
  double total() const { return std::accumulate(probs_.begin(), probs_.end(), 0.0); }

  DensityMatrix to_density() const {
    ComplexMatrix m = ComplexMatrix::Zero(cutoff(), cutoff());
    for (std::size_t n = 0; n < cutoff(); ++n) m(n, n) = probs_[n];
    return DensityMatrix(std::move(m));
  }

 private:
  std::vector<double> probs_;
  double trace_deficit_ = 0.0;
};

struct LadderOperator {
  std::size_t cutoff;
  ComplexMatrix matrix;  // <n-1|a|n> = sqrt(n)

  ComplexMatrix number() const { return matrix.adjoint() * matrix; }
};

inline LadderOperator ladder(std::size_t cutoff) {
  if (cutoff < 2) throw InvalidDimension("ladder: cutoff must be >= 2");
  ComplexMatrix a = ComplexMatrix::Zero(cutoff, cutoff);
  for (std::size_t n = 1; n < cutoff; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return {cutoff, std::move(a)};
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b,
                          std::size_t max_dim = kMaxJointDim) {
  const std::size_t rows = static_cast<std::size_t>(a.rows() * b.rows());
  const std::size_t cols = static_cast<std::size_t>(a.cols() * b.cols());
  if (rows > max_dim || cols > max_dim) {
    throw ResourceError("kron: joint dimension " + std::to_string(std::max(rows, cols)) +
                        " exceeds maximum " + std::to_string(max_dim));
  }
  ComplexMatrix out(rows, cols);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b,
                            std::size_t max_dim = kMaxJointDim) {
  return DensityMatrix(kron(a.matrix(), b.matrix(), max_dim));
}

enum class Subsystem { A, B };

inline ComplexMatrix partial_trace(const ComplexMatrix& rho_ab, std::size_t dim_a,
                                   std::size_t dim_b, Subsystem keep) {
  if (dim_a == 0 || dim_b == 0 || rho_ab.rows() != rho_ab.cols() ||
      static_cast<std::size_t>(rho_ab.rows()) != dim_a * dim_b) {
    throw InvalidArgument("partial_trace: dim_a * dim_b = " + std::to_string(dim_a * dim_b) +
                          " does not match matrix dimension " + std::to_string(rho_ab.rows()));
  }
  const auto da = static_cast<Eigen::Index>(dim_a);
  const auto db = static_cast<Eigen::Index>(dim_b);
  if (keep == Subsystem::A) {
    ComplexMatrix out = ComplexMatrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
      for (Eigen::Index j = 0; j < da; ++j) {
        cplx acc = 0.0;
        for (Eigen::Index k = 0; k < db; ++k) acc += rho_ab(i * db + k, j * db + k);
        out(i, j) = acc;
      }
    return out;
  }
  ComplexMatrix out = ComplexMatrix::Zero(db, db);
  for (Eigen::Index i = 0; i < db; ++i)
    for (Eigen::Index j = 0; j < db; ++j) {
      cplx acc = 0.0;
      for (Eigen::Index k = 0; k < da; ++k) acc += rho_ab(k * db + i, k * db + j);
      out(i, j) = acc;
    }
  return out;
}

inline DensityMatrix partial_trace(const DensityMatrix& rho_ab, std::size_t dim_a,
                                   std::size_t dim_b, Subsystem keep) {
  return DensityMatrix(partial_trace(rho_ab.matrix(), dim_a, dim_b, keep));
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi eigensolver for complex Hermitian matrices.
//
// Each rotation first removes the phase of the pivot a_pq with a diagonal
// unitary, then applies the real symmetric Jacobi rotation.

struct JacobiOptions {
  int max_sweeps = 100;
  double off_tolerance = 1e-13;  // relative to the Frobenius norm
};

struct HermitianEigen {
  std::vector<double> values;  // descending
  ComplexMatrix vectors;       // columns match `values`; empty if not requested
  int sweeps = 0;
  double off_norm = 0.0;
};

namespace detail {

inline double off_diagonal_norm(const ComplexMatrix& a) {
  double s = 0.0;
  const Eigen::Index n = a.rows();
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index p = 0; p < n; ++p)
      if (p != q) s += std::norm(a(p, q));
  return std::sqrt(s);
}

inline HermitianEigen jacobi_eigen(ComplexMatrix a, bool with_vectors, const JacobiOptions& opt) {
  const Eigen::Index n = a.rows();
  ComplexMatrix v;
  if (with_vectors) v = ComplexMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = a(i, i).real();

  const double frob = a.norm();
  HermitianEigen out;
  if (frob == 0.0 || n == 1) {
    out.values.assign(static_cast<std::size_t>(n), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) out.values[static_cast<std::size_t>(i)] = a(i, i).real();
    if (with_vectors) out.vectors = v;
    return out;
  }
  const double target = opt.off_tolerance * frob;
  const double skip = 0.5 * target / static_cast<double>(n);

  cplx* data = a.data();
  auto col = [&](Eigen::Index j) { return data + j * n; };

  int sweep = 0;
  double off = off_diagonal_norm(a);
  while (off > target) {
    if (sweep >= opt.max_sweeps) {
      throw NumericalError("hermitian_spectrum: Jacobi did not converge in " +
                               std::to_string(opt.max_sweeps) + " sweeps",
                           off);
    }
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const cplx apq = col(q)[p];
        const double g = std::abs(apq);
        if (g <= skip) continue;
        const cplx phase_conj = std::conj(apq) / g;  // e^{-i arg a_pq}
        const double app = col(p)[p].real();
        const double aqq = col(q)[q].real();
        const double theta = (aqq - app) / (2.0 * g);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        cplx* cp = col(p);
        cplx* cq = col(q);
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const cplx x = cp[r];
          const cplx y = cq[r] * phase_conj;
          cp[r] = c * x - s * y;
          cq[r] = s * x + c * y;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          col(r)[p] = std::conj(cp[r]);
          col(r)[q] = std::conj(cq[r]);
        }
        cp[p] = app - t * g;
        cq[q] = aqq + t * g;
        cp[q] = 0.0;
        cq[p] = 0.0;

        if (with_vectors) {
          cplx* vp = v.data() + p * n;
          cplx* vq = v.data() + q * n;
          for (Eigen::Index r = 0; r < n; ++r) {
            const cplx x = vp[r];
            const cplx y = vq[r] * phase_conj;
            vp[r] = c * x - s * y;
            vq[r] = s * x + c * y;
          }
        }
      }
    }
    ++sweep;
    off = off_diagonal_norm(a);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return a(i, i).real() > a(j, j).real();
  });
  out.values.resize(static_cast<std::size_t>(n));
  if (with_vectors) out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[static_cast<std::size_t>(k)] = a(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(k)]).real();
    if (with_vectors) out.vectors.col(k) = v.col(order[static_cast<std::size_t>(k)]);
  }
  out.sweeps = sweep;
  out.off_norm = off;
  return out;
}

inline void require_hermitian(const ComplexMatrix& m, const char* who) {
  require_square(m, who);
  const double defect = hermiticity_defect(m);
  if (defect > 1e-10 * std::max(1.0, max_abs(m))) {
    throw InvalidArgument(std::string(who) + ": input is not Hermitian (defect " +
                          std::to_string(defect) + ")");
  }
}

}  // namespace detail

inline HermitianEigen hermitian_eigen(const ComplexMatrix& m, const JacobiOptions& opt = {}) {
  detail::require_hermitian(m, "hermitian_eigen");
  return detail::jacobi_eigen(m, true, opt);
}

// Real eigenvalues in descending order.
inline std::vector<double> hermitian_spectrum(const ComplexMatrix& m, const JacobiOptions& opt = {}) {
  detail::require_hermitian(m, "hermitian_spectrum");
  return detail::jacobi_eigen(m, false, opt).values;
}

inline void DensityMatrix::validate() const {
  const auto spec = hermitian_spectrum(matrix_);
  const double lo = spec.back();
  if (lo < -kNegativeEigenvalueTol) {
    throw PositivityError("DensityMatrix: negative eigenvalue " + std::to_string(lo), lo);
  }
}

}  // namespace cmoe
