#pragma once

// Two-mode dilation unitaries of the one-mode channels.
//
//   beamsplitter  U_lambda = exp((a^+ b - a b^+) arccos sqrt(lambda))
//   squeezer      U_kappa  = exp((a^+ b^+ - a b) arccosh sqrt(kappa))
//
// The beamsplitter generator conserves m + n and the squeezer generator
// conserves m - n, so both unitaries are block diagonal over those invariants.
// Each block is exponentiated on its own. Both generators are real, so the
// blocks are real orthogonal matrices.
//
// Truncation: the generator of a block is built on a padded Fock box
// (d_sys + pad) x (d_env + pad) and only the retained rows and columns
// (m < d_sys, n < d_env) are kept. Beamsplitter blocks that fit in the box
// are exact. Squeezer chains are infinite; the padding keeps the reflection
// at the artificial boundary away from the retained region, and whatever
// amplitude leaves the retained rows is reported as column leakage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cmoe/errors.hpp"
#include "cmoe/fock_linalg.hpp"
#include "cmoe/matrix_exp.hpp"

namespace cmoe {

enum class DilationKind { Beamsplitter, TwoModeSqueezer };

struct DilationDims {
  std::size_t d_sys = 2;   // retained system cutoff
  std::size_t d_env = 2;   // retained environment cutoff
  std::size_t in_sys = 0;  // blocks are only built if they touch m < in_sys, n < in_env
  std::size_t in_env = 0;  // (0 means "all retained")
  std::size_t pad = 0;     // extra Fock levels per mode used only while exponentiating
};

class DilationUnitary {
 public:
  struct Block {
    std::vector<std::pair<int, int>> states;  // retained (m, n), chain order
    RealMatrix u;                             // retained x retained
  };

  DilationUnitary(DilationKind kind, double parameter, const DilationDims& dims)
      : kind_(kind), parameter_(parameter), dims_(dims) {
    if (dims_.d_sys < 2 || dims_.d_env < 2) throw InvalidDimension("dilation: dimensions must be >= 2");
    if (dims_.in_sys == 0) dims_.in_sys = dims_.d_sys;
    if (dims_.in_env == 0) dims_.in_env = dims_.d_env;
    if (dims_.in_sys > dims_.d_sys || dims_.in_env > dims_.d_env) {
      throw InvalidDimension("dilation: input box exceeds retained box");
    }
    const std::size_t padded = (dims_.d_sys + dims_.pad) * (dims_.d_env + dims_.pad);
    if (padded > 64 * kMaxJointDim) throw ResourceError("dilation: padded joint dimension too large");
    lookup_.assign(dims_.d_sys * dims_.d_env, {-1, -1});
    build();
  }

  DilationKind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  const DilationDims& dims() const { return dims_; }
  std::size_t d_sys() const { return dims_.d_sys; }
  std::size_t d_env() const { return dims_.d_env; }
  const std::vector<Block>& blocks() const { return blocks_; }

  // Block index and position of a retained basis state, or {-1, -1} when
  // the state lies in a block that was not built.
  std::pair<int, int> locate(std::size_t m, std::size_t n) const {
    if (m >= dims_.d_sys || n >= dims_.d_env) return {-1, -1};
    return lookup_[m * dims_.d_env + n];
  }

  // <m', n'| U |m, n> on the retained box.
  double element(std::size_t mo, std::size_t no, std::size_t mi, std::size_t ni) const {
    const auto [bi, ci] = locate(mi, ni);
    const auto [bo, ro] = locate(mo, no);
    if (bi < 0 || bo != bi) return 0.0;
    return blocks_[static_cast<std::size_t>(bi)].u(ro, ci);
  }

  // 1 - ||P U|m,n>||^2 with P the projector on the retained box.
  double column_leakage(std::size_t m, std::size_t n) const {
    const auto [b, c] = locate(m, n);
    if (b < 0) throw InvalidArgument("column_leakage: state outside the built blocks");
    return 1.0 - blocks_[static_cast<std::size_t>(b)].u.col(c).squaredNorm();
  }

  // max |U_r^T U_r - I| over the built retained blocks.
  double unitarity_defect() const {
    double worst = 0.0;
    for (const auto& b : blocks_) {
      const RealMatrix gram = b.u.transpose() * b.u;
      worst = std::max(worst, (gram - RealMatrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff());
    }
    return worst;
  }

  // Dense joint matrix in system-major order (m * d_env + n).
  ComplexMatrix to_dense(std::size_t max_dim = kMaxJointDim) const {
    const std::size_t dim = dims_.d_sys * dims_.d_env;
    if (dim > max_dim) throw ResourceError("dilation: dense joint dimension " + std::to_string(dim) + " too large");
    ComplexMatrix out = ComplexMatrix::Zero(dim, dim);
    for (const auto& b : blocks_) {
      for (std::size_t i = 0; i < b.states.size(); ++i)
        for (std::size_t j = 0; j < b.states.size(); ++j) {
          const auto [mo, no] = b.states[i];
          const auto [mi, ni] = b.states[j];
          out(mo * dims_.d_env + no, mi * dims_.d_env + ni) = b.u(i, j);
        }
    }
    return out;
  }

 private:
  void build() {
    const int dsp = static_cast<int>(dims_.d_sys + dims_.pad);
    const int dep = static_cast<int>(dims_.d_env + dims_.pad);
    const int in_s = static_cast<int>(dims_.in_sys);
    const int in_e = static_cast<int>(dims_.in_env);

    if (kind_ == DilationKind::Beamsplitter) {
      if (!(parameter_ >= 0.0 && parameter_ <= 1.0)) throw DomainError("beamsplitter: lambda must lie in [0, 1]");
      const double theta = std::acos(std::sqrt(parameter_));
      for (int total = 0; total <= in_s + in_e - 2; ++total) {
        std::vector<std::pair<int, int>> chain;
        for (int m = std::max(0, total - (dep - 1)); m <= std::min(total, dsp - 1); ++m) chain.emplace_back(m, total - m);
        const auto k = static_cast<Eigen::Index>(chain.size());
        RealMatrix gen = RealMatrix::Zero(k, k);
        for (Eigen::Index j = 0; j < k; ++j) {
          const auto [m, n] = chain[static_cast<std::size_t>(j)];
          // a^+ b |m,n> = sqrt((m+1) n) |m+1,n-1>;  a b^+ |m,n> = sqrt(m (n+1)) |m-1,n+1>
          if (j + 1 < k) gen(j + 1, j) += theta * std::sqrt(static_cast<double>(m + 1) * n);
          if (j > 0) gen(j - 1, j) -= theta * std::sqrt(static_cast<double>(m) * (n + 1));
        }
        add_block(chain, gen);
      }
    } else {
      if (!(parameter_ >= 1.0) || !std::isfinite(parameter_)) throw DomainError("squeezer: kappa must be >= 1");
      const double r = std::acosh(std::sqrt(parameter_));
      for (int diff = -(in_e - 1); diff <= in_s - 1; ++diff) {
        const int m0 = std::max(diff, 0);
        const int n0 = std::max(-diff, 0);
        std::vector<std::pair<int, int>> chain;
        for (int t = 0; m0 + t < dsp && n0 + t < dep; ++t) chain.emplace_back(m0 + t, n0 + t);
        const auto k = static_cast<Eigen::Index>(chain.size());
        RealMatrix gen = RealMatrix::Zero(k, k);
        for (Eigen::Index j = 0; j < k; ++j) {
          const auto [m, n] = chain[static_cast<std::size_t>(j)];
          // a^+ b^+ |m,n> = sqrt((m+1)(n+1)) |m+1,n+1>;  a b |m,n> = sqrt(m n) |m-1,n-1>
          if (j + 1 < k) gen(j + 1, j) += r * std::sqrt(static_cast<double>(m + 1) * (n + 1));
          if (j > 0) gen(j - 1, j) -= r * std::sqrt(static_cast<double>(m) * n);
        }
        add_block(chain, gen);
      }
    }
  }

  void add_block(const std::vector<std::pair<int, int>>& chain, const RealMatrix& gen) {
    const RealMatrix full = expm_taylor(gen);
    std::vector<Eigen::Index> keep;
    Block block;
    for (std::size_t i = 0; i < chain.size(); ++i) {
      const auto [m, n] = chain[i];
      if (static_cast<std::size_t>(m) < dims_.d_sys && static_cast<std::size_t>(n) < dims_.d_env) {
        keep.push_back(static_cast<Eigen::Index>(i));
        block.states.push_back(chain[i]);
      }
    }
    if (keep.empty()) return;
    const auto k = static_cast<Eigen::Index>(keep.size());
    block.u.resize(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) block.u(i, j) = full(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    const int id = static_cast<int>(blocks_.size());
    for (std::size_t i = 0; i < block.states.size(); ++i) {
      const auto [m, n] = block.states[i];
      lookup_[static_cast<std::size_t>(m) * dims_.d_env + static_cast<std::size_t>(n)] = {id, static_cast<int>(i)};
    }
    blocks_.push_back(std::move(block));
  }

  DilationKind kind_;
  double parameter_;
  DilationDims dims_;
  std::vector<Block> blocks_;
  std::vector<std::pair<int, int>> lookup_;
};

inline DilationUnitary beamsplitter_unitary(double lambda, std::size_t d_sys, std::size_t d_env) {
  return DilationUnitary(DilationKind::Beamsplitter, lambda, {d_sys, d_env, 0, 0, 0});
}

inline DilationUnitary squeezer_unitary(double kappa, std::size_t d_sys, std::size_t d_env, std::size_t pad = 0) {
  return DilationUnitary(DilationKind::TwoModeSqueezer, kappa, {d_sys, d_env, 0, 0, pad});
}

// Dense truncated generators built from ladder operators; used as the
// independent reference for the block construction.
inline ComplexMatrix beamsplitter_generator(double lambda, std::size_t d_sys, std::size_t d_env) {
  const auto a = ladder(d_sys).matrix;
  const auto b = ladder(d_env).matrix;
  const ComplexMatrix gen = kron(a.adjoint(), b) - kron(a, b.adjoint());
  return gen * std::acos(std::sqrt(lambda));
}

inline ComplexMatrix squeezer_generator(double kappa, std::size_t d_sys, std::size_t d_env) {
  const auto a = ladder(d_sys).matrix;
  const auto b = ladder(d_env).matrix;
  const ComplexMatrix gen = kron(a.adjoint(), b.adjoint()) - kron(a, b);
  return gen * std::acosh(std::sqrt(kappa));
}

}  // namespace cmoe
