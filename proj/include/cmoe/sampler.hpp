#pragma once

// Seeded random states and the adversarial local search.
//
// RNG: xoshiro256** seeded through splitmix64. Trial substreams use the seed
// XOR splitmix64(trial index), so a trial's draws do not depend on which
// worker runs it or in what order.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "cmoe/cmoe_bounds.hpp"
#include "cmoe/entropy_norms.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/fock_linalg.hpp"
#include "cmoe/matrix_exp.hpp"

namespace cmoe {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      s = splitmix64(x);
      x += 0x9e3779b97f4a7c15ULL;
    }
  }

  static Rng substream(std::uint64_t seed, std::uint64_t trial) { return Rng(seed ^ splitmix64(trial)); }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi].
  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(uniform() * static_cast<double>(hi - lo + 1));
  }

  // Standard normal by Box-Muller; the second variate is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Standard complex Gaussian, E|w|^2 = 1.
  cplx complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re * std::numbers::sqrt2 / 2.0, im * std::numbers::sqrt2 / 2.0};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline ComplexMatrix ginibre(Rng& rng, std::size_t rows, std::size_t cols) {
  ComplexMatrix g(rows, cols);
  // Column-major fill order is part of the reproducibility contract.
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.complex_normal();
  return g;
}

// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases
// moved into Q.
inline ComplexMatrix haar_unitary(Rng& rng, std::size_t n) {
  const ComplexMatrix g = ginibre(rng, n, n);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(g.rows(), g.cols());
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

inline DensityMatrix random_pure(Rng& rng, std::size_t cutoff) {
  if (cutoff < 1) throw InvalidDimension("random_pure: cutoff must be >= 1");
  ComplexVector psi = ginibre(rng, cutoff, 1).col(0);
  psi /= psi.norm();
  return DensityMatrix::pure(psi);
}

inline DensityMatrix random_mixed(Rng& rng, std::size_t cutoff, std::size_t rank) {
  if (rank < 1 || rank > cutoff) throw InvalidArgument("random_mixed: rank must lie in [1, cutoff]");
  const ComplexMatrix g = ginibre(rng, cutoff, rank);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

// Fock-diagonal state with probabilities uniform on the simplex.
inline DiagonalState random_diagonal(Rng& rng, std::size_t cutoff) {
  if (cutoff < 1) throw InvalidDimension("random_diagonal: cutoff must be >= 1");
  std::vector<double> p(cutoff);
  double total = 0.0;
  for (double& x : p) {
    x = -std::log(1.0 - rng.uniform());
    total += x;
  }
  for (double& x : p) x /= total;
  return DiagonalState(std::move(p), 0.0);
}

// V diag(values) V^+.
inline DensityMatrix from_eigensystem(const ComplexMatrix& v, const std::vector<double>& values) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) d[static_cast<Eigen::Index>(i)] = values[i];
  return DensityMatrix(v * d.asDiagonal() * v.adjoint());
}

namespace detail {

inline double shannon_entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p)
    if (x >= 1e-300) h -= x * std::log(x);
  return h;
}

// Mixes a probability vector toward uniform, (1 - t) p + t/d, with t chosen by
// bisection so the entropy hits `target`. Requires H(p) <= target <= ln d.
inline std::vector<double> mix_to_entropy(const std::vector<double>& p, double target, double tol = 1e-10) {
  const auto d = static_cast<double>(p.size());
  auto mixed = [&](double t) {
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = (1.0 - t) * p[i] + t / d;
    return out;
  };
  double lo = 0.0, hi = 1.0;
  std::vector<double> best = mixed(0.0);
  for (int it = 0; it < 200; ++it) {
    const double t = 0.5 * (lo + hi);
    best = mixed(t);
    const double h = shannon_entropy(best);
    if (std::abs(h - target) <= tol) break;
    (h < target ? lo : hi) = t;
  }
  return best;
}

// Sharpens a probability vector with the power family p^beta / Z, beta >= 1,
// bisecting on beta until the entropy hits `target` < H(p).
inline std::vector<double> sharpen_to_entropy(const std::vector<double>& p, double target, double tol = 1e-10) {
  const double top = *std::max_element(p.begin(), p.end());
  auto powered = [&](double beta) {
    std::vector<double> out(p.size());
    double z = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      out[i] = p[i] > 0.0 ? std::pow(p[i] / top, beta) : 0.0;
      z += out[i];
    }
    for (double& x : out) x /= z;
    return out;
  };
  double lo = 1.0, hi = 2.0;
  while (shannon_entropy(powered(hi)) > target && hi < 1e6) {
    lo = hi;
    hi *= 2.0;
  }
  std::vector<double> best = powered(hi);
  for (int it = 0; it < 200; ++it) {
    const double beta = 0.5 * (lo + hi);
    best = powered(beta);
    const double h = shannon_entropy(best);
    if (std::abs(h - target) <= tol) break;
    (h > target ? lo : hi) = beta;
  }
  return best;
}

// Moves a spectrum to entropy `target` with whichever family applies.
inline std::vector<double> pin_spectrum(const std::vector<double>& p, double target, double tol = 1e-10) {
  const double h = shannon_entropy(p);
  if (std::abs(h - target) <= tol) return p;
  return h < target ? mix_to_entropy(p, target, tol) : sharpen_to_entropy(p, target, tol);
}

}  // namespace detail

struct PinnedState {
  DensityMatrix state;
  int retries = 0;
};

// Draws a Ginibre state of random rank, mixes it toward I/d until its entropy
// equals `target`, then conjugates by a Haar unitary. A draw whose entropy is
// already above the target is discarded and redrawn at half the rank.
inline PinnedState entropy_pinned_state(Rng& rng, std::size_t cutoff, double target) {
  if (cutoff < 1) throw InvalidDimension("entropy_pinned_state: cutoff must be >= 1");
  const double s_max = std::log(static_cast<double>(cutoff));
  if (!(target >= 0.0) || target > s_max + 1e-12) {
    throw DomainError("entropy_pinned_state: target " + std::to_string(target) + " outside [0, ln cutoff]");
  }
  if (target >= s_max - 1e-12) {
    return {DensityMatrix(ComplexMatrix::Identity(cutoff, cutoff) / static_cast<double>(cutoff)), 0};
  }
  if (target == 0.0) return {random_pure(rng, cutoff), 0};
  std::size_t rank = rng.uniform_int(1, cutoff);
  for (int retry = 0; retry <= 100; ++retry) {
    const DensityMatrix draw = random_mixed(rng, cutoff, rank);
    const auto eig = hermitian_eigen(draw.matrix());
    std::vector<double> mu = eig.values;
    double total = 0.0;
    for (double& x : mu) total += (x = std::max(x, 0.0));
    for (double& x : mu) x /= total;
    if (detail::shannon_entropy(mu) > target) {
      rank = std::max<std::size_t>(1, rank / 2);
      continue;
    }
    const auto pinned = detail::mix_to_entropy(mu, target);
    const ComplexMatrix u = haar_unitary(rng, cutoff);
    return {from_eigensystem(u * eig.vectors, pinned), retry};
  }
  throw NumericalError("entropy_pinned_state: no admissible draw after 100 retries", target);
}

enum class SampleKind { Pure, GinibreMixed, RandomDiagonal, EntropyPinned };

inline const char* to_string(SampleKind k) {
  switch (k) {
    case SampleKind::Pure: return "pure";
    case SampleKind::GinibreMixed: return "mixed";
    case SampleKind::RandomDiagonal: return "diagonal";
    case SampleKind::EntropyPinned: return "pinned";
  }
  return "?";
}

struct SamplerConfig {
  std::uint64_t seed = 0;
  std::size_t cutoff = 16;
  SampleKind kind = SampleKind::GinibreMixed;
  std::size_t rank = 0;         // GinibreMixed; 0 means full rank
  double target_entropy = 0.0;  // EntropyPinned

  void validate() const {
    if (cutoff < 1) throw InvalidDimension("SamplerConfig: cutoff must be >= 1");
    if (rank > cutoff) throw InvalidArgument("SamplerConfig: rank exceeds cutoff");
    if (kind == SampleKind::EntropyPinned && target_entropy > std::log(static_cast<double>(cutoff)) + 1e-12) {
      throw DomainError("SamplerConfig: target entropy exceeds ln(cutoff)");
    }
  }
};

inline DensityMatrix sample_state(const SamplerConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  switch (cfg.kind) {
    case SampleKind::Pure: return random_pure(rng, cfg.cutoff);
    case SampleKind::GinibreMixed: return random_mixed(rng, cfg.cutoff, cfg.rank == 0 ? cfg.cutoff : cfg.rank);
    case SampleKind::RandomDiagonal: return random_diagonal(rng, cfg.cutoff).to_density();
    case SampleKind::EntropyPinned: return entropy_pinned_state(rng, cfg.cutoff, cfg.target_entropy).state;
  }
  throw InvalidArgument("sample_state: unknown kind");
}

// ---------------------------------------------------------------------------

struct SearchOptions {
  std::size_t iterations = 200;
  double step = 0.05;          // unitary perturbation angle (radians)
  double decay = 0.95;         // applied after every `decay_every` rejections
  std::size_t decay_every = 50;
  double spectrum_step = 0.05; // log-scale jitter of the eigenvalues
  ChannelOptions channel;
};

struct SearchResult {
  CmoeReport best;
  DensityMatrix best_state;
  CmoeReport initial;
  std::size_t accepted = 0;
  double final_step = 0.0;
  double max_pin_error = 0.0;  // max |S(proposal) - target| over proposals
  std::vector<double> gap_trace;  // best gap after each iteration
};

// Greedy local search at (approximately) fixed input entropy: each proposal
// jitters the spectrum, re-pins it to the target entropy and conjugates by a
// small random unitary. A proposal is kept iff the output entropy drops.
inline SearchResult adversarial_search(const ChannelSpec& spec, const DensityMatrix& start, Rng& rng,
                                       const SearchOptions& opt = {}) {
  spec.validate();
  const std::size_t d = start.dim();
  const double target = von_neumann_entropy(start);

  SearchResult res;
  res.best_state = start;
  res.best = check_cmoe(spec, start, opt.channel);
  res.initial = res.best;
  auto current = hermitian_eigen(start.matrix());
  double step = opt.step;
  std::size_t rejections = 0;

  for (std::size_t it = 0; it < opt.iterations; ++it) {
    std::vector<double> mu = current.values;
    double total = 0.0;
    for (double& x : mu) {
      x = std::max(x, 0.0) * std::exp(opt.spectrum_step * rng.normal());
      total += x;
    }
    for (double& x : mu) x /= total;
    mu = detail::pin_spectrum(mu, target);

    ComplexMatrix h = ginibre(rng, d, d);
    h = (h + h.adjoint()).eval() * 0.5;
    h /= std::max(h.norm(), 1e-300);
    const ComplexMatrix w = expm_taylor((cplx(0.0, step) * h).eval());
    const DensityMatrix proposal = from_eigensystem(w * current.vectors, mu);

    const auto report = check_cmoe(spec, proposal, opt.channel);
    res.max_pin_error = std::max(res.max_pin_error, std::abs(report.input_entropy - target));
    if (report.verdict && report.output_entropy < res.best.output_entropy) {
      res.best = report;
      res.best_state = proposal;
      current = hermitian_eigen(proposal.matrix());
      ++res.accepted;
    } else if (++rejections % opt.decay_every == 0) {
      step *= opt.decay;
    }
    res.gap_trace.push_back(res.best.gap);
  }
  res.final_step = step;
  return res;
}

inline SearchResult adversarial_search(const ChannelSpec& spec, double target, std::size_t cutoff, Rng& rng,
                                       const SearchOptions& opt = {}) {
  return adversarial_search(spec, entropy_pinned_state(rng, cutoff, target).state, rng, opt);
}

}  // namespace cmoe
