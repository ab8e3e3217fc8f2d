#pragma once

// One-mode phase-covariant and phase-contravariant Gaussian channels.
//
// Every channel is realised through its Stinespring dilation
//   Phi(rho) = Tr_X[ U (rho (x) omega_E) U^+ ]
// with X = environment (attenuator, amplifier) or X = system (weak
// complementary of the amplifier). Two routes are provided:
//
//   * apply_channel_dense: forms the joint state, conjugates by the dense
//     dilation unitary and takes the partial trace. Small dimensions only.
//   * apply_channel: the same contraction organised block by block. Because
//     U conserves m+n (beamsplitter) or m-n (squeezer), the image of
//     |m><m'| only populates one diagonal of the output, so the channel is
//     stored as a sparse "ChannelMap" and cached.
//
// The additive-noise channel is always the composition A_{E+1} o E_{1/(E+1)}.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "cmoe/dilation.hpp"
#include "cmoe/errors.hpp"
#include "cmoe/fock_linalg.hpp"
#include "cmoe/gaussian_states.hpp"

namespace cmoe {

enum class ChannelKind { Attenuator, Amplifier, AdditiveNoise, ContravariantAmplifier };

inline const char* to_string(ChannelKind k) {
  switch (k) {
    case ChannelKind::Attenuator: return "attenuator";
    case ChannelKind::Amplifier: return "amplifier";
    case ChannelKind::AdditiveNoise: return "additive_noise";
    case ChannelKind::ContravariantAmplifier: return "contravariant";
  }
  return "?";
}

inline ChannelKind channel_kind_from_string(const std::string& s) {
  if (s == "attenuator") return ChannelKind::Attenuator;
  if (s == "amplifier") return ChannelKind::Amplifier;
  if (s == "additive_noise") return ChannelKind::AdditiveNoise;
  if (s == "contravariant") return ChannelKind::ContravariantAmplifier;
  throw InvalidArgument("unknown channel kind '" + s + "'");
}

struct ChannelSpec {
  ChannelKind kind = ChannelKind::Attenuator;
  std::optional<double> transmissivity;  // attenuator only
  std::optional<double> gain;            // amplifier / contravariant only
  double env_energy = 0.0;

  static ChannelSpec attenuator(double lambda, double energy = 0.0) {
    ChannelSpec s{ChannelKind::Attenuator, lambda, std::nullopt, energy};
    s.validate();
    return s;
  }
  static ChannelSpec amplifier(double kappa, double energy = 0.0) {
    ChannelSpec s{ChannelKind::Amplifier, std::nullopt, kappa, energy};
    s.validate();
    return s;
  }
  static ChannelSpec additive_noise(double energy) {
    ChannelSpec s{ChannelKind::AdditiveNoise, std::nullopt, std::nullopt, energy};
    s.validate();
    return s;
  }
  static ChannelSpec contravariant(double kappa, double energy = 0.0) {
    ChannelSpec s{ChannelKind::ContravariantAmplifier, std::nullopt, kappa, energy};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(env_energy >= 0.0) || !std::isfinite(env_energy)) throw DomainError("ChannelSpec: env_energy must be >= 0");
    const bool wants_lambda = kind == ChannelKind::Attenuator;
    const bool wants_kappa = kind == ChannelKind::Amplifier || kind == ChannelKind::ContravariantAmplifier;
    if (wants_lambda != transmissivity.has_value() || wants_kappa != gain.has_value()) {
      throw InvalidArgument(std::string("ChannelSpec: parameters do not match kind ") + to_string(kind));
    }
    if (transmissivity && !(*transmissivity >= 0.0 && *transmissivity <= 1.0)) {
      throw DomainError("ChannelSpec: transmissivity must lie in [0, 1]");
    }
    if (gain && (!(*gain >= 1.0) || !std::isfinite(*gain))) throw DomainError("ChannelSpec: gain must be >= 1");
  }

  std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind);
    if (transmissivity) os << " lambda=" << *transmissivity;
    if (gain) os << " kappa=" << *gain;
    os << " E=" << env_energy;
    return os.str();
  }
};

// Mean photon number of the output for an input of mean photon number n.
// On thermal inputs these are the thermal transformation laws.
inline double thermal_output_energy(const ChannelSpec& spec, double n) {
  spec.validate();
  const double e = spec.env_energy;
  switch (spec.kind) {
    case ChannelKind::Attenuator: return *spec.transmissivity * n + (1.0 - *spec.transmissivity) * e;
    case ChannelKind::Amplifier: return *spec.gain * n + (*spec.gain - 1.0) * (e + 1.0);
    case ChannelKind::AdditiveNoise: return n + e;
    case ChannelKind::ContravariantAmplifier: return (*spec.gain - 1.0) * (n + 1.0) + *spec.gain * e;
  }
  return 0.0;
}

struct DecompositionParams {
  double lambda_prime = 1.0;   // E_{lambda,E} = A_{kappa'} o E_{lambda'}
  double kappa_prime = 1.0;
  double lambda_dprime = 1.0;  // A_{kappa,E} = A_{kappa''} o E_{lambda''}
  double kappa_dprime = 1.0;
};

inline DecompositionParams decompose(const ChannelSpec& spec) {
  spec.validate();
  DecompositionParams d;
  const double e = spec.env_energy;
  if (spec.kind == ChannelKind::Attenuator) {
    const double lambda = *spec.transmissivity;
    d.kappa_prime = (1.0 - lambda) * e + 1.0;
    d.lambda_prime = lambda / d.kappa_prime;
  } else if (spec.kind == ChannelKind::Amplifier) {
    const double kappa = *spec.gain;
    const double denom = (1.0 - 1.0 / kappa) * e + 1.0;
    d.lambda_dprime = 1.0 / denom;
    d.kappa_dprime = kappa * denom;
  } else {
    throw InvalidArgument(std::string("decompose: no quantum-limited decomposition formula for ") + to_string(spec.kind));
  }
  return d;
}

// ---------------------------------------------------------------------------

// Sparse phase-(contra)covariant linear map on operators. The image of
// |m><m'| is supported on the output diagonal a - a' = sign * (m - m');
// values[m * d_in + m'][a] is the coefficient of |a><a - sign (m - m')|.
class ChannelMap {
 public:
  ChannelMap(std::size_t d_in, std::size_t d_out, int sign)
      : d_in_(d_in), d_out_(d_out), sign_(sign), values_(d_in * d_in, std::vector<double>(d_out, 0.0)) {}

  std::size_t d_in() const { return d_in_; }
  std::size_t d_out() const { return d_out_; }
  int sign() const { return sign_; }

  double& at(std::size_t m, std::size_t mp, std::size_t a) { return values_[m * d_in_ + mp][a]; }
  double at(std::size_t m, std::size_t mp, std::size_t a) const { return values_[m * d_in_ + mp][a]; }

  // Fock transition probabilities T(a, m) = <a| Phi(|m><m|) |a>.
  double transition(std::size_t a, std::size_t m) const { return values_[m * d_in_ + m][a]; }

  // Applies the map and keeps output rows/cols below `crop`.
  ComplexMatrix apply(const ComplexMatrix& rho, std::size_t crop) const {
    const auto n_in = static_cast<std::size_t>(rho.rows());
    if (n_in > d_in_) throw InvalidArgument("ChannelMap::apply: input larger than map input dimension");
    crop = std::min(crop, d_out_);
    ComplexMatrix out = ComplexMatrix::Zero(crop, crop);
    for (std::size_t m = 0; m < n_in; ++m) {
      for (std::size_t mp = 0; mp < n_in; ++mp) {
        const cplx r = rho(m, mp);
        if (r == cplx(0.0, 0.0)) continue;
        const long shift = sign_ * (static_cast<long>(m) - static_cast<long>(mp));
        const long lo = std::max(0L, shift);
        const long hi = shift < 0 ? static_cast<long>(crop) + shift : static_cast<long>(crop);
        const auto& vals = values_[m * d_in_ + mp];
        for (long a = lo; a < hi; ++a) {
          const double v = vals[static_cast<std::size_t>(a)];
          if (v != 0.0) out(a, a - shift) += v * r;
        }
      }
    }
    return out;
  }

  // Mass of Phi(rho) that lands at output indices >= crop, for a diagonal
  // profile p(m); used to pick the smallest adequate crop.
  double tail_mass(const std::vector<double>& diag, std::size_t crop) const {
    double lost = 0.0;
    for (std::size_t m = 0; m < diag.size(); ++m) {
      if (diag[m] == 0.0) continue;
      const auto& vals = values_[m * d_in_ + m];
      double t = 0.0;
      for (std::size_t a = crop; a < d_out_; ++a) t += vals[a];
      lost += diag[m] * t;
    }
    return lost;
  }

  // 1 - sum_a T(a, m): mass leaving the stored output box.
  double column_leak(std::size_t m) const {
    double s = 0.0;
    for (double v : values_[m * d_in_ + m]) s += v;
    return 1.0 - s;
  }

 private:
  std::size_t d_in_, d_out_;
  int sign_;
  std::vector<std::vector<double>> values_;
};

struct ChannelOptions {
  std::size_t d_out = 0;            // 0: smallest cutoff whose added leak is <= target_deficit
  std::size_t d_env = 0;            // 0: thermal environment cutoff from env_deficit
  std::size_t pad = 40;             // padding used while exponentiating squeezer blocks
  double env_deficit = 1e-13;
  double target_deficit = 1e-10;
  double max_deficit = 0.01;        // outputs above this raise TruncationError
  std::size_t max_cutoff = 400;
};

namespace detail {

// Elementary (non-composite) channel realised by one dilation.
struct ElementaryChannel {
  DilationKind dilation;
  double parameter;
  double env_energy;
  bool keep_env;  // true for the weak complementary
};

inline ElementaryChannel elementary(const ChannelSpec& spec) {
  switch (spec.kind) {
    case ChannelKind::Attenuator: return {DilationKind::Beamsplitter, *spec.transmissivity, spec.env_energy, false};
    case ChannelKind::Amplifier: return {DilationKind::TwoModeSqueezer, *spec.gain, spec.env_energy, false};
    case ChannelKind::ContravariantAmplifier: return {DilationKind::TwoModeSqueezer, *spec.gain, spec.env_energy, true};
    case ChannelKind::AdditiveNoise: break;
  }
  throw InvalidArgument("elementary: additive noise is a composite channel");
}

inline std::size_t env_cutoff(double energy, const ChannelOptions& opt) {
  if (opt.d_env > 0) return opt.d_env;
  return thermal_cutoff_for(energy, opt.env_deficit, 1);
}

// Builds the channel map with input cutoff d_in, environment cutoff k_env and
// output box d_cap (ignored for the beamsplitter, whose box is exact).
inline std::shared_ptr<const ChannelMap> build_map(const ElementaryChannel& ch, std::size_t d_in, std::size_t k_env,
                                                   std::size_t d_cap, std::size_t pad) {
  const std::vector<double> weights = thermal_state(ch.env_energy, k_env).probs();
  if (ch.dilation == DilationKind::Beamsplitter) {
    // Blocks with m + n <= d_in + k_env - 2 are complete in this box.
    const std::size_t box = std::max<std::size_t>(2, d_in + k_env - 1);
    const DilationUnitary u(DilationKind::Beamsplitter, ch.parameter, {box, box, d_in, k_env, 0});
    auto map = std::make_shared<ChannelMap>(d_in, box, +1);
    // Image of |m,k>: amplitudes indexed by the environment output b.
    std::vector<std::vector<std::pair<int, double>>> col(d_in, std::vector<std::pair<int, double>>(box, {-1, 0.0}));
    for (std::size_t k = 0; k < k_env; ++k) {
      for (std::size_t m = 0; m < d_in; ++m) {
        auto& c = col[m];
        std::fill(c.begin(), c.end(), std::pair<int, double>{-1, 0.0});
        const auto [bi, ci] = u.locate(m, k);
        const auto& blk = u.blocks()[static_cast<std::size_t>(bi)];
        for (std::size_t r = 0; r < blk.states.size(); ++r) {
          const auto [a, b] = blk.states[r];
          c[static_cast<std::size_t>(b)] = {a, blk.u(static_cast<Eigen::Index>(r), ci)};
        }
      }
      for (std::size_t m = 0; m < d_in; ++m)
        for (std::size_t mp = 0; mp < d_in; ++mp)
          for (std::size_t b = 0; b < box; ++b) {
            const auto [a, x] = col[m][b];
            const auto [ap, y] = col[mp][b];
            if (a < 0 || ap < 0) continue;
            map->at(m, mp, static_cast<std::size_t>(a)) += weights[k] * x * y;
          }
    }
    return map;
  }

  // Squeezer. Retain the kept mode below d_cap and the traced mode wherever
  // the chain can reach while the kept mode is still inside the box.
  const std::size_t d_sys = ch.keep_env ? d_cap + d_in - 1 : d_cap;
  const std::size_t d_env = ch.keep_env ? d_cap : d_cap + k_env - 1;
  DilationDims dims{std::max<std::size_t>(d_sys, std::max<std::size_t>(2, d_in)),
                    std::max<std::size_t>(d_env, std::max<std::size_t>(2, k_env)), d_in, k_env, pad};
  const DilationUnitary u(DilationKind::TwoModeSqueezer, ch.parameter, dims);
  auto map = std::make_shared<ChannelMap>(d_in, d_cap, ch.keep_env ? -1 : +1);
  const std::size_t traced_dim = ch.keep_env ? dims.d_sys : dims.d_env;
  std::vector<std::vector<std::pair<int, double>>> col(d_in,
                                                       std::vector<std::pair<int, double>>(traced_dim, {-1, 0.0}));
  for (std::size_t k = 0; k < k_env; ++k) {
    for (std::size_t m = 0; m < d_in; ++m) {
      auto& c = col[m];
      std::fill(c.begin(), c.end(), std::pair<int, double>{-1, 0.0});
      const auto [bi, ci] = u.locate(m, k);
      const auto& blk = u.blocks()[static_cast<std::size_t>(bi)];
      for (std::size_t r = 0; r < blk.states.size(); ++r) {
        const auto [a, b] = blk.states[r];
        const int kept = ch.keep_env ? b : a;
        const int traced = ch.keep_env ? a : b;
        if (static_cast<std::size_t>(kept) >= d_cap) continue;
        c[static_cast<std::size_t>(traced)] = {kept, blk.u(static_cast<Eigen::Index>(r), ci)};
      }
    }
    for (std::size_t m = 0; m < d_in; ++m)
      for (std::size_t mp = 0; mp < d_in; ++mp)
        for (std::size_t t = 0; t < traced_dim; ++t) {
          const auto [a, x] = col[m][t];
          const auto [ap, y] = col[mp][t];
          if (a < 0 || ap < 0) continue;
          map->at(m, mp, static_cast<std::size_t>(a)) += weights[k] * x * y;
        }
  }
  return map;
}

struct MapKey {
  int dilation;
  double parameter;
  double env_energy;
  bool keep_env;
  std::size_t d_in, k_env, d_cap, pad;
  auto tie() const { return std::tie(dilation, parameter, env_energy, keep_env, d_in, k_env, d_cap, pad); }
  bool operator<(const MapKey& o) const { return tie() < o.tie(); }
};

}  // namespace detail

// Cache of channel maps keyed by channel and box sizes. A miss reserves its
// key and builds outside the lock; concurrent requests for the same key wait
// on the first builder, different keys build in parallel.
class ChannelMapCache {
 public:
  static ChannelMapCache& instance() {
    static ChannelMapCache cache;
    return cache;
  }

  std::shared_ptr<const ChannelMap> get(const detail::ElementaryChannel& ch, std::size_t d_in, std::size_t k_env,
                                        std::size_t d_cap, std::size_t pad) {
    const bool bs = ch.dilation == DilationKind::Beamsplitter;
    const detail::MapKey key{static_cast<int>(ch.dilation), ch.parameter, ch.env_energy, ch.keep_env, d_in, k_env,
                             bs ? 0 : d_cap, bs ? 0 : pad};
    std::promise<std::shared_ptr<const ChannelMap>> promise;
    {
      std::unique_lock lock(mutex_);
      if (auto it = maps_.find(key); it != maps_.end()) {
        auto pending = it->second;
        lock.unlock();
        return pending.get();
      }
      maps_.emplace(key, promise.get_future().share());
    }
    try {
      auto map = detail::build_map(ch, d_in, k_env, d_cap, pad);
      promise.set_value(map);
      return map;
    } catch (...) {
      promise.set_exception(std::current_exception());
      std::unique_lock lock(mutex_);
      maps_.erase(key);
      throw;
    }
  }

  std::size_t size() const {
    std::unique_lock lock(mutex_);
    return maps_.size();
  }

  void clear() {
    std::unique_lock lock(mutex_);
    maps_.clear();
  }

 private:
  mutable std::mutex mutex_;
  std::map<detail::MapKey, std::shared_future<std::shared_ptr<const ChannelMap>>> maps_;
};

namespace detail {

inline std::vector<double> diagonal_of(const ComplexMatrix& rho) {
  std::vector<double> d(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) d[static_cast<std::size_t>(i)] = std::max(0.0, rho(i, i).real());
  return d;
}

struct SizedMap {
  std::shared_ptr<const ChannelMap> map;
  std::size_t crop;
};

// Picks the output box for a given input diagonal. The spec'd starting rule
// is ceil(kappa * d_in) + 20; the box grows by 1.5x until the mass pushed
// beyond it is within target_deficit (or max_cutoff is reached).
inline SizedMap sized_map(const ElementaryChannel& ch, std::size_t d_in, const std::vector<double>& diag,
                          const ChannelOptions& opt) {
  auto& cache = ChannelMapCache::instance();
  const std::size_t k_env = env_cutoff(ch.env_energy, opt);
  if (ch.dilation == DilationKind::Beamsplitter) {
    auto map = cache.get(ch, d_in, k_env, 0, 0);
    return {map, opt.d_out > 0 ? std::min(opt.d_out, map->d_out()) : map->d_out()};
  }
  if (opt.d_out > 0) return {cache.get(ch, d_in, k_env, opt.d_out, opt.pad), opt.d_out};

  const double kappa = ch.parameter;
  const std::size_t reach = ch.keep_env ? std::max(d_in, k_env) : d_in + k_env - 1;
  std::size_t cap = static_cast<std::size_t>(std::ceil(kappa * static_cast<double>(reach))) + 20;
  cap = std::min(cap, opt.max_cutoff);
  for (;;) {
    auto map = cache.get(ch, d_in, k_env, cap, opt.pad);
    // Mass missing from the stored box, minus what the truncated environment
    // already accounts for.
    double leak = 0.0;
    double total = 0.0;
    for (std::size_t m = 0; m < diag.size(); ++m) {
      leak += diag[m] * map->column_leak(m);
      total += diag[m];
    }
    const double env_tail = std::pow(z_of_E(ch.env_energy), static_cast<double>(k_env));
    const double box_leak = std::max(0.0, leak - env_tail * total);
    if (box_leak <= opt.target_deficit || cap >= opt.max_cutoff) {
      const double budget = std::max(opt.target_deficit - box_leak, 0.0);
      std::size_t lo = 1, hi = cap;
      while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (map->tail_mass(diag, mid) <= budget) hi = mid;
        else lo = mid + 1;
      }
      return {map, hi};
    }
    cap = std::min(opt.max_cutoff, static_cast<std::size_t>(std::ceil(1.5 * static_cast<double>(cap))));
  }
}

inline void check_deficit(const DensityMatrix& out, const ChannelOptions& opt, const ChannelSpec& spec) {
  if (out.trace_deficit() > opt.max_deficit) {
    throw TruncationError("apply_channel(" + spec.describe() + "): output cutoff " + std::to_string(out.dim()) +
                              " loses too much mass",
                          out.trace_deficit());
  }
}

}  // namespace detail

inline DensityMatrix apply_channel(const ChannelSpec& spec, const DensityMatrix& rho, const ChannelOptions& opt = {}) {
  spec.validate();
  if (spec.kind == ChannelKind::AdditiveNoise) {
    const double e = spec.env_energy;
    ChannelOptions first = opt;
    first.d_out = 0;
    const DensityMatrix mid = apply_channel(ChannelSpec::attenuator(1.0 / (e + 1.0)), rho, first);
    return apply_channel(ChannelSpec::amplifier(e + 1.0), mid, opt);
  }
  const auto ch = detail::elementary(spec);
  const auto diag = detail::diagonal_of(rho.matrix());
  const auto sized = detail::sized_map(ch, rho.dim(), diag, opt);
  DensityMatrix out(sized.map->apply(rho.matrix(), sized.crop));
  detail::check_deficit(out, opt, spec);
  return out;
}

// Fock-diagonal fast path: p_out(a) = sum_m T(a, m) p(m).
inline DiagonalState apply_diagonal(const ChannelSpec& spec, const DiagonalState& p, const ChannelOptions& opt = {}) {
  spec.validate();
  if (spec.kind == ChannelKind::AdditiveNoise) {
    const double e = spec.env_energy;
    ChannelOptions first = opt;
    first.d_out = 0;
    const DiagonalState mid = apply_diagonal(ChannelSpec::attenuator(1.0 / (e + 1.0)), p, first);
    return apply_diagonal(ChannelSpec::amplifier(e + 1.0), mid, opt);
  }
  const auto ch = detail::elementary(spec);
  const auto sized = detail::sized_map(ch, p.cutoff(), p.probs(), opt);
  std::vector<double> out(sized.crop, 0.0);
  for (std::size_t a = 0; a < sized.crop; ++a) {
    double s = 0.0;
    for (std::size_t m = 0; m < p.cutoff(); ++m) s += sized.map->transition(a, m) * p.probs()[m];
    out[a] = s;
  }
  DiagonalState result(std::move(out));
  if (result.trace_deficit() > opt.max_deficit) {
    throw TruncationError("apply_diagonal(" + spec.describe() + "): output cutoff too small", result.trace_deficit());
  }
  return result;
}

// Fock transition matrix T(a, m), a < d_out, m < d_in.
inline RealMatrix transition_matrix(const ChannelSpec& spec, std::size_t d_in, std::size_t d_out,
                                    const ChannelOptions& opt = {}) {
  RealMatrix t(d_out, d_in);
  for (std::size_t m = 0; m < d_in; ++m) {
    std::vector<double> e(d_in, 0.0);
    e[m] = 1.0;
    ChannelOptions o = opt;
    o.d_out = d_out;
    const auto col = apply_diagonal(spec, DiagonalState(e), o);
    for (std::size_t a = 0; a < d_out; ++a) t(a, m) = a < col.cutoff() ? col.probs()[a] : 0.0;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Dense reference route (joint dimension <= kMaxJointDim).

struct DenseDilationOptions {
  std::size_t d_sys = 0;  // joint box; 0 picks the exact box for the beamsplitter
  std::size_t d_env = 0;
  std::size_t env_cutoff = 1;  // Fock levels kept in omega_E
  std::size_t pad = 0;
};

inline DensityMatrix apply_channel_dense(const ChannelSpec& spec, const DensityMatrix& rho,
                                         const DenseDilationOptions& opt) {
  spec.validate();
  if (spec.kind == ChannelKind::AdditiveNoise) {
    const double e = spec.env_energy;
    DenseDilationOptions first{0, 0, 1, 0};
    const DensityMatrix mid = apply_channel_dense(ChannelSpec::attenuator(1.0 / (e + 1.0)), rho, first);
    return apply_channel_dense(ChannelSpec::amplifier(e + 1.0), mid, opt);
  }
  const auto ch = detail::elementary(spec);
  std::size_t ds = opt.d_sys, de = opt.d_env;
  if (ds == 0 || de == 0) {
    if (ch.dilation != DilationKind::Beamsplitter) throw InvalidArgument("apply_channel_dense: squeezer needs explicit box");
    ds = de = std::max<std::size_t>(2, rho.dim() + opt.env_cutoff - 1);
  }
  if (rho.dim() > ds || opt.env_cutoff > de) throw InvalidArgument("apply_channel_dense: box smaller than inputs");
  const DilationUnitary u(ch.dilation, ch.parameter, {ds, de, 0, 0, opt.pad});
  const ComplexMatrix big_u = u.to_dense();
  const DensityMatrix env = thermal_state(ch.env_energy, opt.env_cutoff).to_density().embedded(de);
  const DensityMatrix joint = tensor(rho.embedded(ds), env);
  const ComplexMatrix evolved = big_u * joint.matrix() * big_u.adjoint();
  return DensityMatrix(partial_trace(evolved, ds, de, ch.keep_env ? Subsystem::B : Subsystem::A));
}

}  // namespace cmoe
