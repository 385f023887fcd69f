#pragma once

#include <cmath>
#include <vector>

#include "impuritylab/common.hpp"
#include "impuritylab/freeprop.hpp"

namespace impuritylab {

// Free and dressed return amplitudes on a shared uniform grid.
struct ReturnKernel {
  std::vector<double> times;
  std::vector<complexd> A0;  // free return amplitude
  std::vector<complexd> A;   // dressed (monitored) amplitude

  double grid_spacing() const {
    return times.size() > 1 ? times[1] - times[0] : 0.0;
  }

  ReturnSeries dressed_probability() const {
    ReturnSeries s;
    s.times = times;
    s.values.reserve(A.size());
    for (const complexd& a : A) s.values.push_back(std::norm(a));
    return s;
  }
};

inline ReturnKernel make_kernel(const std::vector<double>& times,
                                std::vector<complexd> A0) {
  if (times.size() != A0.size() || times.size() < 2)
    throw invalid_spec_error("ReturnKernel: grid/amplitude size mismatch");
  const double dt = times[1] - times[0];
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * std::max(1.0, dt))
      throw invalid_spec_error("ReturnKernel: grid must be uniform");
  ReturnKernel k;
  k.times = times;
  k.A0 = std::move(A0);
  return k;
}

// Forward solve of the causal discrete renewal convolution
//   A(t) = A0(t) - p_m sum_{tau < t} K(t - tau) A(tau) dtau,
// left-endpoint weighted so A at each step depends only on earlier A.
// The convolution kernel is A0 normalized to K(0) = 1, so the map
// A0 -> A is linear; for physical on-site kernels A0(0) = 1 already
// and the normalization is a no-op.
inline void solve_renewal(ReturnKernel& kernel, double p_m) {
  const std::size_t n = kernel.A0.size();
  const double dt = kernel.grid_spacing();
  const complexd a00 = kernel.A0.empty() ? complexd(1.0) : kernel.A0[0];
  if (std::abs(a00) < 1e-14)
    throw invalid_spec_error("solve_renewal: kernel vanishes at t = 0");
  kernel.A.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    complexd conv = 0.0;
    for (std::size_t j = 0; j < i; ++j)
      conv += (kernel.A0[i - j] / a00) * kernel.A[j];
    kernel.A[i] = kernel.A0[i] - p_m * dt * conv;
  }
}

// Bulk free kernel A0(t) = J0(2t) on a uniform grid.
inline ReturnKernel bulk_kernel(double t_max, double dt_grid = 0.1) {
  std::vector<double> times;
  std::vector<complexd> a0;
  for (double t = 0.0; t <= t_max + 1e-12; t += dt_grid) {
    times.push_back(t);
    a0.push_back(bessel_amplitude(0, t));
  }
  return make_kernel(times, std::move(a0));
}

// Boundary free kernel A0(t) = U_11(t) of the semi-infinite chain.
inline ReturnKernel boundary_kernel(double t_max, double dt_grid = 0.1,
                                    double quadrature_tol = 1e-10) {
  std::vector<double> times;
  std::vector<complexd> a0;
  for (double t = 0.0; t <= t_max + 1e-12; t += dt_grid) {
    times.push_back(t);
    a0.push_back(boundary_amplitude(t, quadrature_tol));
  }
  return make_kernel(times, std::move(a0));
}

struct BranchingParams {
  double p_r;   // recurrence probability
  double n_br;  // branches per return
};

struct DivergentReturns {};  // p_r = 1: N_ret diverges

// N_ret = p_r / (1 - p_r); p_r = 1 is signaled, not evaluated.
inline double expected_returns(double p_r) {
  if (p_r < 0.0 || p_r > 1.0)
    throw invalid_spec_error("expected_returns: p_r must be in [0,1]");
  if (p_r == 1.0) throw numeric_error("expected_returns: divergent at p_r = 1");
  return p_r / (1.0 - p_r);
}

inline double recurrence_from_returns(double n_ret) {
  if (n_ret < 0.0)
    throw invalid_spec_error("recurrence_from_returns: N_ret must be >= 0");
  return n_ret / (1.0 + n_ret);
}

enum class BranchingRegime { subcritical, critical, supercritical };

// Classifies the reproduction factor n_br * p_r against 1.
inline BranchingRegime branching_criterion(double n_br, double p_r) {
  if (n_br < 0.0 || p_r < 0.0)
    throw invalid_spec_error("branching_criterion: inputs must be >= 0");
  const double f = n_br * p_r;
  if (f < 1.0) return BranchingRegime::subcritical;
  if (f > 1.0) return BranchingRegime::supercritical;
  return BranchingRegime::critical;
}

struct ConfigEntropyParams {
  double xi;      // operator-length scale
  double v = 2.0; // light-cone velocity
  double t;
};

struct ConfigEntropyResult {
  double s_conf;
  bool outside_validity;  // xi not << v t
};

// S_conf = -sum P(l) log P(l) + sum P(l) log binom(vt, l) with
// P(l) ~ exp(-l / xi) normalized on l = 1..floor(vt).
inline ConfigEntropyResult config_entropy(const ConfigEntropyParams& params) {
  if (params.xi <= 0.0)
    throw invalid_spec_error("config_entropy: xi must be > 0");
  const double vt = params.v * params.t;
  if (vt < 1.0) throw invalid_spec_error("config_entropy: need v t >= 1");
  const auto lmax = static_cast<long>(vt);

  // work with shifted weights to stay finite at tiny xi
  double z = 0.0;
  std::vector<double> w(lmax + 1, 0.0);
  for (long l = 1; l <= lmax; ++l) {
    w[l] = std::exp(-(static_cast<double>(l) - 1.0) / params.xi);
    z += w[l];
  }
  double shannon = 0.0, config = 0.0;
  const double lg_vt = std::lgamma(vt + 1.0);
  for (long l = 1; l <= lmax; ++l) {
    const double p = w[l] / z;
    if (p > 1e-300) shannon -= p * std::log(p);
    const double log_binom = lg_vt - std::lgamma(l + 1.0) -
                             std::lgamma(vt - l + 1.0);
    config += p * log_binom;
  }
  return {shannon + config, params.xi >= vt};
}

}  // namespace impuritylab
