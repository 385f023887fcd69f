#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "impuritylab/common.hpp"
#include "impuritylab/fock.hpp"
#include "impuritylab/lattice.hpp"

namespace impuritylab {

struct ManyBodyState {
  const FockBasis* basis = nullptr;
  Eigen::VectorXcd amps;

  static ManyBodyState single_particle(const FockBasis& basis, int site) {
    ManyBodyState s;
    s.basis = &basis;
    s.amps = Eigen::VectorXcd::Zero(basis.dim());
    s.amps(basis.index(FockWord{1} << (site - 1))) = 1.0;
    return s;
  }

  double norm() const { return amps.norm(); }
};

// A normal-ordered product of ladder operators, written left to right;
// applied rightmost first. `dagger` marks creation operators.
struct LadderTerm {
  std::vector<std::pair<int, bool>> ops;  // (site, dagger)
  complexd coeff;
};

// Hamiltonian terms applied on the fly; no matrix is ever stored.
class SparseAction {
 public:
  SparseAction(const ChainSpec& chain,
               std::optional<ImpuritySpec> impurity = std::nullopt)
      : L_(chain.L) {
    for (int j = 1; j < chain.L; ++j) {
      terms_.push_back({{{j, true}, {j + 1, false}}, 1.0});
      terms_.push_back({{{j + 1, true}, {j, false}}, 1.0});
    }
    if (impurity) append_impurity(*impurity);
  }

  int sites() const { return L_; }
  const std::vector<LadderTerm>& terms() const { return terms_; }
  bool parity_preserving_action() const { return parity_preserving_; }

  // y += H x
  void accumulate(const FockBasis& basis, const Eigen::VectorXcd& x,
                  Eigen::VectorXcd& y) const {
    if (!parity_preserving_ && basis.sector() != ParitySector::full)
      throw sector_violation_error(
          "SparseAction: parity-breaking impurity requires the full basis");
    for (std::size_t idx = 0; idx < basis.dim(); ++idx) {
      const complexd a = x(idx);
      if (a == complexd{}) continue;
      const FockWord w = basis.word(idx);
      for (const auto& term : terms_) {
        FockWord word = w;
        int sign = 1;
        bool ok = true;
        for (auto it = term.ops.rbegin(); it != term.ops.rend(); ++it) {
          ok = it->second ? apply_create(word, it->first, sign)
                          : apply_annihilate(word, it->first, sign);
          if (!ok) break;
        }
        if (ok)
          y(basis.index(word)) +=
              term.coeff * static_cast<double>(sign) * a;
      }
    }
  }

  Eigen::VectorXcd apply(const FockBasis& basis,
                         const Eigen::VectorXcd& x) const {
    Eigen::VectorXcd y = Eigen::VectorXcd::Zero(x.size());
    accumulate(basis, x, y);
    return y;
  }

  // Expectation of a single ladder product on a normalized state.
  static complexd expectation(const FockBasis& basis, const LadderTerm& term,
                              const Eigen::VectorXcd& x) {
    complexd acc = 0.0;
    for (std::size_t idx = 0; idx < basis.dim(); ++idx) {
      const complexd a = x(idx);
      if (a == complexd{}) continue;
      FockWord word = basis.word(idx);
      int sign = 1;
      bool ok = true;
      for (auto it = term.ops.rbegin(); it != term.ops.rend(); ++it) {
        ok = it->second ? apply_create(word, it->first, sign)
                        : apply_annihilate(word, it->first, sign);
        if (!ok) break;
      }
      if (ok && basis.contains(word))
        acc += std::conj(x(basis.index(word))) * term.coeff *
               static_cast<double>(sign) * a;
    }
    return acc;
  }

 private:
  void append_impurity(const ImpuritySpec& imp) {
    const int i = imp.site;
    const double d = imp.strength;
    switch (imp.variant) {
      case ImpurityVariant::density2:
        terms_.push_back(
            {{{i, true}, {i, false}, {i + 1, true}, {i + 1, false}}, d});
        break;
      case ImpurityVariant::density3:
        terms_.push_back({{{i, true},
                           {i, false},
                           {i + 1, true},
                           {i + 1, false},
                           {i + 2, true},
                           {i + 2, false}},
                          d});
        break;
      case ImpurityVariant::raise3:
        terms_.push_back(
            {{{i, true}, {i + 1, true}, {i + 2, true}, {i + 3, false}}, d});
        terms_.push_back(
            {{{i + 3, true}, {i + 2, false}, {i + 1, false}, {i, false}}, d});
        break;
      case ImpurityVariant::parity_breaking:
        terms_.push_back({{{i, true}, {i + 1, true}, {i + 2, false}}, d});
        terms_.push_back({{{i + 2, true}, {i + 1, false}, {i, false}}, d});
        parity_preserving_ = false;
        break;
    }
  }

  int L_;
  std::vector<LadderTerm> terms_;
  bool parity_preserving_ = true;
};

// |psi(t+dt)> = exp(-i H dt)|psi> by an adaptive-dimension Lanczos subspace.
// The local error estimate is the standard last-component bound; if the
// maximal dimension cannot reach `tol`, the step is bisected.
inline void evolve_krylov(ManyBodyState& state, const SparseAction& action,
                          double dt, double tol, int max_dim = 60,
                          int depth = 0) {
  if (dt <= 0.0) throw invalid_spec_error("evolve_krylov: dt must be > 0");
  if (tol <= 0.0) throw invalid_spec_error("evolve_krylov: tol must be > 0");
  if (depth > 30)
    throw numeric_error("evolve_krylov: step-size reduction failed");
  const FockBasis& basis = *state.basis;
  const auto n = static_cast<Eigen::Index>(basis.dim());

  const double beta0 = state.amps.norm();
  std::vector<Eigen::VectorXcd> V;
  V.push_back(state.amps / beta0);
  std::vector<double> alpha, beta;
  bool happy = false;

  auto small_exp = [&](int m, Eigen::VectorXcd& y) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
      T(k, k) = alpha[k];
      if (k + 1 < m) T(k, k + 1) = T(k + 1, k) = beta[k];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    const Eigen::VectorXcd ph =
        (-imag_i * dt * es.eigenvalues().array()).exp().matrix();
    y = es.eigenvectors().cast<complexd>() *
        ph.cwiseProduct(es.eigenvectors().row(0).transpose().cast<complexd>());
  };

  int m = 0;
  Eigen::VectorXcd y;
  double err_est = std::numeric_limits<double>::infinity();
  while (m < max_dim) {
    Eigen::VectorXcd w = Eigen::VectorXcd::Zero(n);
    action.accumulate(basis, V[m], w);
    const double a = (V[m].adjoint() * w).real()(0);
    w -= a * V[m];
    if (m > 0) w -= beta[m - 1] * V[m - 1];
    // one pass of reorthogonalization keeps the basis clean
    for (int k = 0; k <= m; ++k) w -= (V[k].adjoint() * w)(0) * V[k];
    alpha.push_back(a);
    const double b = w.norm();
    ++m;
    if (b < 1e-13) {  // happy breakdown: subspace is invariant
      happy = true;
      break;
    }
    beta.push_back(b);
    if (m >= 3) {
      small_exp(m, y);
      err_est = b * std::abs(y(m - 1)) * dt;
      if (err_est < tol) break;
    }
    if (m < max_dim) V.push_back(w / b);
  }
  if (!happy && err_est >= tol) {
    // restart on two half-steps
    evolve_krylov(state, action, dt / 2, tol / 2, max_dim, depth + 1);
    evolve_krylov(state, action, dt / 2, tol / 2, max_dim, depth + 1);
    return;
  }
  small_exp(m, y);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < m; ++k) out += y(k) * V[k];
  state.amps = beta0 * out;
}

struct Observables {
  double N = 0.0;
  double N_imp = 0.0;
  double J = 0.0;
  std::vector<double> distribution;  // P(n), n = 0..L
};

inline double site_occupation(const FockBasis& basis,
                              const Eigen::VectorXcd& amps, int site) {
  const FockWord bit = FockWord{1} << (site - 1);
  double acc = 0.0;
  for (std::size_t idx = 0; idx < basis.dim(); ++idx)
    if (basis.word(idx) & bit) acc += std::norm(amps(idx));
  return acc;
}

inline Observables measure_observables(const ManyBodyState& state,
                                       const ImpurityRegion& region,
                                       const ImpuritySpec& impurity,
                                       bool with_distribution = false) {
  const FockBasis& basis = *state.basis;
  Observables obs;
  std::vector<double> occ(basis.sites() + 1, 0.0);
  std::vector<double> pn(basis.sites() + 1, 0.0);
  for (std::size_t idx = 0; idx < basis.dim(); ++idx) {
    const double w2 = std::norm(state.amps(idx));
    if (w2 == 0.0) continue;
    const FockWord word = basis.word(idx);
    pn[std::popcount(word)] += w2;
    for (int j = 1; j <= basis.sites(); ++j)
      if (word & (FockWord{1} << (j - 1))) occ[j] += w2;
  }
  for (int j = 1; j <= basis.sites(); ++j) {
    obs.N += occ[j];
    if (region.contains(j)) obs.N_imp += occ[j];
  }

  // J = i Delta [ <c+_{i+3} c_{i+2} c_{i+1} c_i> - <c+_i c+_{i+1} c+_{i+2} c_{i+3}> ]
  if (impurity.variant == ImpurityVariant::raise3) {
    const int i = impurity.site;
    const LadderTerm lower{
        {{i + 3, true}, {i + 2, false}, {i + 1, false}, {i, false}}, 1.0};
    const LadderTerm raise{
        {{i, true}, {i + 1, true}, {i + 2, true}, {i + 3, false}}, 1.0};
    const complexd lo = SparseAction::expectation(basis, lower, state.amps);
    const complexd hi = SparseAction::expectation(basis, raise, state.amps);
    obs.J = (imag_i * impurity.strength * (lo - hi)).real();
  }

  if (with_distribution) {
    // P(n) through the characteristic function at M = L+1 angles, then the
    // inverse DFT, matching the counting-statistics route.
    const int M = basis.sites() + 1;
    std::vector<complexd> chi(M, 0.0);
    for (int k = 0; k < M; ++k)
      for (int nn = 0; nn < M; ++nn)
        chi[k] += pn[nn] * std::exp(imag_i * (2.0 * pi * k * nn / M));
    obs.distribution.assign(M, 0.0);
    for (int nn = 0; nn < M; ++nn) {
      complexd s = 0.0;
      for (int k = 0; k < M; ++k)
        s += std::exp(-imag_i * (2.0 * pi * k * nn / M)) * chi[k];
      obs.distribution[nn] = std::max(0.0, s.real() / M);
    }
  }
  return obs;
}

}  // namespace impuritylab
