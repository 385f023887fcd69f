#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "impuritylab/common.hpp"
#include "impuritylab/freeprop.hpp"
#include "impuritylab/lattice.hpp"

namespace impuritylab {

struct MeasurementOutcome {
  int site = 0;
  bool occupied = false;
  double probability = 0.0;  // pre-measurement Born probability of `occupied`
};

// Number-conserving fermionic Gaussian state, fully described by the L x L
// correlation matrix C_{jk} = <c^dag_j c_k>.
class GaussianState {
 public:
  explicit GaussianState(Eigen::MatrixXcd corr) : corr_(std::move(corr)) {}

  static GaussianState vacuum(int L) {
    return GaussianState(Eigen::MatrixXcd::Zero(L, L));
  }

  // Single particle at site i (1-based): C = e_i e_i^T.
  static GaussianState single_particle(int L, int i) {
    if (i < 1 || i > L)
      throw invalid_spec_error("init_single_particle: site out of range");
    Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(L, L);
    C(i - 1, i - 1) = 1.0;
    return GaussianState(std::move(C));
  }

  int size() const { return static_cast<int>(corr_.rows()); }
  const Eigen::MatrixXcd& corr() const { return corr_; }
  Eigen::MatrixXcd& corr() { return corr_; }

  double occupation(int j) const { return corr_(j - 1, j - 1).real(); }
  double total_number() const { return corr_.trace().real(); }

  // Conjugation convention fixed against the exact many-body oracle: for
  // |psi> = c^dag_i |0> the diagonal must give C_jj(t) = |U_ji(t)|^2, which
  // holds for C -> U* C U^T.
  void evolve(const Eigen::MatrixXcd& U) {
    if (U.rows() != corr_.rows())
      throw invalid_spec_error("evolve: dimension mismatch");
    corr_ = U.conjugate() * corr_ * U.transpose();
  }

  template <class Rng>
  MeasurementOutcome measure_occupation(int j, Rng& rng) {
    const double p = occupation(j);
    if (p < -1e-9 || p > 1.0 + 1e-9)
      throw corrupted_state_error(
          "measure_occupation: Born probability outside [0,1]: " +
          std::to_string(p));
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const bool occupied = u < p;
    apply_projection(j, occupied, p);
    return MeasurementOutcome{j, occupied, occupied ? p : 1.0 - p};
  }

  // Rank-one projective update, validated against the full Hilbert-space
  // oracle at L <= 6. Occupied outcome:
  //   C' = C - (C e_j)(e_j^T C)/C_jj on the complement, row/col j pinned.
  // Empty outcome uses the hole-sector analogue.
  void apply_projection(int j, bool occupied, double born_p) {
    const int idx = j - 1;
    const int L = size();
    const Eigen::VectorXcd col = corr_.col(idx);
    const Eigen::RowVectorXcd row = corr_.row(idx);
    if (occupied) {
      if (born_p > 1e-14) corr_ -= col * row / born_p;
      corr_.row(idx).setZero();
      corr_.col(idx).setZero();
      corr_(idx, idx) = 1.0;
    } else {
      const double q = 1.0 - born_p;
      if (q > 1e-14) corr_ += col * row / q;
      corr_.row(idx).setZero();
      corr_.col(idx).setZero();
    }
    // re-symmetrize to suppress round-off drift across many measurements
    corr_ = 0.5 * (corr_ + corr_.adjoint()).eval();
    (void)L;
  }

  // Cluster reset to the fully occupied configuration. Assumes every region
  // site was just measured, so the state factorizes across the region
  // boundary: block C_II <- identity, cross blocks <- 0, complement kept.
  void reset_cluster(const ImpurityRegion& region) {
    const int a = region.start - 1, m = region.size;
    corr_.block(a, 0, m, size()).setZero();
    corr_.block(0, a, size(), m).setZero();
    corr_.block(a, a, m, m).setIdentity();
  }

  // chi(theta) = det(1 + (e^{i theta} - 1) C), evaluated with pivoted LU.
  complexd counting_characteristic(double theta) const {
    Eigen::MatrixXcd M = (std::exp(imag_i * theta) - 1.0) * corr_;
    M.diagonal().array() += 1.0;
    return Eigen::PartialPivLU<Eigen::MatrixXcd>(M).determinant();
  }

  std::vector<complexd> counting_function() const {
    const int M = size() + 1;
    std::vector<complexd> chi(M);
    for (int k = 0; k < M; ++k)
      chi[k] = counting_characteristic(2.0 * pi * k / M);
    return chi;
  }

 private:
  Eigen::MatrixXcd corr_;
};

struct NumberDistribution {
  std::vector<double> p;      // P(n), n = 0..L
  double renorm_factor = 1.0;
  bool undersampled = false;  // renormalization deviated from 1 by > 1e-3
};

// Inverse DFT of the characteristic function sampled at theta_k = 2 pi k / M,
// M = L + 1. Imaginary residue is discarded, negatives clipped to zero, then
// the distribution is renormalized.
inline NumberDistribution number_distribution(const std::vector<complexd>& chi) {
  const int M = static_cast<int>(chi.size());
  if (M < 2) throw invalid_spec_error("number_distribution: need M >= 2");
  NumberDistribution out;
  out.p.resize(M);
  double total = 0.0;
  for (int n = 0; n < M; ++n) {
    complexd s = 0.0;
    for (int k = 0; k < M; ++k)
      s += std::exp(-imag_i * (2.0 * pi * k * n / M)) * chi[k];
    double v = s.real() / M;
    if (v < 0.0) v = 0.0;
    out.p[n] = v;
    total += v;
  }
  if (total <= 0.0)
    throw corrupted_state_error("number_distribution: vanishing total weight");
  out.renorm_factor = 1.0 / total;
  out.undersampled = std::abs(total - 1.0) > 1e-3;
  for (double& v : out.p) v *= out.renorm_factor;
  return out;
}

inline NumberDistribution number_distribution(const GaussianState& state) {
  return number_distribution(state.counting_function());
}

// ---------------------------------------------------------------------------
// Lazy Slater-determinant engine.
//
// Every state reached by the monitored protocol is a Slater determinant with
// a definite particle number, so instead of conjugating the full L x L
// correlation matrix each step we keep the orbital coefficients G in the
// eigenbasis of h: Phi(t) = V exp(-i E t) G with orthonormal columns. Free
// evolution is then just advancing t, and measurements are O(L r) updates.
// Equivalence with the correlation-matrix engine is enforced by tests.
// ---------------------------------------------------------------------------
class SlaterEngine {
 public:
  SlaterEngine(const SpectralPropagator& prop, int initial_site)
      : prop_(&prop), time_(0.0) {
    coeffs_ = site_coefficients(initial_site, 0.0);
  }

  int particle_count() const { return static_cast<int>(coeffs_.cols()); }
  double time() const { return time_; }
  void advance(double dt) { time_ += dt; }

  // Row j (1-based) of the orbital matrix Phi(t) in the site basis.
  Eigen::RowVectorXcd site_row(int j) const {
    const Eigen::VectorXcd w = prop_->modes()
                                   .row(j - 1)
                                   .transpose()
                                   .cwiseProduct(prop_->phases(time_));
    return w.transpose() * coeffs_;
  }

  double occupation(int j) const { return site_row(j).squaredNorm(); }

  template <class Rng>
  MeasurementOutcome measure_occupation(int j, Rng& rng) {
    Eigen::RowVectorXcd v = site_row(j);
    double p = v.squaredNorm();
    if (p < -1e-9 || p > 1.0 + 1e-9)
      throw corrupted_state_error("SlaterEngine: Born probability " +
                                  std::to_string(p));
    p = std::min(std::max(p, 0.0), 1.0);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const bool occupied = u < p;

    if (occupied && p < 1e-14)
      throw corrupted_state_error("SlaterEngine: occupied at zero amplitude");
    if (p < 1e-14) return {j, false, 1.0};  // empty with certainty, no update

    // Rotate the column space so one orbital carries the full site-j
    // amplitude, then project that orbital.
    const int r = particle_count();
    int pivot = 0;
    double best = 0.0;
    for (int a = 0; a < r; ++a)
      if (std::norm(v(a)) > best) { best = std::norm(v(a)); pivot = a; }
    householder_rotate(v, pivot);

    const Eigen::VectorXcd ej = site_coefficients_vec(j, time_);
    if (occupied) {
      coeffs_.col(pivot) = ej;
      pinned_cols_.push_back(pivot);
    } else {
      const complexd amp = ej.adjoint() * coeffs_.col(pivot);
      coeffs_.col(pivot) -= amp * ej;
      const double nrm = coeffs_.col(pivot).norm();
      if (nrm < 1e-14)
        throw corrupted_state_error("SlaterEngine: empty projection collapse");
      coeffs_.col(pivot) /= nrm;
    }
    return {j, occupied, occupied ? p : 1.0 - p};
  }

  // Measure all sites of the region in ascending order; returns measured
  // cluster occupation n_I.
  template <class Rng>
  int measure_cluster(const ImpurityRegion& region, Rng& rng) {
    pinned_cols_.clear();
    int n = 0;
    for (int j = region.start; j <= region.end(); ++j)
      if (measure_occupation(j, rng).occupied) ++n;
    return n;
  }

  // Reset to the fully occupied cluster: drop the measured occupied-site
  // orbitals, append a fresh e_j orbital per region site. Complement orbitals
  // have no region support after the measurement pass, so they are untouched.
  void reset_cluster(const ImpurityRegion& region) {
    const int r = particle_count();
    std::vector<bool> drop(r, false);
    for (int c : pinned_cols_) drop[c] = true;
    pinned_cols_.clear();
    const int kept = r - static_cast<int>(std::count(drop.begin(), drop.end(), true));
    Eigen::MatrixXcd next(coeffs_.rows(), kept + region.size);
    int w = 0;
    for (int a = 0; a < r; ++a)
      if (!drop[a]) next.col(w++) = coeffs_.col(a);
    for (int j = region.start; j <= region.end(); ++j)
      next.col(w++) = site_coefficients_vec(j, time_);
    coeffs_ = std::move(next);
  }

  // Correlation matrix C = Phi* Phi^T at the current time.
  Eigen::MatrixXcd correlation_matrix() const {
    const Eigen::MatrixXcd phi =
        prop_->modes() * prop_->phases(time_).asDiagonal() * coeffs_;
    return phi.conjugate() * phi.transpose();
  }

 private:
  // Coefficient vector of the site-basis unit vector e_j at time t:
  // Phi(t) col = e_j  <=>  col = exp(+iEt) V^dag e_j.
  Eigen::VectorXcd site_coefficients_vec(int j, double t) const {
    return prop_->phases(t).conjugate().cwiseProduct(
        prop_->modes().row(j - 1).adjoint());
  }
  Eigen::MatrixXcd site_coefficients(int j, double t) const {
    Eigen::MatrixXcd G(prop_->size(), 1);
    G.col(0) = site_coefficients_vec(j, t);
    return G;
  }

  // Apply a column-space Householder reflection sending the site amplitude
  // vector v into the pivot column: G <- G H^T with H v = (phase)|v| e_pivot.
  void householder_rotate(const Eigen::RowVectorXcd& v, int pivot) {
    Eigen::VectorXcd u = v.transpose();
    const double nrm = u.norm();
    if (nrm < 1e-300) return;
    complexd phase = u(pivot);
    phase = (std::abs(phase) > 1e-300) ? phase / std::abs(phase) : complexd(1.0);
    u(pivot) += phase * nrm;
    const double un = u.norm();
    if (un < 1e-300) return;
    u /= un;
    coeffs_ -= 2.0 * (coeffs_ * u.conjugate()) * u.transpose();
  }

  const SpectralPropagator* prop_;
  Eigen::MatrixXcd coeffs_;  // L x r, orthonormal columns
  double time_;
  std::vector<int> pinned_cols_;
};

}  // namespace impuritylab
