#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "impuritylab/common.hpp"
#include "impuritylab/lattice.hpp"

namespace impuritylab {

// Maximal group velocity of the dispersion 2 cos k; used for finite-size
// validity windows throughout.
inline constexpr double v_max = 2.0;

// i^n J_n(2t), the infinite-chain propagator element U_{j,l} at n = j - l.
inline complexd bessel_amplitude(int n, double t) {
  const int a = std::abs(n);
  double jn = std::cyl_bessel_j(a, 2.0 * t);
  if (n < 0 && (a % 2)) jn = -jn;  // J_{-n} = (-1)^n J_n
  switch (((n % 4) + 4) % 4) {
    case 0: return {jn, 0.0};
    case 1: return {0.0, jn};
    case 2: return {-jn, 0.0};
    default: return {0.0, -jn};
  }
}

// Cached spectral decomposition of a number-conserving quadratic Hamiltonian;
// evaluates U(t) = exp(-i h t) at arbitrary t. Read-only after construction.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const QuadraticHamiltonian& H) {
    if (!H.number_conserving())
      throw unsupported_hamiltonian_error(
          "SpectralPropagator: Hamiltonian has pairing terms; use the "
          "Majorana free evolution instead");
    H.validate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.hopping);
    modes_ = es.eigenvectors();
    energies_ = es.eigenvalues();
  }

  int size() const { return static_cast<int>(energies_.size()); }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXcd& modes() const { return modes_; }

  Eigen::VectorXcd phases(double t) const {
    return (-imag_i * t * energies_.array()).exp().matrix();
  }

  Eigen::MatrixXcd matrix(double t) const {
    return modes_ * phases(t).asDiagonal() * modes_.adjoint();
  }

  // Column `source` (1-based) of U(t).
  Eigen::VectorXcd column(double t, int source) const {
    if (source < 1 || source > size())
      throw invalid_spec_error("propagator column: source out of range");
    Eigen::VectorXcd c = modes_.row(source - 1).adjoint();
    return modes_ * phases(t).cwiseProduct(c);
  }

 private:
  Eigen::MatrixXcd modes_;
  Eigen::VectorXd energies_;
};

struct Propagator {
  Eigen::MatrixXcd matrix;
  double time = 0.0;
};

inline Propagator propagator(const QuadraticHamiltonian& H, double t) {
  if (t < 0) throw invalid_spec_error("propagator: t must be >= 0");
  return Propagator{SpectralPropagator(H).matrix(t), t};
}

struct QuadratureResult {
  complexd value;
  double error_bound;
  bool converged;
};

namespace detail {

inline void adaptive_simpson(const std::function<complexd(double)>& f,
                             double a, double b, complexd fa, complexd fm,
                             complexd fb, complexd whole, double tol,
                             int depth, complexd& acc, double& err) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const complexd flm = f(lm), frm = f(rm);
  const complexd left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const complexd right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = std::abs(left + right - whole);
  if (depth <= 0 || delta < 15.0 * tol) {
    acc += left + right + (left + right - whole) / 15.0;
    err += delta / 15.0;
    return;
  }
  adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1, acc, err);
  adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1, acc, err);
}

inline QuadratureResult oscillatory_quadrature(
    const std::function<complexd(double)>& f, double a, double b,
    double frequency, double tol) {
  // Panels no wider than one oscillation period.
  const double period = frequency > 0 ? pi / frequency : (b - a);
  const int panels =
      std::max(4, static_cast<int>(std::ceil((b - a) / period)));
  const double h = (b - a) / panels;
  complexd acc = 0.0;
  double err = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double x0 = a + p * h, x1 = x0 + h, xm = 0.5 * (x0 + x1);
    const complexd f0 = f(x0), fm = f(xm), f1 = f(x1);
    const complexd whole = h / 6.0 * (f0 + 4.0 * fm + f1);
    adaptive_simpson(f, x0, x1, f0, fm, f1, whole, tol / panels, 30, acc,
                     err);
  }
  return {acc, err, err <= tol};
}

}  // namespace detail

// Boundary return amplitude U_11(t) of the semi-infinite chain,
// (2/pi) Int_0^pi sin^2 k exp(-2 i t cos k) dk, by adaptive quadrature with
// oscillation-aware panel splitting.
inline QuadratureResult boundary_amplitude_full(double t,
                                                double quadrature_tol = 1e-10) {
  if (t < 0) throw invalid_spec_error("boundary_amplitude: t must be >= 0");
  auto integrand = [t](double k) {
    const double s = std::sin(k);
    return (2.0 / pi) * s * s * std::exp(-imag_i * 2.0 * t * std::cos(k));
  };
  return detail::oscillatory_quadrature(integrand, 0.0, pi, 2.0 * t,
                                        quadrature_tol);
}

inline complexd boundary_amplitude(double t, double quadrature_tol = 1e-10) {
  return boundary_amplitude_full(t, quadrature_tol).value;
}

struct ReturnSeries {
  std::vector<double> times;
  std::vector<double> values;
};

// P_I(t) = sum_{j in I} |U_{j,source}(t)|^2 on the given time grid.
inline ReturnSeries return_probability(const SpectralPropagator& prop,
                                       const ImpurityRegion& region,
                                       int source,
                                       const std::vector<double>& times) {
  if (source < 1 || source > prop.size())
    throw invalid_spec_error("return_probability: source out of range");
  if (region.end() > prop.size())
    throw invalid_spec_error("return_probability: region out of range");
  ReturnSeries series;
  series.times = times;
  series.values.reserve(times.size());
  for (double t : times) {
    if (t < 0) throw invalid_spec_error("return_probability: negative time");
    const Eigen::VectorXcd col = prop.column(t, source);
    double p = 0.0;
    for (int j = region.start; j <= region.end(); ++j)
      p += std::norm(col(j - 1));
    series.values.push_back(p);
  }
  return series;
}

inline ReturnSeries return_probability(const QuadraticHamiltonian& H,
                                       const ImpurityRegion& region,
                                       int source,
                                       const std::vector<double>& times) {
  return return_probability(SpectralPropagator(H), region, source, times);
}

struct PowerLawFit {
  double exponent = 0.0;   // fitted slope of log P vs log t (i.e. -alpha)
  double prefactor = 0.0;
  double t_min = 0.0, t_max = 0.0;
  double r_squared = 0.0;
  int points_used = 0;
  bool window_exceeds_validity = false;  // set when t_max > t_edge
};

// Strict local maxima of the series inside [t_min, t_max]; ties keep the
// earliest point.
inline std::vector<std::size_t> envelope_indices(const ReturnSeries& s,
                                                 double t_min, double t_max) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 1; i + 1 < s.values.size(); ++i) {
    if (s.times[i] < t_min || s.times[i] > t_max) continue;
    if (s.values[i] > s.values[i - 1] && s.values[i] > s.values[i + 1])
      idx.push_back(i);
  }
  return idx;
}

inline PowerLawFit fit_power_law(const ReturnSeries& series, double t_min,
                                 double t_max, bool envelope,
                                 double t_edge = 0.0) {
  std::vector<std::size_t> idx;
  if (envelope) {
    idx = envelope_indices(series, t_min, t_max);
  } else {
    for (std::size_t i = 0; i < series.times.size(); ++i)
      if (series.times[i] >= t_min && series.times[i] <= t_max)
        idx.push_back(i);
  }
  std::vector<double> lx, ly;
  for (std::size_t i : idx) {
    if (series.times[i] > 0 && series.values[i] > 0) {
      lx.push_back(std::log(series.times[i]));
      ly.push_back(std::log(series.values[i]));
    }
  }
  if (lx.size() < 10)
    throw insufficient_data_error(
        "fit_power_law: fewer than 10 usable points in window");

  const auto n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double fit = slope * lx[i] + intercept;
    ss_res += (ly[i] - fit) * (ly[i] - fit);
    ss_tot += (ly[i] - ybar) * (ly[i] - ybar);
  }
  PowerLawFit fit;
  fit.exponent = slope;
  fit.prefactor = std::exp(intercept);
  fit.t_min = t_min;
  fit.t_max = t_max;
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.points_used = static_cast<int>(lx.size());
  fit.window_exceeds_validity = (t_edge > 0.0 && t_max > t_edge);
  return fit;
}

// Ballistic validity bound for a source at `site` in a chain of length L.
inline double edge_time(int site, int L) {
  const double dist = std::min(site - 1, L - site);
  return dist / v_max;
}

enum class SourceLocation { bulk, boundary };

// Long-time return exponent alpha: P(t) ~ t^-alpha.
inline double asymptotic_exponent(int d, SourceLocation loc) {
  if (d < 1) throw invalid_spec_error("asymptotic_exponent: d must be >= 1");
  return loc == SourceLocation::bulk ? static_cast<double>(d)
                                     : static_cast<double>(d + 2);
}

}  // namespace impuritylab
