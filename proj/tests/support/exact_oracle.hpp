#pragma once

// Test-only brute-force many-body simulator on the full 2^L Hilbert space.
// Deliberately self-contained: it re-derives Jordan-Wigner signs and Wick-free
// expectation values so it stays independent of the engine code it checks.

#include <Eigen/Dense>
#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

namespace oracle {

using complexd = std::complex<double>;
inline constexpr complexd I{0.0, 1.0};

class ExactState {
 public:
  ExactState(int L, int initial_site) : L_(L) {
    amps_ = Eigen::VectorXcd::Zero(std::int64_t{1} << L);
    amps_(std::int64_t{1} << (initial_site - 1)) = 1.0;
  }

  explicit ExactState(int L, Eigen::VectorXcd amps)
      : L_(L), amps_(std::move(amps)) {}

  int sites() const { return L_; }
  const Eigen::VectorXcd& amps() const { return amps_; }

  // Slater determinant from orthonormal orbitals (columns of phi).
  static ExactState slater(const Eigen::MatrixXcd& phi) {
    const int L = static_cast<int>(phi.rows());
    const int r = static_cast<int>(phi.cols());
    Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(std::int64_t{1} << L);
    for (std::int64_t w = 0; w < amps.size(); ++w) {
      if (std::popcount(static_cast<std::uint64_t>(w)) != r) continue;
      Eigen::MatrixXcd M(r, r);
      int row = 0;
      for (int s = 0; s < L; ++s)
        if (w & (std::int64_t{1} << s)) M.row(row++) = phi.row(s);
      amps(w) = M.determinant();
    }
    return ExactState(L, std::move(amps));
  }

  // Evolve under sum_{jk} h_jk c^dag_j c_k for time t.
  void evolve(const Eigen::MatrixXcd& h, double t) {
    const Eigen::MatrixXcd H = many_body_h(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXcd ph =
        (-I * t * es.eigenvalues().cast<complexd>().array()).exp().matrix();
    amps_ = es.eigenvectors() *
            ph.cwiseProduct(es.eigenvectors().adjoint() * amps_);
  }

  double occupation_probability(int j) const {
    double p = 0.0;
    for (std::int64_t w = 0; w < amps_.size(); ++w)
      if (w & (std::int64_t{1} << (j - 1))) p += std::norm(amps_(w));
    return p;
  }

  // Project onto n_j = occupied/empty and renormalize.
  void project(int j, bool occupied) {
    const std::int64_t bit = std::int64_t{1} << (j - 1);
    for (std::int64_t w = 0; w < amps_.size(); ++w)
      if (static_cast<bool>(w & bit) != occupied) amps_(w) = 0.0;
    amps_ /= amps_.norm();
  }

  // Reset a measured cluster (all sites hold definite occupations) to the
  // fully occupied configuration, as a fermionic product with the untouched
  // complement: set the cluster bits and attach the string sign
  // (-1)^{(m - n_I) * n_left(w)}.
  void reset_cluster(int start, int m) {
    std::int64_t cluster = 0;
    for (int j = start; j < start + m; ++j)
      cluster |= std::int64_t{1} << (j - 1);
    const std::int64_t left_mask = (std::int64_t{1} << (start - 1)) - 1;
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(amps_.size());
    for (std::int64_t w = 0; w < amps_.size(); ++w) {
      if (amps_(w) == complexd{}) continue;
      const int n_I =
          std::popcount(static_cast<std::uint64_t>(w & cluster));
      const int n_left =
          std::popcount(static_cast<std::uint64_t>(w & left_mask));
      const double sign = (((m - n_I) * n_left) % 2) ? -1.0 : 1.0;
      next(w | cluster) += sign * amps_(w);
    }
    amps_ = std::move(next);
  }

  // <c^dag_j c_k> with full Jordan-Wigner strings.
  complexd correlation(int j, int k) const {
    complexd acc = 0.0;
    for (std::int64_t w = 0; w < amps_.size(); ++w) {
      if (amps_(w) == complexd{}) continue;
      std::int64_t word = w;
      int sign = 1;
      if (!annihilate(word, k, sign)) continue;
      if (!create(word, j, sign)) continue;
      acc += std::conj(amps_(word)) * static_cast<double>(sign) * amps_(w);
    }
    return acc;
  }

  Eigen::MatrixXcd correlation_matrix() const {
    Eigen::MatrixXcd C(L_, L_);
    for (int j = 1; j <= L_; ++j)
      for (int k = 1; k <= L_; ++k) C(j - 1, k - 1) = correlation(j, k);
    return C;
  }

  complexd counting_characteristic(double theta) const {
    complexd acc = 0.0;
    for (std::int64_t w = 0; w < amps_.size(); ++w)
      acc += std::norm(amps_(w)) *
             std::exp(I * theta *
                      static_cast<double>(
                          std::popcount(static_cast<std::uint64_t>(w))));
    return acc;
  }

  std::vector<double> number_histogram() const {
    std::vector<double> p(L_ + 1, 0.0);
    for (std::int64_t w = 0; w < amps_.size(); ++w)
      p[std::popcount(static_cast<std::uint64_t>(w))] += std::norm(amps_(w));
    return p;
  }

 private:
  Eigen::MatrixXcd many_body_h(const Eigen::MatrixXcd& h) const {
    const std::int64_t n = amps_.size();
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    for (std::int64_t w = 0; w < n; ++w)
      for (int j = 1; j <= L_; ++j)
        for (int k = 1; k <= L_; ++k) {
          if (h(j - 1, k - 1) == complexd{}) continue;
          std::int64_t word = w;
          int sign = 1;
          if (!annihilate(word, k, sign)) continue;
          if (!create(word, j, sign)) continue;
          H(word, w) += h(j - 1, k - 1) * static_cast<double>(sign);
        }
    return H;
  }

  static bool annihilate(std::int64_t& word, int site, int& sign) {
    const std::int64_t bit = std::int64_t{1} << (site - 1);
    if (!(word & bit)) return false;
    sign *= (std::popcount(static_cast<std::uint64_t>(word & (bit - 1))) & 1)
                ? -1
                : 1;
    word &= ~bit;
    return true;
  }

  static bool create(std::int64_t& word, int site, int& sign) {
    const std::int64_t bit = std::int64_t{1} << (site - 1);
    if (word & bit) return false;
    sign *= (std::popcount(static_cast<std::uint64_t>(word & (bit - 1))) & 1)
                ? -1
                : 1;
    word |= bit;
    return true;
  }

  int L_;
  Eigen::VectorXcd amps_;
};

}  // namespace oracle
