#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <optional>
#include <vector>

#include "impuritylab/common.hpp"
#include "impuritylab/exactmb.hpp"
#include "impuritylab/fock.hpp"
#include "impuritylab/freeprop.hpp"
#include "impuritylab/lattice.hpp"

namespace impuritylab {

inline constexpr int operator_site_cap = 12;
inline constexpr int entanglement_site_cap = 10;

// Dense many-body matrix of a sparse action on the full 2^L basis.
inline Eigen::MatrixXcd dense_hamiltonian(const FockBasis& basis,
                                          const SparseAction& action) {
  const auto n = static_cast<Eigen::Index>(basis.dim());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd col(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    col.setZero();
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
    e(c) = 1.0;
    action.accumulate(basis, e, col);
    H.col(c) = col;
  }
  return H;
}

// Dense many-body operators in the full occupation basis (2^L x 2^L).
struct OperatorMatrix {
  Eigen::MatrixXcd mat;

  int sites() const {
    int L = 0;
    while ((Eigen::Index{1} << L) < mat.rows()) ++L;
    return L;
  }

  double hs_norm_sq() const {
    return (mat.adjoint() * mat).trace().real() / static_cast<double>(mat.rows());
  }

  static OperatorMatrix number_op(int L, int site) {
    const auto n = Eigen::Index{1} << L;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    const FockWord bit = FockWord{1} << (site - 1);
    for (Eigen::Index w = 0; w < n; ++w)
      if (static_cast<FockWord>(w) & bit) m(w, w) = 1.0;
    return {std::move(m)};
  }

  // c^dag_site with the full Jordan-Wigner string.
  static OperatorMatrix creation_op(int L, int site) {
    const auto n = Eigen::Index{1} << L;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index w = 0; w < n; ++w) {
      FockWord word = static_cast<FockWord>(w);
      int sign = 1;
      if (apply_create(word, site, sign))
        m(word, w) = static_cast<double>(sign);
    }
    return {std::move(m)};
  }
};

// Heisenberg evolution O(t) = e^{iHt} O e^{-iHt} through one cached
// eigendecomposition of the dense Hamiltonian.
class HeisenbergEvolver {
 public:
  HeisenbergEvolver(const ChainSpec& chain,
                    std::optional<ImpuritySpec> impurity)
      : basis_(chain.L, ParitySector::full) {
    if (chain.L > operator_site_cap)
      throw resource_error("HeisenbergEvolver: L exceeds operator cap " +
                           std::to_string(operator_site_cap));
    const SparseAction action(chain, impurity);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        dense_hamiltonian(basis_, action));
    modes_ = es.eigenvectors();
    energies_ = es.eigenvalues();
  }

  const FockBasis& basis() const { return basis_; }

  OperatorMatrix evolve(const OperatorMatrix& O, double t) const {
    const Eigen::VectorXcd ph =
        (imag_i * t * energies_.array()).exp().matrix();
    const Eigen::MatrixXcd M = modes_.adjoint() * O.mat * modes_;
    return {modes_ * (ph.asDiagonal() * M * ph.conjugate().asDiagonal()) *
            modes_.adjoint()};
  }

 private:
  FockBasis basis_;
  Eigen::MatrixXcd modes_;
  Eigen::VectorXd energies_;
};

struct LocalWeights {
  double w_I = 0.0, w_eta = 0.0, w_plus = 0.0, w_minus = 0.0;
  double w() const { return w_plus + w_minus; }
};

// Squared overlaps of the site-i reduction of the vectorized operator with
// the orthonormal basis {I/sqrt2, eta/sqrt2, sigma+, sigma-}. The operator is
// HS-normalized internally, so the four weights sum to 1.
inline LocalWeights local_weights(const OperatorMatrix& O, int i) {
  const int L = O.sites();
  const auto n = Eigen::Index{1} << L;
  const int b = i - 1;
  const Eigen::Index low = Eigen::Index{1} << b;
  auto insert_bit = [&](Eigen::Index rest, int s) {
    const Eigen::Index lo = rest & (low - 1);
    const Eigen::Index hi = (rest >> b) << (b + 1);
    return hi | (static_cast<Eigen::Index>(s) << b) | lo;
  };
  const Eigen::Index nrest = n >> 1;
  double aI = 0, aE = 0, aP = 0, aM = 0, total = 0;
  for (Eigen::Index r = 0; r < nrest; ++r) {
    for (Eigen::Index rp = 0; rp < nrest; ++rp) {
      const complexd o00 = O.mat(insert_bit(r, 0), insert_bit(rp, 0));
      const complexd o01 = O.mat(insert_bit(r, 0), insert_bit(rp, 1));
      const complexd o10 = O.mat(insert_bit(r, 1), insert_bit(rp, 0));
      const complexd o11 = O.mat(insert_bit(r, 1), insert_bit(rp, 1));
      aI += std::norm((o00 + o11) / std::sqrt(2.0));
      aE += std::norm((o00 - o11) / std::sqrt(2.0));
      aP += std::norm(o10);
      aM += std::norm(o01);
      total += std::norm(o00) + std::norm(o01) + std::norm(o10) + std::norm(o11);
    }
  }
  if (total <= 0.0)
    throw corrupted_state_error("local_weights: zero operator");
  return {aI / total, aE / total, aP / total, aM / total};
}

// Operator entanglement entropy across the bond after site `cut`:
// vectorize, reshape to 4^{L_A} x 4^{L_B}, and take -sum s^2 log s^2 over
// normalized singular values.
inline double operator_entanglement(const OperatorMatrix& O, int cut) {
  const int L = O.sites();
  if (cut < 1 || cut >= L)
    throw invalid_spec_error("operator_entanglement: cut must split the chain");
  const Eigen::Index nA = Eigen::Index{1} << cut;
  const Eigen::Index nB = Eigen::Index{1} << (L - cut);
  Eigen::MatrixXcd M(nA * nA, nB * nB);
  for (Eigen::Index xB = 0; xB < nB; ++xB)
    for (Eigen::Index yB = 0; yB < nB; ++yB)
      for (Eigen::Index xA = 0; xA < nA; ++xA)
        for (Eigen::Index yA = 0; yA < nA; ++yA)
          M(xA * nA + yA, xB * nB + yB) =
              O.mat(xB * nA + xA, yB * nA + yA);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(M);
  Eigen::VectorXd s = svd.singularValues();
  const double nrm2 = s.squaredNorm();
  if (nrm2 <= 0.0) throw corrupted_state_error("operator_entanglement: zero");
  double S = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double p = s(k) * s(k) / nrm2;
    if (p > 1e-14) S -= p * std::log(p);
  }
  return S;
}

struct FloquetSpec {
  double omega;
  double period() const { return 2.0 / omega; }
};

// Stroboscopic conjugation by U_F = exp(-i H0 / omega) exp(-i H_imp / omega);
// each step advances time by T_F = 2 / omega.
class FloquetMap {
 public:
  FloquetMap(const ChainSpec& chain, const ImpuritySpec& impurity,
             double omega)
      : omega_(omega) {
    if (omega <= 0) throw invalid_spec_error("FloquetMap: omega must be > 0");
    const FockBasis basis(chain.L, ParitySector::full);
    // half period of free hopping, half period of hopping plus impurity;
    // the period is T_F = 2/omega
    const Eigen::MatrixXcd H0 =
        dense_hamiltonian(basis, SparseAction(chain));
    const Eigen::MatrixXcd Himp =
        dense_hamiltonian(basis, SparseAction(chain, impurity));
    uf_ = expm(H0, 1.0 / omega) * expm(Himp, 1.0 / omega);
  }

  OperatorMatrix step(const OperatorMatrix& O) const {
    return {uf_.adjoint() * O.mat * uf_};
  }

 private:
  static Eigen::MatrixXcd expm(const Eigen::MatrixXcd& H, double tau) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXcd ph =
        (-imag_i * tau * es.eigenvalues().array()).exp().matrix();
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  }

  double omega_;
  Eigen::MatrixXcd uf_;
};

// ---------------------------------------------------------------------------
// Free Majorana evolution for quadratic Hamiltonians with pairing.
//
// With gamma_{j,A} = c_j + c^dag_j and gamma_{j,B} = -i (c_j - c^dag_j),
// H = (i/4) sum A_ab gamma_a gamma_b with A real antisymmetric, and
// gamma(t) = exp(A t) gamma(0). Index a = 2(j-1) + s, s in {A=0, B=1}.
// ---------------------------------------------------------------------------
inline Eigen::MatrixXd majorana_generator(const QuadraticHamiltonian& H) {
  H.validate();
  const int L = H.size();
  if (H.hopping.imag().cwiseAbs().maxCoeff() > 1e-12 ||
      (H.pairing && H.pairing->imag().cwiseAbs().maxCoeff() > 1e-12))
    throw unsupported_hamiltonian_error(
        "majorana_generator: complex couplings not supported");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * L, 2 * L);
  for (int j = 0; j < L; ++j) {
    for (int k = 0; k < L; ++k) {
      const double h = H.hopping(j, k).real();
      const double p = H.pairing ? (*H.pairing)(j, k).real() : 0.0;
      A(2 * j + 0, 2 * k + 1) += -h + p;
      A(2 * j + 1, 2 * k + 0) += h + p;
    }
  }
  return A;
}

// Heisenberg coefficients of a weight-one operator in the Majorana basis;
// w(t) is the squared weight trapped on the two site-1 Majoranas.
struct MajoranaWeightSeries {
  std::vector<double> times;
  std::vector<double> w;
};

inline MajoranaWeightSeries majorana_free_evolve(
    const QuadraticHamiltonian& H, const std::vector<double>& times) {
  const int L = H.size();
  const Eigen::MatrixXd A = majorana_generator(H);
  // iA is Hermitian; exp(At) = W exp(-i Sigma t) W^dag.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(imag_i * A.cast<complexd>());
  const Eigen::MatrixXcd& W = es.eigenvectors();
  const Eigen::VectorXd& sig = es.eigenvalues();

  // c^dag_1 = (gamma_{1A} + i gamma_{1B}) / 2, HS-normalized.
  Eigen::VectorXcd a = Eigen::VectorXcd::Zero(2 * L);
  a(0) = 1.0 / std::sqrt(2.0);
  a(1) = imag_i / std::sqrt(2.0);
  // b(t) = R(t)^T a
  const Eigen::VectorXcd aw = W.transpose() * a;

  MajoranaWeightSeries series;
  series.times = times;
  series.w.reserve(times.size());
  for (double t : times) {
    const Eigen::VectorXcd ph = (-imag_i * t * sig.array()).exp().matrix();
    // b = (W ph W^dag)^T a = conj(W) ph W^T a
    const Eigen::VectorXcd b = W.conjugate() * ph.cwiseProduct(aw);
    series.w.push_back(std::norm(b(0)) + std::norm(b(1)));
  }
  return series;
}

// w(t) of O(0) = N_i under H0 + parity-breaking impurity, on the full basis.
struct WeightSeries {
  std::vector<double> times;
  std::vector<double> w;
  std::vector<LocalWeights> weights;
};

inline WeightSeries operator_weight_series(const ChainSpec& chain,
                                           std::optional<ImpuritySpec> imp,
                                           int site,
                                           const std::vector<double>& times) {
  const HeisenbergEvolver evolver(chain, imp);
  const OperatorMatrix O0 = OperatorMatrix::number_op(chain.L, site);
  WeightSeries out;
  out.times = times;
  for (double t : times) {
    const OperatorMatrix Ot = evolver.evolve(O0, t);
    const LocalWeights lw = local_weights(Ot, site);
    out.weights.push_back(lw);
    out.w.push_back(lw.w());
  }
  return out;
}

inline WeightSeries parity_breaking_w(const ChainSpec& chain, double delta,
                                      int site,
                                      const std::vector<double>& times) {
  const ImpuritySpec imp(ImpurityVariant::parity_breaking, delta, site, chain);
  return operator_weight_series(chain, imp, site, times);
}

}  // namespace impuritylab
