#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdlib>
#include <optional>

#include "impuritylab/common.hpp"

namespace impuritylab {

// One-dimensional open chain. d is only used by the analytic exponent
// formulas; every simulated lattice is d = 1.
struct ChainSpec {
  int L = 0;
  int d = 1;

  explicit ChainSpec(int L_, int d_ = 1) : L(L_), d(d_) {
    if (L < 2) throw invalid_spec_error("ChainSpec: L must be >= 2");
    if (d < 1) throw invalid_spec_error("ChainSpec: d must be >= 1");
  }
};

// Single-particle data of a quadratic Hamiltonian. `hopping` is the L x L
// matrix h with H = sum h_jk c^dag_j c_k (chemical potential on the
// diagonal); `pairing`, when present, is the antisymmetric matrix P with
// H_pair = (1/2) sum P_jk (c^dag_j c^dag_k + h.c.).
struct QuadraticHamiltonian {
  Eigen::MatrixXcd hopping;
  std::optional<Eigen::MatrixXcd> pairing;
  double chemical = 0.0;

  int size() const { return static_cast<int>(hopping.rows()); }
  bool number_conserving() const { return !pairing.has_value(); }

  void validate() const {
    if ((hopping - hopping.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw invalid_spec_error("QuadraticHamiltonian: hopping not Hermitian");
    if (pairing) {
      if (pairing->rows() != hopping.rows())
        throw invalid_spec_error("QuadraticHamiltonian: pairing size mismatch");
      if ((*pairing + pairing->transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw invalid_spec_error(
            "QuadraticHamiltonian: pairing not antisymmetric");
    }
  }

  // 2L x 2L Bogoliubov-de Gennes matrix in the (c, c^dag) basis.
  Eigen::MatrixXcd bdg_matrix() const {
    const int L = size();
    Eigen::MatrixXcd bdg = Eigen::MatrixXcd::Zero(2 * L, 2 * L);
    bdg.topLeftCorner(L, L) = hopping;
    bdg.bottomRightCorner(L, L) = -hopping.transpose();
    if (pairing) {
      bdg.topRightCorner(L, L) = *pairing;
      bdg.bottomLeftCorner(L, L) = -pairing->conjugate();
    }
    return bdg;
  }
};

// Contiguous impurity region {start, ..., start + size - 1}, 1-based.
struct ImpurityRegion {
  int start = 1;
  int size = 1;

  int end() const { return start + size - 1; }
  bool contains(int site) const { return site >= start && site <= end(); }
};

inline ImpurityRegion impurity_region(int i, int m, const ChainSpec& spec) {
  if (m < 1) throw invalid_spec_error("impurity_region: size must be >= 1");
  if (i < 1 || i + m - 1 > spec.L)
    throw invalid_spec_error("impurity_region: region [" + std::to_string(i) +
                             "," + std::to_string(i + m - 1) +
                             "] does not fit in chain of length " +
                             std::to_string(spec.L));
  return ImpurityRegion{i, m};
}

enum class ImpurityVariant { density2, density3, raise3, parity_breaking };

inline int impurity_support_width(ImpurityVariant v) {
  switch (v) {
    case ImpurityVariant::density2: return 2;
    case ImpurityVariant::density3: return 3;
    case ImpurityVariant::raise3: return 4;
    case ImpurityVariant::parity_breaking: return 3;
  }
  std::abort();
}

inline bool parity_preserving(ImpurityVariant v) {
  return v != ImpurityVariant::parity_breaking;
}

struct ImpuritySpec {
  ImpurityVariant variant;
  double strength;  // Delta
  int site;         // anchor index i, 1-based

  ImpuritySpec(ImpurityVariant v, double delta, int i, const ChainSpec& spec)
      : variant(v), strength(delta), site(i) {
    const int w = impurity_support_width(v);
    if (i < 1 || i + w - 1 > spec.L)
      throw invalid_spec_error("ImpuritySpec: support [" + std::to_string(i) +
                               "," + std::to_string(i + w - 1) +
                               "] does not fit in chain of length " +
                               std::to_string(spec.L));
  }

  int support_width() const { return impurity_support_width(variant); }
};

// Nearest-neighbor hopping with amplitude 1 and open ends.
inline QuadraticHamiltonian build_hopping(const ChainSpec& spec) {
  QuadraticHamiltonian H;
  H.hopping = Eigen::MatrixXcd::Zero(spec.L, spec.L);
  for (int j = 0; j + 1 < spec.L; ++j) {
    H.hopping(j, j + 1) = 1.0;
    H.hopping(j + 1, j) = 1.0;
  }
  return H;
}

// Kitaev-type chain: hopping as above, mu on the diagonal, lambda pairing on
// the first superdiagonal (antisymmetrized). lambda = 0 carries no pairing
// block so that the mu = 0 case reduces exactly to build_hopping.
inline QuadraticHamiltonian build_kitaev(const ChainSpec& spec, double mu,
                                         double lambda) {
  QuadraticHamiltonian H = build_hopping(spec);
  H.chemical = mu;
  for (int j = 0; j < spec.L; ++j) H.hopping(j, j) = mu;
  if (lambda != 0.0) {
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(spec.L, spec.L);
    for (int j = 0; j + 1 < spec.L; ++j) {
      P(j, j + 1) = lambda;
      P(j + 1, j) = -lambda;
    }
    H.pairing = std::move(P);
  }
  return H;
}

enum class TopologicalPhase { trivial, critical, topological };

inline TopologicalPhase kitaev_phase(double mu, double lambda) {
  if (lambda == 0.0) return TopologicalPhase::trivial;
  const double a = std::abs(mu);
  if (a == 2.0) return TopologicalPhase::critical;
  return a < 2.0 ? TopologicalPhase::topological : TopologicalPhase::trivial;
}

}  // namespace impuritylab
