#include <catch2/catch_amalgamated.hpp>
#include <bit>
#include <random>

#include "impuritylab/exactmb.hpp"
#include "impuritylab/freeprop.hpp"
#include "impuritylab/opdyn.hpp"

using namespace impuritylab;

TEST_CASE("fock basis enumeration") {
  const FockBasis even2(2, ParitySector::even);
  REQUIRE(even2.dim() == 2);
  CHECK(even2.word(0) == 0b00u);
  CHECK(even2.word(1) == 0b11u);

  const FockBasis odd3(3, ParitySector::odd);
  CHECK(odd3.dim() == 4);

  const FockBasis full12(12, ParitySector::full);
  CHECK(full12.dim() == 4096);

  CHECK_THROWS_AS(FockBasis(25, ParitySector::full), resource_error);

  CHECK_THROWS_AS(even2.index(0b01u), sector_violation_error);
  CHECK(even2.contains(0b11u));
  CHECK_FALSE(even2.contains(0b10u));
}

TEST_CASE("jordan-wigner signs against exhaustive counting") {
  const int L = 6;
  for (FockWord w = 0; w < (FockWord{1} << L); ++w) {
    for (int site = 1; site <= L; ++site) {
      // independent recount of occupied sites left of `site`
      int below = 0;
      for (int j = 1; j < site; ++j)
        if (w & (FockWord{1} << (j - 1))) ++below;
      const int expected = (below % 2) ? -1 : 1;
      CHECK(jw_sign(w, site) == expected);

      FockWord word = w;
      int sign = 1;
      const bool was_occupied = w & (FockWord{1} << (site - 1));
      CHECK(apply_annihilate(word, site, sign) == was_occupied);
      if (was_occupied) {
        CHECK(sign == expected);
        CHECK(word == (w & ~(FockWord{1} << (site - 1))));
        // c^dag c = n restores the word with net sign +1
        CHECK(apply_create(word, site, sign));
        CHECK(word == w);
        CHECK(sign == 1);
      }
    }
  }
}

TEST_CASE("hamiltonians are hermitian for every variant") {
  const ChainSpec chain(6);
  for (ImpurityVariant v :
       {ImpurityVariant::density2, ImpurityVariant::density3,
        ImpurityVariant::raise3, ImpurityVariant::parity_breaking}) {
    const ImpuritySpec imp(v, 0.37, 2, chain);
    const FockBasis basis(6, ParitySector::full);
    const Eigen::MatrixXcd H =
        dense_hamiltonian(basis, SparseAction(chain, imp));
    CHECK((H - H.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("parity-breaking impurity rejects a fixed-parity basis") {
  const ChainSpec chain(6);
  const ImpuritySpec imp(ImpurityVariant::parity_breaking, 0.3, 1, chain);
  const SparseAction action(chain, imp);
  CHECK_FALSE(action.parity_preserving_action());
  const FockBasis odd(6, ParitySector::odd);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(odd.dim());
  x(0) = 1.0;
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(odd.dim());
  CHECK_THROWS_AS(action.accumulate(odd, x, y), sector_violation_error);
}

TEST_CASE("krylov propagation") {
  const ChainSpec chain(10);
  const ImpuritySpec imp(ImpurityVariant::raise3, 0.3, 1, chain);
  const FockBasis basis(10, ParitySector::odd);
  const SparseAction action(chain, imp);

  SECTION("norm and energy conservation") {
    ManyBodyState state = ManyBodyState::single_particle(basis, 1);
    const auto energy = [&] {
      const Eigen::VectorXcd hx = action.apply(basis, state.amps);
      return (state.amps.adjoint() * hx).real()(0);
    };
    const double e0 = energy();
    for (int step = 0; step < 40; ++step)
      evolve_krylov(state, action, 0.05, 1e-9);
    CHECK(std::abs(state.norm() - 1.0) < 1e-10);
    CHECK(std::abs(energy() - e0) < 1e-9);
  }

  SECTION("agreement with dense diagonalization at L=8") {
    const ChainSpec small(8);
    const ImpuritySpec imp8(ImpurityVariant::raise3, 0.3, 1, small);
    const FockBasis b8(8, ParitySector::odd);
    const SparseAction a8(small, imp8);
    ManyBodyState state = ManyBodyState::single_particle(b8, 2);
    const Eigen::VectorXcd psi0 = state.amps;
    const double t = 2.5;
    for (int step = 0; step < 50; ++step) evolve_krylov(state, a8, 0.05, 1e-10);

    const Eigen::MatrixXcd H = dense_hamiltonian(b8, a8);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXcd ph =
        (-imag_i * t * es.eigenvalues().array()).exp().matrix();
    const Eigen::VectorXcd expected =
        es.eigenvectors() * ph.cwiseProduct(es.eigenvectors().adjoint() * psi0);
    CHECK((state.amps - expected).cwiseAbs().maxCoeff() < 1e-8);
  }

  SECTION("invalid steps rejected") {
    ManyBodyState state = ManyBodyState::single_particle(basis, 1);
    CHECK_THROWS_AS(evolve_krylov(state, action, -0.1, 1e-9),
                    invalid_spec_error);
    CHECK_THROWS_AS(evolve_krylov(state, action, 0.1, 0.0),
                    invalid_spec_error);
  }
}

TEST_CASE("free many-body dynamics matches the single-particle propagator") {
  const ChainSpec chain(10);
  const FockBasis basis(10, ParitySector::odd);
  const SparseAction action(chain);  // no impurity
  const SpectralPropagator prop(build_hopping(chain));
  ManyBodyState state = ManyBodyState::single_particle(basis, 3);
  const double dt = 0.05;
  for (int step = 1; step <= 40; ++step) {
    evolve_krylov(state, action, dt, 1e-10);
    const Eigen::VectorXcd col = prop.column(step * dt, 3);
    for (int j = 1; j <= 10; ++j)
      CHECK(std::abs(site_occupation(basis, state.amps, j) -
                     std::norm(col(j - 1))) < 1e-8);
  }
}

TEST_CASE("observables") {
  const ChainSpec chain(8);
  const ImpuritySpec imp(ImpurityVariant::raise3, 0.4, 1, chain);
  const ImpurityRegion region = impurity_region(1, 4, chain);
  const FockBasis basis(8, ParitySector::odd);
  const SparseAction action(chain, imp);

  SECTION("initial single particle inside the region") {
    const ManyBodyState state = ManyBodyState::single_particle(basis, 2);
    const Observables obs = measure_observables(state, region, imp, true);
    CHECK(obs.N == Catch::Approx(1.0).margin(1e-12));
    CHECK(obs.N_imp == Catch::Approx(1.0).margin(1e-12));
    CHECK(obs.J == Catch::Approx(0.0).margin(1e-12));
    CHECK(obs.distribution[1] == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("raise3 keeps the distribution on odd n") {
    ManyBodyState state = ManyBodyState::single_particle(basis, 1);
    for (int step = 0; step < 40; ++step)
      evolve_krylov(state, action, 0.1, 1e-9);
    const Observables obs = measure_observables(state, region, imp, true);
    for (int n = 0; n <= 8; n += 2)
      CHECK(obs.distribution[n] < 1e-10);
    CHECK(obs.N > 1.0 + 1e-3);  // impurity has injected weight
  }

  SECTION("parity expectation is conserved") {
    const FockBasis full(8, ParitySector::full);
    const SparseAction act_full(chain, imp);
    ManyBodyState state = ManyBodyState::single_particle(full, 1);
    const auto parity = [&] {
      double p = 0.0;
      for (std::size_t idx = 0; idx < full.dim(); ++idx)
        p += (std::popcount(full.word(idx)) % 2 ? -1.0 : 1.0) *
             std::norm(state.amps(idx));
      return p;
    };
    const double p0 = parity();
    for (int step = 0; step < 30; ++step)
      evolve_krylov(state, act_full, 0.1, 1e-9);
    CHECK(std::abs(parity() - p0) < 1e-9);
  }

  SECTION("J is real and drives dN/dt") {
    ManyBodyState state = ManyBodyState::single_particle(basis, 2);
    const double dt = 0.02;
    std::vector<double> N, J;
    for (int step = 0; step <= 100; ++step) {
      const Observables obs = measure_observables(state, region, imp);
      N.push_back(obs.N);
      J.push_back(obs.J);
      evolve_krylov(state, action, dt, 1e-10);
    }
    double max_dev = 0.0;
    for (std::size_t s = 1; s + 1 < N.size(); ++s)
      max_dev = std::max(
          max_dev, std::abs((N[s + 1] - N[s - 1]) / (2 * dt) - 2.0 * J[s]));
    CHECK(max_dev < 1e-3);
  }
}
