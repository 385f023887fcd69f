#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "impuritylab/freeprop.hpp"
#include "impuritylab/gaussian.hpp"
#include "impuritylab/lattice.hpp"
#include "support/exact_oracle.hpp"

using namespace impuritylab;

namespace {

Eigen::MatrixXcd random_orbitals(int L, int r, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd A(L, r);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < r; ++j) A(i, j) = complexd(gauss(rng), gauss(rng));
  return Eigen::HouseholderQR<Eigen::MatrixXcd>(A)
      .householderQ() *
      Eigen::MatrixXcd::Identity(L, r);
}

struct StatePair {
  GaussianState gaussian;
  oracle::ExactState exact;
};

StatePair random_slater_pair(int L, int r, std::mt19937_64& rng) {
  const Eigen::MatrixXcd phi = random_orbitals(L, r, rng);
  GaussianState g(phi.conjugate() * phi.transpose());
  oracle::ExactState e = oracle::ExactState::slater(phi);
  return {std::move(g), std::move(e)};
}

double corr_deviation(const GaussianState& g, const oracle::ExactState& e) {
  return (g.corr() - e.correlation_matrix()).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("slater construction matches the oracle") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const int L = 4 + rep % 3;
    const int r = 1 + rep % 3;
    const StatePair sp = random_slater_pair(L, r, rng);
    CHECK(std::abs(sp.exact.amps().norm() - 1.0) < 1e-12);
    CHECK(corr_deviation(sp.gaussian, sp.exact) < 1e-12);
  }
}

TEST_CASE("free evolution matches the oracle") {
  std::mt19937_64 rng(5);
  const int L = 6;
  const QuadraticHamiltonian H = build_hopping(ChainSpec(L));
  for (int rep = 0; rep < 5; ++rep) {
    StatePair sp = random_slater_pair(L, 2, rng);
    const double t = 0.3 + 0.4 * rep;
    sp.gaussian.evolve(propagator(H, t).matrix);
    sp.exact.evolve(H.hopping, t);
    CHECK(corr_deviation(sp.gaussian, sp.exact) < 1e-10);
  }
}

TEST_CASE("random interleavings match the exact simulation") {
  // evolve / single-site measure / cluster measure + reset, in random order,
  // with outcomes sampled by the engine and forced on the oracle.
  std::mt19937_64 rng(42);
  const int interleavings = 200;
  int resets_exercised = 0;
  for (int rep = 0; rep < interleavings; ++rep) {
    const int L = 4 + static_cast<int>(rng() % 3);  // 4..6
    const int m = 2;
    const ImpurityRegion region{1 + static_cast<int>(rng() % (L - m + 1)), m};
    const QuadraticHamiltonian H = build_hopping(ChainSpec(L));
    const SpectralPropagator prop(H);

    const int init = 1 + static_cast<int>(rng() % L);
    GaussianState g = GaussianState::single_particle(L, init);
    oracle::ExactState e(L, init);
    // seed extra particles half the time so resets can drop occupation
    if (rng() % 2) {
      StatePair sp = random_slater_pair(L, 2, rng);
      g = std::move(sp.gaussian);
      e = std::move(sp.exact);
    }

    const int ops = 3 + static_cast<int>(rng() % 4);
    for (int op = 0; op < ops; ++op) {
      switch (rng() % 3) {
        case 0: {
          const double t = 0.2 + 0.1 * static_cast<double>(rng() % 10);
          g.evolve(prop.matrix(t));
          e.evolve(H.hopping, t);
          break;
        }
        case 1: {
          const int j = 1 + static_cast<int>(rng() % L);
          const double p_oracle = e.occupation_probability(j);
          const MeasurementOutcome out = g.measure_occupation(j, rng);
          const double p_engine = out.occupied ? out.probability
                                               : 1.0 - out.probability;
          REQUIRE(std::abs(p_engine - p_oracle) < 1e-9);
          e.project(j, out.occupied);
          break;
        }
        default: {
          int n_I = 0;
          for (int j = region.start; j <= region.end(); ++j) {
            const MeasurementOutcome out = g.measure_occupation(j, rng);
            e.project(j, out.occupied);
            if (out.occupied) ++n_I;
          }
          if (n_I > 0) {
            g.reset_cluster(region);
            e.reset_cluster(region.start, region.size);
            ++resets_exercised;
          }
          break;
        }
      }
      REQUIRE(corr_deviation(g, e) < 1e-10);
    }
  }
  CHECK(resets_exercised > 20);
}

TEST_CASE("correlation matrix eigenvalues stay in [0, 1]") {
  std::mt19937_64 rng(9);
  const int L = 6;
  const QuadraticHamiltonian H = build_hopping(ChainSpec(L));
  const SpectralPropagator prop(H);
  GaussianState g = random_slater_pair(L, 3, rng).gaussian;
  for (int op = 0; op < 30; ++op) {
    g.evolve(prop.matrix(0.7));
    g.measure_occupation(1 + static_cast<int>(rng() % L), rng);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g.corr());
    CHECK(es.eigenvalues().minCoeff() > -1e-9);
    CHECK(es.eigenvalues().maxCoeff() < 1.0 + 1e-9);
  }
}

TEST_CASE("counting statistics against brute force") {
  std::mt19937_64 rng(17);
  const int L = 6;
  const StatePair sp = random_slater_pair(L, 3, rng);

  SECTION("characteristic function, determinant vs sum over amplitudes") {
    for (int k = 0; k <= L; ++k) {
      const double theta = 2.0 * pi * k / (L + 1);
      CHECK(std::abs(sp.gaussian.counting_characteristic(theta) -
                     sp.exact.counting_characteristic(theta)) < 1e-10);
    }
  }

  SECTION("first moment: chi'(0) = i tr C") {
    const double h = 1e-6;
    const complexd d = (sp.gaussian.counting_characteristic(h) -
                        sp.gaussian.counting_characteristic(-h)) /
                       (2.0 * h);
    CHECK(std::abs(d - imag_i * sp.gaussian.total_number()) < 1e-6);
  }

  SECTION("inverted distribution matches the histogram and sums to 1") {
    const NumberDistribution dist = number_distribution(sp.gaussian);
    const std::vector<double> brute = sp.exact.number_histogram();
    double total = 0.0;
    for (int n = 0; n <= L; ++n) {
      CHECK(std::abs(dist.p[n] - brute[n]) < 1e-10);
      total += dist.p[n];
    }
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK_FALSE(dist.undersampled);
  }
}

TEST_CASE("number distribution clips and renormalizes") {
  // doctored characteristic function with small inconsistencies
  std::vector<complexd> chi(5, complexd(0.0, 0.0));
  for (int k = 0; k < 5; ++k)
    chi[k] = std::exp(imag_i * (2.0 * pi * k / 5.0)) * 0.9;
  const NumberDistribution dist = number_distribution(chi);
  CHECK(dist.undersampled);
  double total = 0.0;
  for (double p : dist.p) {
    CHECK(p >= 0.0);
    total += p;
  }
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("measurement outcome frequencies are Born-distributed") {
  const int L = 8;
  const QuadraticHamiltonian H = build_hopping(ChainSpec(L));
  const Eigen::MatrixXcd U = propagator(H, 1.3).matrix;
  GaussianState base = GaussianState::single_particle(L, 4);
  base.evolve(U);
  const double p = base.occupation(4);
  const int trials = 4000;
  int hits = 0;
  std::mt19937_64 rng(23);
  for (int i = 0; i < trials; ++i) {
    GaussianState g = base;
    if (g.measure_occupation(4, rng).occupied) ++hits;
  }
  const double freq = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt(p * (1.0 - p) / trials);
  CHECK(std::abs(freq - p) < 3.0 * sigma + 1e-12);
}

TEST_CASE("cluster outcome probabilities are order independent") {
  std::mt19937_64 rng(31);
  const int L = 5;
  const StatePair sp = random_slater_pair(L, 2, rng);
  const int a = 2, b = 3;
  for (int pattern = 0; pattern < 4; ++pattern) {
    const bool occ_a = pattern & 1, occ_b = pattern & 2;
    // ascending order: P(a) * P(b | a)
    GaussianState g1 = sp.gaussian;
    double p_asc = occ_a ? g1.occupation(a) : 1.0 - g1.occupation(a);
    g1.apply_projection(a, occ_a, g1.occupation(a));
    p_asc *= occ_b ? g1.occupation(b) : 1.0 - g1.occupation(b);
    // descending order
    GaussianState g2 = sp.gaussian;
    double p_desc = occ_b ? g2.occupation(b) : 1.0 - g2.occupation(b);
    g2.apply_projection(b, occ_b, g2.occupation(b));
    p_desc *= occ_a ? g2.occupation(a) : 1.0 - g2.occupation(a);
    CHECK(std::abs(p_asc - p_desc) < 1e-12);
    // both must agree with the direct many-body projector probability
    oracle::ExactState e = sp.exact;
    double p_direct = 0.0;
    {
      Eigen::VectorXcd amps = e.amps();
      for (std::int64_t w = 0; w < amps.size(); ++w) {
        const bool ba = w & (1 << (a - 1)), bb = w & (1 << (b - 1));
        if (ba == occ_a && bb == occ_b) p_direct += std::norm(amps(w));
      }
    }
    CHECK(std::abs(p_asc - p_direct) < 1e-12);
  }
}

TEST_CASE("slater engine agrees with the correlation-matrix engine") {
  const int L = 8;
  const ImpurityRegion region{1, 3};
  const QuadraticHamiltonian H = build_hopping(ChainSpec(L));
  const SpectralPropagator prop(H);
  const double dt = 0.5;

  // identical RNG streams keep the two engines in outcome lockstep
  std::mt19937_64 rng_a(77), rng_b(77);
  SlaterEngine fast(prop, 1);
  GaussianState slow = GaussianState::single_particle(L, 1);
  std::mt19937_64 protocol(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  for (int step = 0; step < 40; ++step) {
    fast.advance(dt);
    slow.evolve(prop.matrix(dt));
    if (unif(protocol) < 0.6) {
      const int n_fast = fast.measure_cluster(region, rng_a);
      int n_slow = 0;
      for (int j = region.start; j <= region.end(); ++j)
        if (slow.measure_occupation(j, rng_b).occupied) ++n_slow;
      REQUIRE(n_fast == n_slow);
      if (n_fast > 0) {
        fast.reset_cluster(region);
        slow.reset_cluster(region);
      }
    }
    REQUIRE((fast.correlation_matrix() - slow.corr()).cwiseAbs().maxCoeff() <
            1e-8);
    CHECK(std::abs(fast.particle_count() - slow.total_number()) < 1e-8);
  }
}
