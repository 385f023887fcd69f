#pragma once

#include <atomic>
#include <cmath>
#include <map>
#include <random>
#include <thread>
#include <vector>

#include "impuritylab/common.hpp"
#include "impuritylab/freeprop.hpp"
#include "impuritylab/gaussian.hpp"
#include "impuritylab/lattice.hpp"

namespace impuritylab {

// Measurement-and-feedback protocol: per step, evolve by U(dt); with
// probability p_m measure every site of the impurity cluster in ascending
// order; if any outcome is occupied, reset the cluster to fully occupied.
struct MonitoredConfig {
  ChainSpec chain;
  ImpurityRegion region;
  double p_m = 0.1;
  double dt = 0.5;
  int steps = 100;
  int samples = 1;
  std::uint64_t seed = 0;
  std::vector<int> distribution_checkpoints;
  // Initial single-particle site; 0 selects the convention: region start for
  // a boundary region (start == 1), region center otherwise.
  int initial_site = 0;

  int resolved_initial_site() const {
    if (initial_site > 0) return initial_site;
    return region.start == 1 ? region.start : region.start + region.size / 2;
  }

  void validate() const {
    if (p_m < 0.0 || p_m > 1.0)
      throw invalid_spec_error("monitored: p_m must be in [0,1]");
    if (dt <= 0.0) throw invalid_spec_error("monitored: dt must be > 0");
    if (steps < 1) throw invalid_spec_error("monitored: steps must be >= 1");
    if (samples < 1)
      throw invalid_spec_error("monitored: samples must be >= 1");
    if (region.end() > chain.L)
      throw invalid_spec_error("monitored: region does not fit in chain");
    const int i0 = resolved_initial_site();
    if (i0 < 1 || i0 > chain.L)
      throw invalid_spec_error("monitored: initial site out of range");
  }
};

struct TrajectoryRecord {
  std::vector<double> N;         // per step, after measurement/reset
  std::vector<double> N_imp;
  std::vector<bool> reset_flag;
  // chi(theta_k), k = 0..L, at each requested checkpoint step
  std::map<int, std::vector<complexd>> chi_snapshots;
};

struct EnsembleResult {
  TimeSeries N_series;
  TimeSeries Nimp_series;
  std::map<int, std::vector<double>> distributions;  // checkpoint step -> P(n)
};

inline TrajectoryRecord run_trajectory(const MonitoredConfig& cfg,
                                       const SpectralPropagator& prop,
                                       std::uint64_t trajectory_index) {
  cfg.validate();
  std::mt19937_64 rng(derive_stream_seed(cfg.seed, trajectory_index));
  SlaterEngine state(prop, cfg.resolved_initial_site());

  TrajectoryRecord rec;
  rec.N.reserve(cfg.steps);
  rec.N_imp.reserve(cfg.steps);
  rec.reset_flag.reserve(cfg.steps);

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int step = 1; step <= cfg.steps; ++step) {
    state.advance(cfg.dt);
    bool reset = false;
    try {
      if (unif(rng) < cfg.p_m) {
        const int n_I = state.measure_cluster(cfg.region, rng);
        if (n_I > 0) {
          state.reset_cluster(cfg.region);
          reset = true;
        }
      }
    } catch (const corrupted_state_error& e) {
      throw corrupted_state_error("trajectory " +
                                  std::to_string(trajectory_index) + ": " +
                                  e.what());
    }
    rec.N.push_back(static_cast<double>(state.particle_count()));
    double nimp = 0.0;
    for (int j = cfg.region.start; j <= cfg.region.end(); ++j)
      nimp += state.occupation(j);
    rec.N_imp.push_back(nimp);
    rec.reset_flag.push_back(reset);

    for (int cp : cfg.distribution_checkpoints) {
      if (cp != step) continue;
      // Definite particle number r: chi(theta) = exp(i theta r).
      const int M = cfg.chain.L + 1;
      std::vector<complexd> chi(M);
      const double r = state.particle_count();
      for (int k = 0; k < M; ++k)
        chi[k] = std::exp(imag_i * (2.0 * pi * k / M) * r);
      rec.chi_snapshots[step] = std::move(chi);
    }
  }
  return rec;
}

inline EnsembleResult reduce_ensemble(const MonitoredConfig& cfg,
                                      const std::vector<TrajectoryRecord>& recs) {
  EnsembleResult out;
  const int S = cfg.steps;
  const auto n = static_cast<double>(recs.size());
  out.N_series.times.resize(S);
  out.N_series.mean.assign(S, 0.0);
  out.N_series.stderr_.assign(S, 0.0);
  out.Nimp_series = out.N_series;
  for (int s = 0; s < S; ++s) {
    out.N_series.times[s] = (s + 1) * cfg.dt;
    out.Nimp_series.times[s] = (s + 1) * cfg.dt;
    double m1 = 0, m2 = 0, i1 = 0, i2 = 0;
    for (const auto& r : recs) {
      m1 += r.N[s];
      m2 += r.N[s] * r.N[s];
      i1 += r.N_imp[s];
      i2 += r.N_imp[s] * r.N_imp[s];
    }
    m1 /= n;
    i1 /= n;
    out.N_series.mean[s] = m1;
    out.Nimp_series.mean[s] = i1;
    if (n > 1) {
      const double var_m = std::max(0.0, (m2 / n - m1 * m1) * n / (n - 1));
      const double var_i = std::max(0.0, (i2 / n - i1 * i1) * n / (n - 1));
      out.N_series.stderr_[s] = std::sqrt(var_m / n);
      out.Nimp_series.stderr_[s] = std::sqrt(var_i / n);
    }
  }
  for (int cp : cfg.distribution_checkpoints) {
    const int M = cfg.chain.L + 1;
    std::vector<complexd> chi(M, 0.0);
    for (const auto& r : recs) {
      const auto it = r.chi_snapshots.find(cp);
      if (it == r.chi_snapshots.end()) continue;
      for (int k = 0; k < M; ++k) chi[k] += it->second[k];
    }
    for (auto& c : chi) c /= n;
    out.distributions[cp] = number_distribution(chi).p;
  }
  return out;
}

inline std::vector<TrajectoryRecord> run_trajectories(
    const MonitoredConfig& cfg, const SpectralPropagator& prop, int workers) {
  std::vector<TrajectoryRecord> recs(cfg.samples);
  if (workers < 1) workers = 1;
  if (workers == 1) {
    for (int i = 0; i < cfg.samples; ++i)
      recs[i] = run_trajectory(cfg, prop, i);
    return recs;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next.fetch_add(1); i < cfg.samples;
             i = next.fetch_add(1))
          recs[i] = run_trajectory(cfg, prop, i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return recs;
}

inline EnsembleResult run_ensemble(const MonitoredConfig& cfg,
                                   int workers = 1) {
  cfg.validate();
  const SpectralPropagator prop(build_hopping(cfg.chain));
  return reduce_ensemble(cfg, run_trajectories(cfg, prop, workers));
}

}  // namespace impuritylab
