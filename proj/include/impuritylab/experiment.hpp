#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <thread>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "impuritylab/common.hpp"
#include "impuritylab/exactmb.hpp"
#include "impuritylab/freeprop.hpp"
#include "impuritylab/gaussian.hpp"
#include "impuritylab/io.hpp"
#include "impuritylab/lattice.hpp"
#include "impuritylab/monitored.hpp"
#include "impuritylab/opdyn.hpp"
#include "impuritylab/renewal.hpp"

namespace impuritylab {

inline const std::vector<std::string> experiment_kinds = {
    "monitored", "particle",         "operator", "return-prob",
    "renewal",   "entropy-estimate", "fcs-check"};

namespace detail {

inline int edit_distance(const std::string& a, const std::string& b) {
  std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const int sub = prev[j - 1] + (std::tolower(a[i - 1]) !=
                                             std::tolower(b[j - 1])
                                         ? 1
                                         : 0);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

}  // namespace detail

// Validating reader over a flat JSON config object. Accessors register the
// keys they consume; finish() flags every unconsumed key (with a
// nearest-known-key suggestion) and throws one error listing every problem,
// not just the first.
class ConfigReader {
 public:
  explicit ConfigReader(const nlohmann::json& obj) : obj_(&obj) {
    if (!obj.is_object()) errors_.push_back("config must be a JSON object");
  }

  double number(const std::string& key, std::optional<double> def,
                double lo = -1e300, double hi = 1e300) {
    known_.insert(key);
    if (!obj_->contains(key)) {
      if (!def) errors_.push_back(key + ": required");
      return def.value_or(0.0);
    }
    const auto& v = (*obj_)[key];
    if (!v.is_number()) {
      errors_.push_back(key + ": must be a number");
      return def.value_or(0.0);
    }
    const double x = v.get<double>();
    if (x < lo || x > hi)
      errors_.push_back(key + ": " + format_number(x) + " outside [" +
                        format_number(lo) + ", " + format_number(hi) + "]");
    return x;
  }

  int integer(const std::string& key, std::optional<int> def, int lo,
              int hi = std::numeric_limits<int>::max()) {
    known_.insert(key);
    if (!obj_->contains(key)) {
      if (!def) errors_.push_back(key + ": required");
      return def.value_or(0);
    }
    const auto& v = (*obj_)[key];
    if (!v.is_number_integer()) {
      errors_.push_back(key + ": must be an integer");
      return def.value_or(0);
    }
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
      errors_.push_back(key + ": " + std::to_string(x) + " outside [" +
                        std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return def.value_or(lo);
    }
    return static_cast<int>(x);
  }

  std::uint64_t uinteger(const std::string& key, std::uint64_t def) {
    known_.insert(key);
    if (!obj_->contains(key)) return def;
    const auto& v = (*obj_)[key];
    const bool ok = v.is_number_unsigned() ||
                    (v.is_number_integer() && v.get<long long>() >= 0);
    if (!ok) {
      errors_.push_back(key + ": must be a nonnegative integer");
      return def;
    }
    return v.get<std::uint64_t>();
  }

  std::string choice(const std::string& key, std::optional<std::string> def,
                     const std::vector<std::string>& allowed) {
    known_.insert(key);
    if (!obj_->contains(key)) {
      if (!def) errors_.push_back(key + ": required");
      return def.value_or(std::string{});
    }
    const auto& v = (*obj_)[key];
    if (!v.is_string()) {
      errors_.push_back(key + ": must be a string");
      return def.value_or(std::string{});
    }
    const auto s = v.get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string msg = key + ": '" + s + "' not one of {";
      for (std::size_t i = 0; i < allowed.size(); ++i)
        msg += (i ? ", " : "") + allowed[i];
      errors_.push_back(msg + "}");
      return def.value_or(allowed.empty() ? std::string{} : allowed[0]);
    }
    return s;
  }

  std::string text(const std::string& key, const std::string& def) {
    known_.insert(key);
    if (!obj_->contains(key)) return def;
    const auto& v = (*obj_)[key];
    if (!v.is_string()) {
      errors_.push_back(key + ": must be a string");
      return def;
    }
    return v.get<std::string>();
  }

  std::vector<int> int_list(const std::string& key) {
    known_.insert(key);
    std::vector<int> out;
    if (!obj_->contains(key)) return out;
    const auto& v = (*obj_)[key];
    if (!v.is_array()) {
      errors_.push_back(key + ": must be an array of integers");
      return out;
    }
    for (const auto& e : v) {
      if (!e.is_number_integer()) {
        errors_.push_back(key + ": must be an array of integers");
        return {};
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  void note_error(const std::string& msg) { errors_.push_back(msg); }

  // Unknown-key scan plus the aggregate throw.
  void finish() const {
    std::vector<std::string> errors = errors_;
    if (obj_->is_object()) {
      for (auto it = obj_->begin(); it != obj_->end(); ++it) {
        if (known_.count(it.key())) continue;
        std::string msg = "unknown key '" + it.key() + "'";
        int best = 3;
        std::string suggestion;
        for (const auto& k : known_) {
          const int d = detail::edit_distance(it.key(), k);
          if (d < best) {
            best = d;
            suggestion = k;
          }
        }
        if (!suggestion.empty()) msg += " (did you mean '" + suggestion + "'?)";
        errors.push_back(msg);
      }
    }
    if (!errors.empty()) {
      std::string all = "invalid config:";
      for (const auto& e : errors) all += "\n  - " + e;
      throw invalid_spec_error(all);
    }
  }

 private:
  const nlohmann::json* obj_;
  std::set<std::string> known_;
  std::vector<std::string> errors_;
};

struct ExperimentConfig {
  std::string kind;
  nlohmann::json params;  // flat object; includes seed/output_dir/workers
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  int workers = 1;
};

// Boundary placement anchors the region at site 1; bulk placement centers it
// on site floor(L/2).
inline ImpurityRegion placed_region(const std::string& placement, int m,
                                    const ChainSpec& chain) {
  if (placement == "boundary") return impurity_region(1, m, chain);
  const int center = chain.L / 2;
  return impurity_region(center - m / 2, m, chain);
}

namespace detail {

inline CsvTable distribution_table(const std::vector<double>& p) {
  CsvTable t;
  t.header = {"n", "P"};
  for (std::size_t n = 0; n < p.size(); ++n)
    t.rows.push_back({std::to_string(n), format_number(p[n])});
  return t;
}

inline std::string checkpoint_name(int step) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "distribution_step%04d.csv", step);
  return buf;
}

// Shared key set for the reserved top-level fields.
inline void reserve_common(ConfigReader& r) {
  r.uinteger("seed", 0);
  r.text("output_dir", "out");
  r.integer("workers", 0, 0, 1 << 16);
}

}  // namespace detail

// --------------------------------------------------------------------------
// kind: monitored
// --------------------------------------------------------------------------
inline MonitoredConfig parse_monitored(const nlohmann::json& params,
                                       std::uint64_t seed) {
  ConfigReader r(params);
  detail::reserve_common(r);
  const int L = r.integer("L", std::nullopt, 2);
  const double p_m = r.number("p_m", std::nullopt, 0.0, 1.0);
  const int steps = r.integer("steps", std::nullopt, 1);
  const int samples = r.integer("samples", std::nullopt, 1);
  const double dt = r.number("dt", 0.5, 1e-9);
  const int m = r.integer("m", 5, 1);
  const std::string placement =
      r.choice("placement", std::string("boundary"), {"boundary", "bulk"});
  const int initial_site = r.integer("initial_site", 0, 0);
  const std::vector<int> checkpoints = r.int_list("checkpoints");
  for (int cp : checkpoints)
    if (cp < 1 || cp > steps)
      r.note_error("checkpoints: step " + std::to_string(cp) +
                   " outside [1, steps]");
  r.finish();

  ChainSpec chain(L);
  MonitoredConfig cfg{chain, placed_region(placement, m, chain)};
  cfg.p_m = p_m;
  cfg.dt = dt;
  cfg.steps = steps;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.distribution_checkpoints = checkpoints;
  cfg.initial_site = initial_site;
  cfg.validate();
  return cfg;
}

inline void run_monitored(const ExperimentConfig& cfg, RunRecorder& rec) {
  const MonitoredConfig mc = parse_monitored(cfg.params, cfg.seed);
  const EnsembleResult res = run_ensemble(mc, cfg.workers);
  CsvTable t;
  t.header = {"step", "t", "N_mean", "N_stderr", "Nimp_mean", "Nimp_stderr"};
  for (std::size_t s = 0; s < res.N_series.times.size(); ++s)
    t.rows.push_back({std::to_string(s + 1),
                      format_number(res.N_series.times[s]),
                      format_number(res.N_series.mean[s]),
                      format_number(res.N_series.stderr_[s]),
                      format_number(res.Nimp_series.mean[s]),
                      format_number(res.Nimp_series.stderr_[s])});
  rec.write_csv("monitored.csv", t);
  for (const auto& [step, p] : res.distributions)
    rec.write_csv(detail::checkpoint_name(step),
                  detail::distribution_table(p));
}

// --------------------------------------------------------------------------
// kind: particle (exact many-body impurity dynamics)
// --------------------------------------------------------------------------
struct ParticleParams {
  ChainSpec chain;
  ImpuritySpec impurity;
  int initial_site;
  double t_max, dt, tol;
  std::vector<int> checkpoints;
};

inline ImpurityVariant variant_from_name(const std::string& s) {
  if (s == "density2") return ImpurityVariant::density2;
  if (s == "density3") return ImpurityVariant::density3;
  if (s == "raise3") return ImpurityVariant::raise3;
  return ImpurityVariant::parity_breaking;
}

inline ParticleParams parse_particle(const nlohmann::json& params) {
  ConfigReader r(params);
  detail::reserve_common(r);
  const int L = r.integer("L", std::nullopt, 2);
  const double delta = r.number("delta", std::nullopt);
  const std::string variant =
      r.choice("variant", std::string("raise3"),
               {"density2", "density3", "raise3", "parity_breaking"});
  const int site = r.integer("site", 1, 1);
  const int initial_site = r.integer("initial_site", site, 1);
  const double t_max = r.number("t_max", 10.0, 1e-9);
  const double dt = r.number("dt", 0.05, 1e-9);
  const double tol = r.number("tol", 1e-9, 1e-15, 1.0);
  const std::vector<int> checkpoints = r.int_list("checkpoints");
  r.finish();
  const ChainSpec chain(L);
  return ParticleParams{chain,
                        ImpuritySpec(variant_from_name(variant), delta, site,
                                     chain),
                        initial_site,
                        t_max,
                        dt,
                        tol,
                        checkpoints};
}

inline void run_particle(const ExperimentConfig& cfg, RunRecorder& rec) {
  const ParticleParams p = parse_particle(cfg.params);
  const bool fixed_sector = parity_preserving(p.impurity.variant);
  const FockBasis basis(p.chain.L,
                        fixed_sector ? ParitySector::odd : ParitySector::full);
  const SparseAction action(p.chain, p.impurity);
  const ImpurityRegion region =
      impurity_region(p.impurity.site, p.impurity.support_width(), p.chain);
  ManyBodyState state = ManyBodyState::single_particle(basis, p.initial_site);

  const int steps = static_cast<int>(std::round(p.t_max / p.dt));
  CsvTable t;
  t.header = {"t", "N", "N_imp", "J"};
  const auto emit = [&](int step) {
    const bool want_dist =
        std::find(p.checkpoints.begin(), p.checkpoints.end(), step) !=
        p.checkpoints.end();
    const Observables obs =
        measure_observables(state, region, p.impurity, want_dist);
    t.rows.push_back({format_number(step * p.dt), format_number(obs.N),
                      format_number(obs.N_imp), format_number(obs.J)});
    if (want_dist)
      rec.write_csv(detail::checkpoint_name(step),
                    detail::distribution_table(obs.distribution));
  };
  emit(0);
  for (int step = 1; step <= steps; ++step) {
    evolve_krylov(state, action, p.dt, p.tol);
    emit(step);
  }
  rec.write_csv("particle.csv", t);
}

// --------------------------------------------------------------------------
// kind: operator (Heisenberg weight and operator entanglement)
// --------------------------------------------------------------------------
inline void run_operator(const ExperimentConfig& cfg, RunRecorder& rec) {
  ConfigReader r(cfg.params);
  detail::reserve_common(r);
  const int L = r.integer("L", std::nullopt, 2, operator_site_cap);
  const double delta = r.number("delta", 0.0);
  const std::string variant =
      r.choice("variant", std::string("density2"),
               {"density2", "density3", "raise3", "parity_breaking"});
  const int site = r.integer("site", 1, 1);
  const double t_max = r.number("t_max", 10.0, 1e-9);
  const double dt = r.number("dt", 0.5, 1e-9);
  const int cut = r.integer("cut", L / 2, 1, std::max(1, L - 1));
  const bool with_entropy = r.integer("entropy", 1, 0, 1) != 0;
  if (with_entropy && L > entanglement_site_cap)
    r.note_error("entropy: operator entanglement capped at L = " +
                 std::to_string(entanglement_site_cap));
  r.finish();

  const ChainSpec chain(L);
  std::optional<ImpuritySpec> imp;
  if (delta != 0.0)
    imp.emplace(variant_from_name(variant), delta, site, chain);
  const HeisenbergEvolver evolver(chain, imp);
  const OperatorMatrix O0 = OperatorMatrix::number_op(L, site);

  CsvTable t;
  t.header = {"t", "w", "w_I", "w_eta", "w_plus", "w_minus", "op_entropy"};
  const int steps = static_cast<int>(std::round(t_max / dt));
  for (int step = 0; step <= steps; ++step) {
    const double time = step * dt;
    const OperatorMatrix Ot = evolver.evolve(O0, time);
    const LocalWeights lw = local_weights(Ot, site);
    const double ent = with_entropy ? operator_entanglement(Ot, cut) : 0.0;
    t.rows.push_back({format_number(time), format_number(lw.w()),
                      format_number(lw.w_I), format_number(lw.w_eta),
                      format_number(lw.w_plus), format_number(lw.w_minus),
                      format_number(ent)});
  }
  rec.write_csv("operator.csv", t);
}

// --------------------------------------------------------------------------
// kind: return-prob (free return probability with envelope flags)
// --------------------------------------------------------------------------
inline std::vector<bool> envelope_flags(const ReturnSeries& s) {
  std::vector<bool> flags(s.values.size(), false);
  for (std::size_t i :
       envelope_indices(s, s.times.front(), s.times.back()))
    flags[i] = true;
  return flags;
}

inline void run_return_prob(const ExperimentConfig& cfg, RunRecorder& rec) {
  ConfigReader r(cfg.params);
  detail::reserve_common(r);
  const int L = r.integer("L", std::nullopt, 2);
  const std::string placement =
      r.choice("placement", std::string("boundary"), {"boundary", "bulk"});
  const int m = r.integer("m", 1, 1);
  const double t_max = r.number("t_max", 200.0, 1e-9);
  const double dt_grid = r.number("dt_grid", 0.1, 1e-9);
  r.finish();

  const ChainSpec chain(L);
  const ImpurityRegion region = placed_region(placement, m, chain);
  const int source =
      placement == "boundary" ? 1 : region.start + region.size / 2;
  std::vector<double> times;
  for (double t = 0.0; t <= t_max + 1e-12; t += dt_grid) times.push_back(t);
  const ReturnSeries series =
      return_probability(build_hopping(chain), region, source, times);
  const std::vector<bool> flags = envelope_flags(series);
  CsvTable t;
  t.header = {"t", "P", "envelope_flag"};
  for (std::size_t i = 0; i < series.times.size(); ++i)
    t.rows.push_back({format_number(series.times[i]),
                      format_number(series.values[i]), flags[i] ? "1" : "0"});
  rec.write_csv("return_prob.csv", t);
}

// --------------------------------------------------------------------------
// kind: renewal (dressed return probability)
// --------------------------------------------------------------------------
inline void run_renewal(const ExperimentConfig& cfg, RunRecorder& rec) {
  ConfigReader r(cfg.params);
  detail::reserve_common(r);
  const std::string kind =
      r.choice("kernel", std::string("bulk"), {"bulk", "boundary"});
  const double p_m = r.number("p_m", std::nullopt, 0.0, 1.0);
  const double t_max = r.number("t_max", 500.0, 1.0);
  const double dt_grid = r.number("dt_grid", 0.1, 1e-9);
  r.finish();

  ReturnKernel kernel = kind == "bulk" ? bulk_kernel(t_max, dt_grid)
                                       : boundary_kernel(t_max, dt_grid);
  solve_renewal(kernel, p_m);
  const ReturnSeries series = kernel.dressed_probability();
  const std::vector<bool> flags = envelope_flags(series);
  CsvTable t;
  t.header = {"t", "P", "envelope_flag"};
  for (std::size_t i = 0; i < series.times.size(); ++i)
    t.rows.push_back({format_number(series.times[i]),
                      format_number(series.values[i]), flags[i] ? "1" : "0"});
  rec.write_csv("renewal.csv", t);
}

// --------------------------------------------------------------------------
// kind: entropy-estimate (configurational entropy estimator)
// --------------------------------------------------------------------------
inline void run_entropy_estimate(const ExperimentConfig& cfg,
                                 RunRecorder& rec) {
  ConfigReader r(cfg.params);
  detail::reserve_common(r);
  const std::string schedule =
      r.choice("schedule", std::string("fixed"), {"fixed", "log"});
  const double xi = r.number("xi", 1.0, 1e-12);
  const double v = r.number("v", 2.0, 1e-12);
  const double t_min = r.number("t_min", 10.0, 1.0);
  const double t_max = r.number("t_max", 1e4, 1.0);
  const int points = r.integer("points", 50, 2);
  if (t_max <= t_min) r.note_error("t_max: must exceed t_min");
  r.finish();

  CsvTable t;
  t.header = {"t", "S_conf"};
  for (int i = 0; i < points; ++i) {
    const double lt = std::log(t_min) +
                      (std::log(t_max) - std::log(t_min)) * i / (points - 1);
    const double time = std::exp(lt);
    const double x = schedule == "log" ? xi * std::log(time) : xi;
    const ConfigEntropyResult res = config_entropy({x, v, time});
    t.rows.push_back({format_number(time), format_number(res.s_conf)});
  }
  rec.write_csv("entropy_estimate.csv", t);
}

// --------------------------------------------------------------------------
// kind: fcs-check (determinant counting statistics vs brute force)
// --------------------------------------------------------------------------
struct FcsCheckResult {
  double max_chi_deviation = 0.0;
  double max_pn_deviation = 0.0;
  double pn_total = 0.0;
};

inline FcsCheckResult fcs_check(int L, int fill, double t) {
  // Gaussian side: occupy the first `fill` sites, evolve freely.
  const ChainSpec chain(L);
  const QuadraticHamiltonian H = build_hopping(chain);
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(L, L);
  for (int j = 0; j < fill; ++j) C(j, j) = 1.0;
  GaussianState state(std::move(C));
  state.evolve(propagator(H, t).matrix);

  // Brute-force side: the same evolution on the 2^L amplitudes.
  const FockBasis basis(L, ParitySector::full);
  const SparseAction action(chain);
  ManyBodyState mb;
  mb.basis = &basis;
  mb.amps = Eigen::VectorXcd::Zero(basis.dim());
  mb.amps(basis.index((FockWord{1} << fill) - 1)) = 1.0;
  evolve_krylov(mb, action, t, 1e-12);

  FcsCheckResult res;
  const int M = L + 1;
  std::vector<complexd> chi_det(M);
  for (int k = 0; k < M; ++k) {
    const double theta = 2.0 * pi * k / M;
    chi_det[k] = state.counting_characteristic(theta);
    complexd brute = 0.0;
    for (std::size_t idx = 0; idx < basis.dim(); ++idx)
      brute += std::norm(mb.amps(idx)) *
               std::exp(imag_i * theta *
                        static_cast<double>(std::popcount(basis.word(idx))));
    res.max_chi_deviation =
        std::max(res.max_chi_deviation, std::abs(chi_det[k] - brute));
  }

  std::vector<double> pn_brute(M, 0.0);
  for (std::size_t idx = 0; idx < basis.dim(); ++idx)
    pn_brute[std::popcount(basis.word(idx))] += std::norm(mb.amps(idx));
  const NumberDistribution dist = number_distribution(chi_det);
  for (int n = 0; n < M; ++n) {
    res.max_pn_deviation =
        std::max(res.max_pn_deviation, std::abs(dist.p[n] - pn_brute[n]));
    res.pn_total += dist.p[n];
  }
  return res;
}

inline void run_fcs_check(const ExperimentConfig& cfg, RunRecorder& rec) {
  ConfigReader r(cfg.params);
  detail::reserve_common(r);
  const int L = r.integer("L", 6, 2, 16);
  const int fill = r.integer("fill", L / 2, 1, L);
  const double t = r.number("t", 3.0, 0.0);
  const double tol = r.number("tol", 1e-10, 0.0);
  r.finish();

  const FcsCheckResult res = fcs_check(L, fill, t);
  nlohmann::json out;
  out["max_chi_deviation"] = res.max_chi_deviation;
  out["max_pn_deviation"] = res.max_pn_deviation;
  out["pn_total"] = res.pn_total;
  out["tolerance"] = tol;
  out["pass"] = res.max_chi_deviation < tol && res.max_pn_deviation < tol;
  rec.write_json("fcs_check.json", out);
  std::printf("fcs-check: max chi deviation %.3e, max P(n) deviation %.3e\n",
              res.max_chi_deviation, res.max_pn_deviation);
  if (!out["pass"].get<bool>())
    throw numeric_error("fcs-check: deviation exceeds tolerance");
}

// --------------------------------------------------------------------------
// top level
// --------------------------------------------------------------------------
inline ExperimentConfig parse_config(const std::string& kind,
                                     const nlohmann::json& file_params,
                                     std::optional<std::uint64_t> seed_flag,
                                     std::optional<int> workers_flag,
                                     std::optional<std::string> out_flag) {
  if (std::find(experiment_kinds.begin(), experiment_kinds.end(), kind) ==
      experiment_kinds.end())
    throw invalid_spec_error("unknown experiment kind '" + kind + "'");
  ExperimentConfig cfg;
  cfg.kind = kind;
  cfg.params = file_params;
  if (!file_params.is_object())
    throw invalid_spec_error("config root must be a JSON object");
  cfg.seed = seed_flag.value_or(
      file_params.value("seed", std::uint64_t{0}));
  cfg.workers = workers_flag.value_or(file_params.value("workers", 0));
  if (cfg.workers == 0)
    cfg.workers = static_cast<int>(
        std::max(1u, std::thread::hardware_concurrency()));
  cfg.output_dir =
      out_flag.value_or(file_params.value("output_dir", std::string("out")));
  // record the effective values in the echoed config
  cfg.params["seed"] = cfg.seed;
  cfg.params["workers"] = cfg.workers;
  cfg.params["output_dir"] = cfg.output_dir;
  return cfg;
}

inline void run_experiment(const ExperimentConfig& cfg) {
  nlohmann::json echo = cfg.params;
  echo["kind"] = cfg.kind;
  RunRecorder rec(cfg.output_dir, echo);
  if (cfg.kind == "monitored")
    run_monitored(cfg, rec);
  else if (cfg.kind == "particle")
    run_particle(cfg, rec);
  else if (cfg.kind == "operator")
    run_operator(cfg, rec);
  else if (cfg.kind == "return-prob")
    run_return_prob(cfg, rec);
  else if (cfg.kind == "renewal")
    run_renewal(cfg, rec);
  else if (cfg.kind == "entropy-estimate")
    run_entropy_estimate(cfg, rec);
  else if (cfg.kind == "fcs-check")
    run_fcs_check(cfg, rec);
  else
    throw invalid_spec_error("unknown experiment kind '" + cfg.kind + "'");
  rec.finalize();
}

}  // namespace impuritylab
