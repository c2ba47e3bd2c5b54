#include "asymflow/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>

#include <json.hpp>

#include "asymflow/analysis.hpp"
#include "asymflow/errors.hpp"
#include "asymflow/mms.hpp"
#include "asymflow/rng.hpp"
#include "asymflow/spaces.hpp"

namespace asymflow {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void log_line(int log_level, int min_level, const std::string& message) {
  if (log_level >= min_level) std::cerr << "[asymflow] " << message << "\n";
}

SpaceHandle build_minkowski_space(const ExperimentConfig& config) {
  const int dim = config.dim;
  if (config.norm_name == "randers") {
    Vec a = config.norm_param;
    if (a.empty()) a = Vec(static_cast<std::size_t>(dim), 0.0);
    return make_randers(dim, a);
  }
  if (config.norm_name == "ellipse") {
    Vec diag = config.norm_param;
    if (diag.empty()) diag = Vec(static_cast<std::size_t>(dim), 1.0);
    if (static_cast<int>(diag.size()) != dim)
      throw usage_error("minkowski ellipse norm_param length must equal dim");
    auto norm_fn = [diag](const Vec& v) {
      double s = 0.0;
      for (std::size_t i = 0; i < v.size(); ++i) s += diag[i] * v[i] * v[i];
      return std::sqrt(s);
    };
    auto grad_fn = [diag, norm_fn](const Vec& v) {
      const double F = norm_fn(v);
      Vec g(v.size(), 0.0);
      if (F == 0.0) return g;
      for (std::size_t i = 0; i < v.size(); ++i) g[i] = diag[i] * v[i] / F;
      return g;
    };
    return make_minkowski(dim, "minkowski_ellipse", norm_fn, grad_fn, true);
  }
  if (config.norm_name == "quartic") {
    const double eps = config.norm_param.empty() ? 0.3 : config.norm_param[0];
    if (eps < 0.0 || eps > 0.5) throw usage_error("quartic norm blend must sit in [0, 0.5]");
    auto quartic_form = [eps](const Vec& v) {
      double s4 = 0.0;
      for (double c : v) s4 += c * c * c * c;
      const double n2 = norm_sq(v);
      return (1.0 - eps) * n2 * n2 + eps * s4;
    };
    auto norm_fn = [quartic_form](const Vec& v) { return std::pow(quartic_form(v), 0.25); };
    auto grad_fn = [eps, quartic_form](const Vec& v) {
      const double G = quartic_form(v);
      Vec g(v.size(), 0.0);
      if (G == 0.0) return g;
      const double n2 = norm_sq(v);
      const double scale = 0.25 * std::pow(G, -0.75);
      for (std::size_t i = 0; i < v.size(); ++i)
        g[i] = scale * (4.0 * (1.0 - eps) * n2 * v[i] + 4.0 * eps * v[i] * v[i] * v[i]);
      return g;
    };
    return make_minkowski(dim, "minkowski_quartic", norm_fn, grad_fn, true);
  }
  throw usage_error("unknown minkowski norm: " + config.norm_name);
}

}  // namespace

SpaceHandle build_space(const ExperimentConfig& config) {
  if (config.space_kind == "euclidean") return make_euclidean(config.dim);
  if (config.space_kind == "randers") {
    Vec a = config.drift;
    if (a.empty()) a = Vec(static_cast<std::size_t>(config.dim), 0.0);
    if (static_cast<int>(a.size()) != config.dim)
      throw usage_error("randers drift length must equal dim");
    return make_randers(config.dim, a);
  }
  if (config.space_kind == "minkowski") return build_minkowski_space(config);
  if (config.space_kind == "funk") return make_funk_ball(config.dim);
  if (config.space_kind == "broken") {
    // Deliberately broken fixture: d(x,y) = ||x-y|| - 0.1 violates the
    // identity axiom. Used to test verification failure paths.
    SpaceHandle s = make_euclidean(config.dim);
    s.name = "broken";
    s.distance = [](const Vec& x, const Vec& y) { return norm(sub(y, x)) - 0.1; };
    s.tangent = nullptr;
    s.distance_grad_y = nullptr;
    return s;
  }
  throw usage_error("unknown space kind: " + config.space_kind);
}

PotentialEntry build_potential(const ExperimentConfig& config, const SpaceHandle& space) {
  PotentialParams params;
  params.scalars = config.potential_scalars;
  params.vectors = config.potential_vectors;
  params.scalars["p"] = config.p;
  PotentialEntry entry = make_potential(config.potential_name, params, space);
  if (config.lambda) {
    entry.phi.convexity = PLCertificate{config.p, *config.lambda};
    if (entry.split) entry.split->total.convexity = entry.phi.convexity;
  }
  return entry;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int dim) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "t";
  for (int i = 0; i < dim; ++i) out << ",coord_" << i;
  out << ",phi,slope,speed\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    out << fmt(traj.times[i]);
    for (int c = 0; c < dim; ++c) out << "," << fmt(traj.points[i][static_cast<std::size_t>(c)]);
    out << "," << fmt(traj.phi_values[i]) << "," << fmt(traj.slope_values[i]) << ","
        << fmt(traj.speed_values[i]) << "\n";
  }
}

namespace {

json report_to_json(const CheckReport& rep) {
  json j;
  j["check_name"] = rep.check_name;
  j["max_violation"] = rep.max_violation;
  j["n_samples"] = rep.n_samples;
  j["pass"] = rep.pass;
  for (const auto& [k, v] : rep.details) j["details"][k] = v;
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

double sup_error_vs_oracle(const SpaceHandle& space, const DiscreteSolution& run,
                           const Trajectory& oracle) {
  // Sup over the run's node times of the symmetrized distance to the oracle
  // sample (oracle sampled on a fine uniform grid; nearest-time lookup).
  double sup = 0.0;
  for (std::size_t k = 0; k < run.points.size(); ++k) {
    const double t = run.partition.times[k];
    const double T = oracle.times.back();
    const std::size_t n = oracle.size();
    std::size_t idx = static_cast<std::size_t>(
        std::llround(t / T * static_cast<double>(n - 1)));
    if (idx >= n) idx = n - 1;
    const Vec& a = run.points[k];
    const Vec& b = oracle.points[idx];
    sup = std::max(sup, std::max(space.distance(a, b), space.distance(b, a)));
  }
  return sup;
}

struct PreparedExperiment {
  SpaceHandle space;
  PotentialEntry entry;
};

PreparedExperiment prepare(const ExperimentConfig& config) {
  PreparedExperiment prep{build_space(config), {}};
  prep.entry = build_potential(config, prep.space);
  if (!prep.space.in_domain(config.x0)) throw usage_error("config: x0 outside the space domain");
  return prep;
}

}  // namespace

int cmd_run(const ExperimentConfig& config, int log_level) {
  try {
    PreparedExperiment prep = prepare(config);
    const Potential& phi = prep.entry.phi;
    std::filesystem::create_directories(config.out_dir);

    log_line(log_level, 1, "running MMS sweep (" + std::to_string(config.tau_sweep.size()) +
                               " members) on " + prep.space.name);
    LimitResult limit = limit_trajectory(phi, prep.space, config.x0, config.horizon,
                                         config.tau_sweep, config.solver, config.jobs);

    json summary;
    summary["schema"] = 1;
    summary["space"] = prep.space.name;
    summary["potential"] = phi.name;
    summary["p"] = config.p;
    summary["seed"] = config.seed;
    summary["energy_residual"] = limit.report.energy_residual;
    summary["cauchy_distances"] = limit.report.cauchy_distances;
    summary["divergence_warning"] = limit.report.divergence_warning;

    const std::string base = config.out_dir + "/" + config.prefix;
    write_trajectory_csv(base + "_trajectory.csv", limit.trajectory, config.dim);

    bool ok = !limit.report.divergence_warning;
    const double energy_tol = 1e-3;
    ok = ok && limit.report.energy_residual <= energy_tol;

    {
      const DiscreteSolution& finest = limit.runs.back();
      const double s_bound = std::max(phi.value(config.x0), 0.0);
      CheckReport apriori = a_priori_check(phi, prep.space, finest, config.x0, s_bound,
                                           config.horizon, config.solver);
      summary["checks"].push_back(report_to_json(apriori));
      ok = ok && apriori.pass;
    }

    if (phi.smooth && prep.space.has_tangent()) {
      log_line(log_level, 1, "running ODE oracle");
      Trajectory oracle = ode_oracle(phi, prep.space, config.x0, config.horizon);
      write_trajectory_csv(base + "_oracle.csv", oracle, config.dim);
      summary["oracle_chain_residual"] = oracle.max_chain_residual;
      summary["oracle_domain_exit"] = oracle.domain_exit;
      const double sup = sup_error_vs_oracle(prep.space, limit.runs.back(), oracle);
      summary["sup_error_vs_oracle"] = sup;

      if (phi.convexity && phi.known_inf) {
        CheckReport decay = verify_exponential_decay(oracle, phi, prep.space, *phi.known_inf);
        summary["checks"].push_back(report_to_json(decay));
        ok = ok && decay.pass;
      }
    }
    summary["pass"] = ok;
    write_json(base + "_summary.json", summary);
    log_line(log_level, 1, "summary written to " + base + "_summary.json");
    return ok ? kExitOk : kExitVerification;
  } catch (const usage_error&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

namespace {

bool check_selected(const ExperimentConfig& config, const std::string& name) {
  if (config.checks.empty()) return true;
  for (const auto& c : config.checks)
    if (c == name) return true;
  return false;
}

void print_report_line(const CheckReport& rep) {
  std::printf("%-28s %-6s max_violation=%-12.3e n=%d\n", rep.check_name.c_str(),
              rep.pass ? "PASS" : "FAIL", rep.max_violation, rep.n_samples);
}

}  // namespace

int cmd_verify(const ExperimentConfig& config, int log_level) {
  try {
    PreparedExperiment prep = prepare(config);
    const SpaceHandle& space = prep.space;
    const Potential& phi = prep.entry.phi;
    std::filesystem::create_directories(config.out_dir);

    std::vector<CheckReport> reports;

    if (check_selected(config, "axioms")) {
      AxiomReport ax = check_axioms(space, 400, config.seed);
      CheckReport rep;
      rep.check_name = "metric_axioms";
      rep.n_samples = ax.n_samples;
      rep.max_violation = std::max({ax.max_identity_violation, ax.max_triangle_violation,
                                    ax.max_reversibility_violation});
      rep.pass = ax.pass(1e-12);
      rep.details["identity"] = ax.max_identity_violation;
      rep.details["triangle"] = ax.max_triangle_violation;
      rep.details["reversibility"] = ax.max_reversibility_violation;
      reports.push_back(rep);
    }

    if (check_selected(config, "tangent") && space.has_tangent()) {
      // Legendre consistency on sampled base points and vectors.
      Rng rng(config.seed);
      double worst = 0.0;
      const int n = 200;
      for (int i = 0; i < n; ++i) {
        const Vec x = sample_point(space, rng);
        const Vec v = rng.box(space.dim, 1.0);
        if (norm(v) < 1e-9) continue;
        const Vec z = space.tangent->legendre(x, v);
        const double F = space.tangent->norm(x, v);
        worst = std::max(worst, std::fabs(space.tangent->dual_norm(x, z) - F));
        worst = std::max(worst, std::fabs(dot(z, v) - F * F));
        worst = std::max(worst, max_abs_diff(space.tangent->legendre_inv(x, z), v));
      }
      CheckReport rep;
      rep.check_name = "legendre_consistency";
      rep.n_samples = n;
      rep.max_violation = worst;
      rep.pass = worst <= 1e-7;
      reports.push_back(rep);
    }

    if (check_selected(config, "envelope")) {
      reports.push_back(envelope_monotonicity_check(phi, space, config.x0,
                                                    {1e-3, 1e-2, 1e-1, 0.3}, config.solver));
    }

    if (check_selected(config, "energy")) {
      DiscreteSolution sol = run_scheme(phi, space, config.x0,
                                        Partition::uniform(std::min(config.horizon, 0.5), 0.05),
                                        config.solver);
      const double residual =
          discrete_energy_identity(phi, space, sol, 0, sol.partition.n_steps(), 8, config.solver);
      CheckReport rep;
      rep.check_name = "discrete_energy_identity";
      rep.n_samples = static_cast<int>(sol.partition.n_steps());
      rep.max_violation = residual;
      rep.pass = residual <= 1e-5 * (1.0 + std::fabs(sol.phis[0]));
      reports.push_back(rep);
    }

    if (check_selected(config, "convexity") && config.lambda && space.geodesic) {
      ConvexityCertificate cert =
          certify_convexity(phi, space, config.p, *config.lambda, 200, 8, config.seed);
      CheckReport rep;
      rep.check_name = "convexity_certificate";
      rep.n_samples = cert.n_pairs * cert.n_times;
      rep.max_violation = cert.max_violation;
      rep.pass = cert.verified;
      reports.push_back(rep);
    }

    if (check_selected(config, "decay") && config.lambda && phi.known_inf && phi.smooth &&
        space.has_tangent()) {
      Trajectory oracle = ode_oracle(phi, space, config.x0, config.horizon);
      reports.push_back(verify_exponential_decay(oracle, phi, space, *phi.known_inf));
      const double lambda = *config.lambda;
      const bool regime_ok = (config.p > 1.0 && config.p < 2.0 && lambda >= 0.0) ||
                             config.p == 2.0 || (config.p > 2.0 && lambda == 0.0);
      if (regime_ok && phi.known_inf) {
        reports.push_back(
            verify_slope_regularization(oracle, phi, space, *phi.known_inf, config.solver));
        reports.push_back(monotone_slope_check(oracle, config.p, lambda));
      }
    }

    if (check_selected(config, "sweep")) {
      LimitResult limit = limit_trajectory(phi, space, config.x0, config.horizon,
                                           config.tau_sweep, config.solver, config.jobs);
      CheckReport rep;
      rep.check_name = "sweep_cauchy";
      rep.n_samples = static_cast<int>(limit.report.cauchy_distances.size());
      rep.max_violation = limit.report.divergence_warning ? 1.0 : 0.0;
      rep.pass = !limit.report.divergence_warning;
      for (std::size_t i = 0; i < limit.report.cauchy_distances.size(); ++i)
        rep.details["cauchy_" + std::to_string(i)] = limit.report.cauchy_distances[i];
      rep.details["energy_residual"] = limit.report.energy_residual;
      reports.push_back(rep);
    }

    bool all_pass = true;
    json table = json::array();
    for (const auto& rep : reports) {
      print_report_line(rep);
      table.push_back(report_to_json(rep));
      all_pass = all_pass && rep.pass;
    }
    write_json(config.out_dir + "/" + config.prefix + "_verify.json", table);
    log_line(log_level, 1, all_pass ? "all checks passed" : "some checks FAILED");
    return all_pass ? kExitOk : kExitVerification;
  } catch (const usage_error&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_sweep(const ExperimentConfig& config, int log_level) {
  try {
    if (config.tau_sweep.size() < 2)
      throw usage_error("sweep requires tau_sweep with at least 2 entries");
    PreparedExperiment prep = prepare(config);
    const Potential& phi = prep.entry.phi;
    if (!phi.smooth || !prep.space.has_tangent())
      throw usage_error("sweep requires a smooth potential on a tangent-equipped space");
    std::filesystem::create_directories(config.out_dir);

    Trajectory oracle = ode_oracle(phi, prep.space, config.x0, config.horizon);

    struct Row {
      double tau, sup_error, energy_residual, runtime_ms;
    };
    std::vector<Row> rows(config.tau_sweep.size());

    const int n_jobs = std::max(1, config.jobs);
    std::size_t next = 0;
    while (next < config.tau_sweep.size()) {
      const std::size_t batch =
          std::min<std::size_t>(static_cast<std::size_t>(n_jobs), config.tau_sweep.size() - next);
      std::vector<std::future<Row>> futures;
      for (std::size_t j = 0; j < batch; ++j) {
        const double tau = config.tau_sweep[next + j];
        futures.push_back(std::async(std::launch::async, [&, tau]() -> Row {
          const auto t0 = std::chrono::steady_clock::now();
          DiscreteSolution sol = run_scheme(phi, prep.space, config.x0,
                                            Partition::uniform(config.horizon, tau), config.solver);
          const double sup = sup_error_vs_oracle(prep.space, sol, oracle);
          Trajectory traj = solution_to_trajectory(phi, prep.space, sol);
          const double residual = verify_energy_identity(traj, phi, prep.space);
          const auto t1 = std::chrono::steady_clock::now();
          const double ms =
              std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count() / 1000.0;
          return Row{tau, sup, residual, ms};
        }));
      }
      for (std::size_t j = 0; j < batch; ++j) rows[next + j] = futures[j].get();
      next += batch;
    }

    const std::string path = config.out_dir + "/" + config.prefix + "_sweep.csv";
    std::ofstream out(path, std::ios::binary);
    out << "tau,sup_error,energy_residual,runtime_ms\n";
    for (const auto& r : rows)
      out << fmt(r.tau) << "," << fmt(r.sup_error) << "," << fmt(r.energy_residual) << ","
          << fmt(r.runtime_ms) << "\n";
    log_line(log_level, 1, "sweep table written to " + path);

    for (std::size_t i = 1; i < rows.size(); ++i)
      if (rows[i].sup_error > rows[i - 1].sup_error) return kExitVerification;
    return kExitOk;
  } catch (const usage_error&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace asymflow
