// Batch front end. Every run is deterministic: identical configuration
// produces byte-identical report bodies, with the timestamp isolated on the
// schema line. LACUNA_THREADS (or --threads) caps the worker count without
// changing any result.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lacuna/config.hpp"
#include "lacuna/geometry.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/mesh.hpp"
#include "lacuna/poisson.hpp"
#include "lacuna/regularity.hpp"
#include "lacuna/report.hpp"
#include "lacuna/separation.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace lacuna;

namespace {

struct QResolution {
  LacunaryParams params;
  double gamma = 0.0;
  bool computed_gamma = false;
};

QResolution resolve_params(const RunConfig& cfg) {
  QResolution r;
  r.params.M = cfg.M;
  if (cfg.q_auto) {
    r.gamma = compute_gamma().gamma;
    r.computed_gamma = true;
    r.params.q = choose_q(r.gamma);
  } else {
    r.params.q = cfg.q;
  }
  validate_params(r.params);
  return r;
}

void apply_threads(const RunConfig& cfg) {
  if (cfg.threads > 0) {
    setenv("LACUNA_THREADS", std::to_string(cfg.threads).c_str(), 1);
  }
}

fs::path out_file(const RunConfig& cfg, const std::string& name) {
  return fs::path(cfg.output) / name;
}

void emit(const RunConfig& cfg, const std::string& base, const std::string& csv,
          const std::string& json) {
  if (!csv.empty() && (cfg.format == "csv" || cfg.format == "both")) {
    write_atomic(out_file(cfg, base + ".csv"), csv);
    std::printf("wrote %s\n", out_file(cfg, base + ".csv").c_str());
  }
  if (!json.empty() && (cfg.format == "json" || cfg.format == "both")) {
    write_atomic(out_file(cfg, base + ".json"), json);
    std::printf("wrote %s\n", out_file(cfg, base + ".json").c_str());
  }
}

ordered_json params_json(const LacunaryParams& p) {
  return {{"q", p.q}, {"M", p.M}, {"modulus", p.N}};
}

// ---- verify ----

int cmd_verify(const RunConfig& cfg) {
  apply_threads(cfg);
  const GammaResult gr = compute_gamma();
  LacunaryParams params;
  params.M = cfg.M;
  params.q = cfg.q_auto ? choose_q(gr.gamma) : cfg.q;
  validate_params(params);

  std::printf("gamma = %.12f  (z_min %.6f, %d doublings)\n", gr.gamma, gr.z_min, gr.doublings);
  std::printf("q = %llu (%s)\n", static_cast<unsigned long long>(params.q),
              cfg.q_auto ? "auto" : "explicit");

  const auto rows = check_conditions(params, gr.gamma);

  CsvTable t;
  t.schema = "lacuna-conditions-v1";
  t.columns = {"condition", "m", "lhs_log2", "rhs_log2", "pass"};
  for (const auto& r : rows) {
    t.rows.push_back({csv_field(r.condition), std::to_string(r.m), fmt17(r.lhs_log2),
                      fmt17(r.rhs_log2), r.pass ? "1" : "0"});
  }

  ordered_json j;
  j["schema"] = "lacuna-conditions-v1";
  j["generated"] = iso8601_utc_now();
  j["gamma"] = gr.gamma;
  j["params"] = params_json(params);
  j["mode"] = cfg.mode;
  j["conditions"] = ordered_json::array();
  for (const auto& r : rows) {
    j["conditions"].push_back({{"condition", r.condition},
                               {"m", r.m},
                               {"lhs_log2", r.lhs_log2},
                               {"rhs_log2", r.rhs_log2},
                               {"pass", r.pass}});
  }
  emit(cfg, "conditions", t.render(iso8601_utc_now()), j.dump(2) + "\n");

  int failures = 0;
  for (const auto& r : rows) {
    if (!r.pass) {
      ++failures;
      std::printf("%s: %s (m=%d, lhs_log2 %.6f > rhs_log2 %.6f)\n",
                  cfg.mode == "strict" ? "FAILED" : "warning", r.condition.c_str(), r.m,
                  r.lhs_log2, r.rhs_log2);
    }
  }
  if (failures == 0) {
    std::printf("all conditions pass (%zu checks)\n", rows.size());
    return 0;
  }
  if (cfg.mode == "demo") {
    std::printf("pass with %d warnings (demo mode)\n", failures);
    return 0;
  }
  std::printf("strict mode: %d failed conditions\n", failures);
  return 1;
}

// ---- gamma ----

int cmd_gamma(const RunConfig& cfg) {
  apply_threads(cfg);
  const GammaResult r = compute_gamma();
  std::printf("gamma = %.15f\nz_min = %.15f\ng_min = %.15f\ndoublings = %d\n", r.gamma, r.z_min,
              r.g_min, r.doublings);

  CsvTable t;
  t.schema = "lacuna-gamma-v1";
  t.columns = {"gamma", "z_min", "g_min", "doublings"};
  t.rows.push_back({fmt17(r.gamma), fmt17(r.z_min), fmt17(r.g_min), std::to_string(r.doublings)});

  ordered_json j;
  j["schema"] = "lacuna-gamma-v1";
  j["generated"] = iso8601_utc_now();
  j["gamma"] = r.gamma;
  j["z_min"] = r.z_min;
  j["g_min"] = r.g_min;
  j["doublings"] = r.doublings;
  emit(cfg, "gamma", t.render(iso8601_utc_now()), j.dump(2) + "\n");
  return 0;
}

// ---- series ----

int cmd_series(const RunConfig& cfg) {
  apply_threads(cfg);
  const QResolution qr = resolve_params(cfg);
  const int n = cfg.series_samples;
  if (n < 2) throw CLI::ValidationError("series", "need at least 2 samples");

  const RadialBoundary bd(qr.params);
  const SeriesEvaluator ev(qr.params, static_cast<std::uint64_t>(n));

  CsvTable t;
  t.schema = "lacuna-series-v1";
  t.columns = {"index", "theta_num", "theta_den", "theta", "f", "F", "normal_x", "normal_y"};
  for (int j = 0; j < n; ++j) {
    const RationalAngle th(static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(n));
    const Vec2 nrm = bd.unit_normal(th);
    t.rows.push_back({std::to_string(j), std::to_string(th.num), std::to_string(th.den),
                      fmt17(th.radians()), fmt17(ev.f(static_cast<std::uint64_t>(j))),
                      fmt17(ev.F(static_cast<std::uint64_t>(j))), fmt17(nrm.x), fmt17(nrm.y)});
  }
  write_atomic(out_file(cfg, "series.csv"), t.render(iso8601_utc_now()));
  std::printf("wrote %s (%d samples, q=%llu, M=%d)\n", out_file(cfg, "series.csv").c_str(), n,
              static_cast<unsigned long long>(qr.params.q), qr.params.M);
  return 0;
}

// ---- mesh / solve ----

Mesh build_mesh(const RunConfig& cfg, const LacunaryParams& params) {
  const int nt = cfg.mesh_n_theta;
  const int nr = cfg.mesh_n_r > 0 ? cfg.mesh_n_r : default_rings(nt);
  return mesh_polar(params, nt, nr);
}

ordered_json mesh_arrays(const Mesh& m) {
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (const auto& p : m.xy) j["nodes"].push_back({p.x, p.y});
  j["triangles"] = ordered_json::array();
  for (const auto& t : m.tri) j["triangles"].push_back({t[0], t[1], t[2]});
  j["boundary"] = m.boundary;
  return j;
}

int cmd_mesh(const RunConfig& cfg) {
  apply_threads(cfg);
  const QResolution qr = resolve_params(cfg);
  const Mesh m = build_mesh(cfg, qr.params);

  ordered_json j;
  j["schema"] = "lacuna-mesh-v1";
  j["generated"] = iso8601_utc_now();
  j["params"] = params_json(qr.params);
  j["n_theta"] = m.n_theta;
  j["n_r"] = m.n_r;
  j["min_angle_deg"] = m.min_angle_deg;
  j["area_polygon"] = mesh_area(m);
  j["area_smooth"] = area(qr.params).value;
  j.update(mesh_arrays(m));

  CsvTable t;
  t.schema = "lacuna-mesh-v1";
  t.columns = {"j", "theta_num", "theta_den", "x", "y", "F"};
  const RadialBoundary bd(qr.params);
  for (int k = 0; k < m.n_theta; ++k) {
    const auto node = static_cast<std::size_t>(m.boundary[static_cast<std::size_t>(k)]);
    const RationalAngle th = m.theta[node];
    t.rows.push_back({std::to_string(k), std::to_string(th.num), std::to_string(th.den),
                      fmt17(m.xy[node].x), fmt17(m.xy[node].y), fmt17(bd.F(th))});
  }

  write_atomic(out_file(cfg, "mesh.json"), j.dump(2) + "\n");
  write_atomic(out_file(cfg, "mesh.csv"), t.render(iso8601_utc_now()));
  std::printf("wrote %s and %s (%zu nodes, %zu triangles, min angle %.2f deg)\n",
              out_file(cfg, "mesh.json").c_str(), out_file(cfg, "mesh.csv").c_str(),
              m.node_count(), m.tri.size(), m.min_angle_deg);
  return 0;
}

int cmd_solve(const RunConfig& cfg) {
  apply_threads(cfg);
  const QResolution qr = resolve_params(cfg);
  const Mesh m = build_mesh(cfg, qr.params);

  const bool dirichlet = cfg.bc == "dirichlet";
  if (!dirichlet && cfg.rhs == "one") {
    throw CLI::ValidationError("solve",
                               "rhs 'one' is incompatible with the Neumann problem; use auto or xy");
  }

  SolveResult sol;
  GreenReport green;
  FluxResult flux;
  std::string rhs_used = cfg.rhs;
  if (dirichlet) {
    ScalarField g;
    if (cfg.rhs == "xy") {
      g = QuadraticRhs{1.0, 0.0};
    } else {
      // 'auto' for the Dirichlet problem is the canonical unit load
      g = [](Vec2) { return 1.0; };
      rhs_used = "one";
    }
    sol = solve_dirichlet(m, g);
    flux = boundary_flux(m, sol, g);
    green = green_check_dirichlet(m, sol, g);
  } else {
    const QuadraticRhs g = cfg.rhs == "xy" ? QuadraticRhs{1.0, 0.0} : choose_neumann_rhs(m);
    sol = solve_neumann(m, g);
    flux = boundary_flux(m, sol, g);
    green = green_check_neumann(m, sol, g);
  }

  ordered_json j;
  j["schema"] = "lacuna-solve-v1";
  j["generated"] = iso8601_utc_now();
  j["params"] = params_json(qr.params);
  j["n_theta"] = m.n_theta;
  j["n_r"] = m.n_r;
  j["bc"] = cfg.bc;
  j["rhs"] = rhs_used;
  j["residual_rel"] = sol.residual_rel;
  j["refine_steps"] = sol.refine_steps;
  j["multiplier"] = sol.multiplier;
  j["flux_total"] = flux.total;
  j["green"] = {{"lhs", green.lhs}, {"rhs", green.rhs}, {"rel_err", green.rel_err}};
  j["values"] = sol.v;
  j.update(mesh_arrays(m));

  CsvTable t;
  t.schema = "lacuna-solve-v1";
  t.columns = {"j", "theta_num", "theta_den", "trace_v", "lambda", "raw_edge_flux"};
  for (int k = 0; k < m.n_theta; ++k) {
    const auto node = static_cast<std::size_t>(m.boundary[static_cast<std::size_t>(k)]);
    const RationalAngle th = m.theta[node];
    t.rows.push_back({std::to_string(k), std::to_string(th.num), std::to_string(th.den),
                      fmt17(sol.v[node]), fmt17(flux.lambda[static_cast<std::size_t>(k)]),
                      fmt17(flux.raw_edge[static_cast<std::size_t>(k)])});
  }

  write_atomic(out_file(cfg, "solve.json"), j.dump(2) + "\n");
  write_atomic(out_file(cfg, "solve.csv"), t.render(iso8601_utc_now()));
  std::printf(
      "wrote %s and %s (bc %s, rhs %s, residual %.3e, flux total %.9f, green rel %.3e)\n",
      out_file(cfg, "solve.json").c_str(), out_file(cfg, "solve.csv").c_str(), cfg.bc.c_str(),
      rhs_used.c_str(), sol.residual_rel, flux.total, green.rel_err);
  return 0;
}

// ---- sweep ----

int cmd_sweep(const RunConfig& cfg) {
  apply_threads(cfg);
  const QResolution qr = resolve_params(cfg);

  SweepPlan plan;
  plan.base = qr.params;
  for (int nt : cfg.sweep_n_theta) {
    for (int M : cfg.sweep_M) {
      plan.cases.push_back({M, nt, default_rings(nt)});
    }
  }
  plan.specs = cfg.specs;
  plan.include_control = true;
  plan.flux_supersample = cfg.supersample;

  const BlowupReport rep = run_sweep(plan);

  const std::string ts = iso8601_utc_now();
  write_atomic(out_file(cfg, "sweep.csv"), sweep_csv(rep, ts));
  write_atomic(out_file(cfg, "sweep.json"), sweep_json(rep, ts));
  std::printf("wrote %s and %s\n", out_file(cfg, "sweep.csv").c_str(),
              out_file(cfg, "sweep.json").c_str());

  int errors = 0;
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      ++errors;
      std::printf("case n_theta=%d M=%d failed: %s\n", r.n_theta, r.M, r.error.c_str());
      continue;
    }
    std::printf("n_theta=%4d M=%d%s  flux_semi(headline) %.6e  flux_total %.6f  trace %.3e\n",
                r.n_theta, r.M, r.control ? " control" : "        ",
                r.flux_semi[static_cast<std::size_t>(rep.headline_spec)], r.flux_total,
                r.trace_max_residual);
  }

  const auto& inv = rep.invariants;
  std::printf("invariants: control_flat %s, flux_growth_strict %s, nonvanishing_flux %s, "
              "green_dirichlet_5pct %s\n",
              inv.control_flat ? "pass" : "FAIL", inv.flux_growth_strict ? "pass" : "FAIL",
              inv.nonvanishing_flux ? "pass" : "FAIL",
              inv.green_dirichlet_5pct ? "pass" : "FAIL");
  if (errors > 0 || !inv.all_pass()) {
    std::printf("sweep FAILED\n");
    return 1;
  }
  std::printf("sweep invariants: all pass\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lacunary boundary roughness toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;

  // flag storage; only flags the user actually passed override the config
  std::string q_flag, format_flag, mode_flag, bc_flag, rhs_flag, output_flag, specs_flag;
  std::string sweep_nt_flag, sweep_m_flag;
  int m_flag = 0, nt_flag = 0, nr_flag = 0, samples_flag = 0, threads_flag = 0, super_flag = 0;

  const auto add_common = [&](CLI::App* c) {
    c->add_option("--config", config_path, "configuration file (INI; flags override it)");
    c->add_option("--q", q_flag, "frequency base, or 'auto' for the strict choice");
    c->add_option("--M", m_flag, "truncation order");
    c->add_option("--output", output_flag, "output directory");
    c->add_option("--format", format_flag, "csv, json or both");
    c->add_option("--threads", threads_flag, "cap worker count (LACUNA_THREADS)");
  };

  auto* verify = app.add_subcommand("verify", "check the frequency and size conditions");
  add_common(verify);
  verify->add_option("--mode", mode_flag, "strict or demo");

  auto* gamma = app.add_subcommand("gamma", "compute the admissibility constant");
  add_common(gamma);

  auto* series = app.add_subcommand("series", "sample f, F and the boundary normals");
  add_common(series);
  series->add_option("--samples", samples_flag, "sample count");

  auto* mesh = app.add_subcommand("mesh", "generate the polar mesh");
  add_common(mesh);
  mesh->add_option("--n-theta", nt_flag, "boundary resolution");
  mesh->add_option("--n-r", nr_flag, "ring count (0 derives n_theta/8)");

  auto* solve = app.add_subcommand("solve", "solve the Poisson problem");
  add_common(solve);
  solve->add_option("--n-theta", nt_flag, "boundary resolution");
  solve->add_option("--n-r", nr_flag, "ring count (0 derives n_theta/8)");
  solve->add_option("--bc", bc_flag, "dirichlet or neumann");
  solve->add_option("--rhs", rhs_flag, "one, auto or xy");

  auto* sweep = app.add_subcommand("sweep", "run the case-vs-control blow-up sweep");
  add_common(sweep);
  sweep->add_option("--n-theta", sweep_nt_flag, "comma-separated resolutions");
  sweep->add_option("--sweep-M", sweep_m_flag, "comma-separated truncation orders");
  sweep->add_option("--supersample", super_flag, "weight samples per boundary edge");
  sweep->add_option("--specs", specs_flag, "seminorm grid as p:eps, p:eps, ...");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) load_config_file(cfg, config_path);

    const auto over = [&](const CLI::App* c, const char* name, const std::string& key,
                          const std::string& value) {
      if (c->count(name) > 0) apply_setting(cfg, key, value);
    };
    CLI::App* active = app.get_subcommands().front();
    over(active, "--q", "run.q", q_flag);
    over(active, "--M", "run.M", std::to_string(m_flag));
    over(active, "--output", "run.output", output_flag);
    over(active, "--format", "run.format", format_flag);
    over(active, "--threads", "run.threads", std::to_string(threads_flag));
    if (active == verify) over(active, "--mode", "run.mode", mode_flag);
    if (active == series) over(active, "--samples", "series.samples", std::to_string(samples_flag));
    if (active == mesh || active == solve) {
      over(active, "--n-theta", "mesh.n_theta", std::to_string(nt_flag));
      over(active, "--n-r", "mesh.n_r", std::to_string(nr_flag));
    }
    if (active == solve) {
      over(active, "--bc", "solve.bc", bc_flag);
      over(active, "--rhs", "solve.rhs", rhs_flag);
    }
    if (active == sweep) {
      over(active, "--n-theta", "sweep.n_theta", sweep_nt_flag);
      over(active, "--sweep-M", "sweep.M", sweep_m_flag);
      over(active, "--supersample", "sweep.supersample", std::to_string(super_flag));
      over(active, "--specs", "sweep.specs", specs_flag);
    }

    if (active == verify) return cmd_verify(cfg);
    if (active == gamma) return cmd_gamma(cfg);
    if (active == series) return cmd_series(cfg);
    if (active == mesh) return cmd_mesh(cfg);
    if (active == solve) return cmd_solve(cfg);
    if (active == sweep) return cmd_sweep(cfg);
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
