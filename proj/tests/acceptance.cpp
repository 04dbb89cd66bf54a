// Acceptance suite: eight end-to-end criteria, one verdict line each, all
// tolerances pinned right here. Exit code is the number of failed criteria.
//
//   1  admissibility constant, strict base choice, condition table
//   2  radial profile stays inside its closed-form deviation bound
//   3  interval lower bounds with quadrature-doubling stability
//   4  FEM convergence orders against the two exact disk solutions
//   5  flux identities on the perturbed domain at the strict base
//   6  blow-up sweep: seminorm growth against flat controls, trace decay
//   7  extension identity, ellipsoidal membership, cutoff profiles
//   8  reproducibility: byte-stable reports, worker-count independence

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "lacuna/geometry.hpp"
#include "lacuna/lacunary.hpp"
#include "lacuna/mesh.hpp"
#include "lacuna/poisson.hpp"
#include "lacuna/regularity.hpp"
#include "lacuna/report.hpp"
#include "lacuna/separation.hpp"

using namespace lacuna;

namespace {

// pinned tolerances
constexpr double gamma_ref = 0.015418918659584;  // independently derived
constexpr double tol_gamma_rel = 1e-6;
constexpr std::uint64_t strict_q_ref = 66;
constexpr double tol_profile_band_lo = 0.5;  // 1/2 < F < 3/2 everywhere
constexpr double tol_profile_band_hi = 1.5;
constexpr double tol_quad_doubling_rel = 5e-3;
constexpr double tol_l2_order = 1.9;
constexpr double tol_h1_order = 0.9;
constexpr double tol_green_rel = 0.05;
constexpr double tol_area_vs_disk = 0.0164;
constexpr double tol_trace_order = 0.9;
constexpr double tol_extension_order = 1.5;
constexpr double tol_worker_rel = 1e-12;

int failures = 0;

void verdict(int idx, const char* name, bool pass, const std::string& detail, double seconds) {
  std::printf("criterion %d (%s): %s  [%s, %.1fs]\n", idx, name, pass ? "PASS" : "FAIL",
              detail.c_str(), seconds);
  if (!pass) ++failures;
}

template <class F>
void criterion(int idx, const char* name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  verdict(idx, name, pass, detail, dt);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// --- criterion bodies ------------------------------------------------------

bool conditions_suite(std::string& detail) {
  const GammaResult gr = compute_gamma();
  const double rel = std::fabs(gr.gamma - gamma_ref) / gamma_ref;
  if (rel > tol_gamma_rel) {
    detail = "gamma " + fmt(gr.gamma) + " vs " + fmt(gamma_ref) + ", rel " + fmt(rel);
    return false;
  }
  const std::uint64_t q = choose_q(gr.gamma);
  if (q != strict_q_ref) {
    detail = "strict base " + std::to_string(q) + " != " + std::to_string(strict_q_ref);
    return false;
  }
  LacunaryParams params;
  params.q = q;
  params.M = 2;
  const auto rows = check_conditions(params, gr.gamma);
  int ratio_below = 0;
  bool ratio_above = false;
  int size_rows = 0;
  for (const auto& r : rows) {
    if (!r.pass) {
      detail = "condition failed: " + r.condition + " at m=" + std::to_string(r.m);
      return false;
    }
    if (r.condition == "ratio-below") ++ratio_below;
    if (r.condition == "ratio-above") ratio_above = true;
    if (r.condition.rfind("size(", 0) == 0) ++size_rows;
  }
  if (ratio_below < 7 || !ratio_above || size_rows != 9 || !strict_ok(params, rows)) {
    detail = "unexpected condition coverage (" + std::to_string(rows.size()) + " rows)";
    return false;
  }
  detail = "gamma rel " + fmt(rel) + ", q=" + std::to_string(q) + ", " +
           std::to_string(rows.size()) + " conditions pass";
  return true;
}

bool profile_bound(std::string& detail) {
  double worst_margin = 1e300;
  for (std::uint64_t q : {std::uint64_t{7}, strict_q_ref}) {
    const double bound = deviation_bound(q);
    for (int M = 0; M <= 4; ++M) {
      LacunaryParams p;
      p.q = q;
      p.M = M;
      // dense grid keeping the odd part of the modulus, so no frequency
      // aliases to zero; 1.3M points
      const std::uint64_t den = 315ull << 12;
      const SeriesEvaluator ev(p, den);
      double max_dev = 0.0;
      for (std::uint64_t j = 0; j < den; ++j) {
        const double d = std::fabs(ev.deviation(j));
        if (d > max_dev) max_dev = d;
        const double F = 1.0 + ev.deviation(j);
        if (F <= tol_profile_band_lo || F >= tol_profile_band_hi) {
          detail = "F out of (1/2, 3/2) at q=" + std::to_string(q) + " M=" + std::to_string(M);
          return false;
        }
      }
      if (max_dev > bound) {
        detail = "max|F-1| " + fmt(max_dev) + " exceeds " + fmt(bound) + " at q=" +
                 std::to_string(q) + " M=" + std::to_string(M);
        return false;
      }
      if (M > 0) worst_margin = std::min(worst_margin, bound - max_dev);
    }
  }
  detail = "max|F-1| inside bound, worst margin " + fmt(worst_margin);
  return true;
}

bool interval_lower_bounds(std::string& detail) {
  const double gamma = compute_gamma().gamma;
  LacunaryParams params;
  params.q = 7;
  params.M = 3;
  const RationalAngle xs[2] = {RationalAngle(0, 360), RationalAngle(17, 360)};
  const SeminormSpec specs[2] = {{1.0, 0.5}, {2.0, 0.25}};
  double worst_gap = 1e300, worst_stab = 0.0;
  for (int m = 1; m <= params.M; ++m) {
    for (const auto& x : xs) {
      for (const auto& spec : specs) {
        const IntervalEstimate est = interval_integral(x, m, spec, params, gamma);
        if (!est.pass) {
          detail = "bound failed at m=" + std::to_string(m) + " p=" + fmt(spec.p) +
                   " eps=" + fmt(spec.eps) + " (value_log2 " + fmt(est.value_log2) +
                   " < lower_log2 " + fmt(est.lower_log2) + ")";
          return false;
        }
        worst_gap = std::min(worst_gap, est.value_log2 - est.lower_log2);
        QuadratureOptions fine;
        fine.panels *= 2;
        const IntervalEstimate est2 = interval_integral(x, m, spec, params, gamma, fine);
        const double stab = std::fabs(std::exp2(est2.value_log2 - est.value_log2) - 1.0);
        worst_stab = std::max(worst_stab, stab);
        if (stab > tol_quad_doubling_rel) {
          detail = "quadrature doubling moved value by " + fmt(stab) + " at m=" +
                   std::to_string(m);
          return false;
        }
      }
    }
  }
  detail = "12 bounds hold, min log2 gap " + fmt(worst_gap) + ", doubling drift <= " +
           fmt(worst_stab);
  return true;
}

bool disk_solver_orders(std::string& detail) {
  LacunaryParams disk;
  disk.q = 7;
  disk.M = 0;
  const int res[3] = {64, 128, 256};
  ErrorNorms dir[3], neu[3];
  for (int i = 0; i < 3; ++i) {
    const Mesh m = mesh_polar(disk, res[i], res[i] / 8);

    const SolveResult vd = solve_dirichlet(m, [](Vec2) { return 1.0; });
    dir[i] = error_norms(
        m, vd.v, [](Vec2 p) { return (p.x * p.x + p.y * p.y - 1.0) / 4.0; },
        [](Vec2 p) { return Vec2{p.x / 2.0, p.y / 2.0}; });

    const SolveResult vn = solve_neumann(m, [](Vec2 p) { return disk_g0(p.x, p.y); });
    neu[i] = error_norms(
        m, vn.v, [](Vec2 p) { return disk_v0(p.x, p.y); },
        [](Vec2 p) { return disk_v0_gradient(p.x, p.y); });
  }
  double min_l2 = 1e300, min_h1 = 1e300;
  for (int i = 0; i + 1 < 3; ++i) {
    min_l2 = std::min({min_l2, std::log2(dir[i].l2 / dir[i + 1].l2),
                       std::log2(neu[i].l2 / neu[i + 1].l2)});
    min_h1 = std::min({min_h1, std::log2(dir[i].h1 / dir[i + 1].h1),
                       std::log2(neu[i].h1 / neu[i + 1].h1)});
  }
  detail = "L2 order >= " + fmt(min_l2) + ", H1 order >= " + fmt(min_h1);
  return min_l2 >= tol_l2_order && min_h1 >= tol_h1_order;
}

bool green_identities_strict(std::string& detail) {
  LacunaryParams params;
  params.q = strict_q_ref;
  params.M = 1;
  const Mesh m = mesh_polar(params, 512, 64);

  const double omega = area(params).value;
  if (std::fabs(omega - pi) > tol_area_vs_disk) {
    detail = "|omega| " + fmt(omega) + " further than " + fmt(tol_area_vs_disk) + " from pi";
    return false;
  }

  const ScalarField one = [](Vec2) { return 1.0; };
  const SolveResult vd = solve_dirichlet(m, one);
  const double flux = boundary_flux(m, vd, one).total;
  const double rel_d = std::fabs(flux - omega) / omega;
  if (rel_d > tol_green_rel) {
    detail = "dirichlet flux " + fmt(flux) + " vs |omega| " + fmt(omega) + ", rel " + fmt(rel_d);
    return false;
  }

  const QuadraticRhs g = choose_neumann_rhs(m);
  const SolveResult vn = solve_neumann(m, g);
  const GreenReport gn = green_check_neumann(m, vn, g);
  if (gn.rel_err > tol_green_rel) {
    detail = "neumann identity rel " + fmt(gn.rel_err);
    return false;
  }
  detail = "dirichlet rel " + fmt(rel_d) + ", neumann rel " + fmt(gn.rel_err);
  return true;
}

bool blowup_sweep(std::string& detail) {
  const BlowupReport rep = run_sweep(default_sweep_plan());
  for (const auto& r : rep.rows) {
    if (!r.error.empty()) {
      detail = "case n_theta=" + std::to_string(r.n_theta) + " M=" + std::to_string(r.M) +
               " failed: " + r.error;
      return false;
    }
  }
  const auto& inv = rep.invariants;
  if (!inv.all_pass()) {
    detail = std::string("invariants: control_flat ") + (inv.control_flat ? "pass" : "FAIL") +
             ", flux_growth_strict " + (inv.flux_growth_strict ? "pass" : "FAIL") +
             ", nonvanishing_flux " + (inv.nonvanishing_flux ? "pass" : "FAIL") +
             ", green_dirichlet_5pct " + (inv.green_dirichlet_5pct ? "pass" : "FAIL");
    return false;
  }

  // trace residual must decay with resolution on the perturbed cases
  std::vector<std::pair<int, double>> worst;  // (n_theta, max residual over M >= 1)
  for (const auto& r : rep.rows) {
    if (r.control) continue;
    bool found = false;
    for (auto& w : worst) {
      if (w.first == r.n_theta) {
        w.second = std::max(w.second, r.trace_max_residual);
        found = true;
      }
    }
    if (!found) worst.emplace_back(r.n_theta, r.trace_max_residual);
  }
  double min_order = 1e300;
  for (std::size_t i = 0; i + 1 < worst.size(); ++i) {
    min_order = std::min(min_order, std::log2(worst[i].second / worst[i + 1].second));
  }
  if (min_order < tol_trace_order) {
    detail = "trace residual decay order " + fmt(min_order);
    return false;
  }
  detail = "all invariants pass, trace decay order >= " + fmt(min_order);
  return true;
}

bool extension_and_cutoffs(std::string& detail) {
  const ExtensionCheck ec = extension_identity_check();
  if (ec.order < tol_extension_order) {
    detail = "extension residual order " + fmt(ec.order);
    return false;
  }

  LacunaryParams params;
  params.q = 7;
  params.M = 2;
  const RadialBoundary bd(params);
  const EllipsoidalDomain body(params);
  for (int i = 0; i < 128; ++i) {
    const RationalAngle th(static_cast<std::uint64_t>(i), 128);
    for (double z : {0.0, 0.5, -0.5, 0.9, -0.9}) {
      const double rim = std::sqrt(1.0 - z * z) * bd.F(th);
      const Vec3 in{0.999 * rim * cos_ra(th), 0.999 * rim * sin_ra(th), z};
      const Vec3 out{1.001 * rim * cos_ra(th), 1.001 * rim * sin_ra(th), z};
      if (body.contains(in) != Containment::inside ||
          body.contains(out) != Containment::outside) {
        detail = "membership wrong at angle " + std::to_string(i) + "/128, z=" + fmt(z);
        return false;
      }
    }
  }
  if (body.contains({0.1, 0.0, 1.01}) != Containment::outside ||
      body.contains({0.0, 0.0, 0.999}) != Containment::inside) {
    detail = "membership wrong on the axis";
    return false;
  }

  // cutoff profiles: plateau, zero crossing with slope -1, linear tail
  bool mu_ok = cutoff_mu(0.0) == 1.0 && cutoff_mu(1.0) == 1.0 &&
               std::fabs(cutoff_mu(3.0)) < 1e-15 && std::fabs(cutoff_mu_d1(3.0) + 1.0) < 1e-15 &&
               std::fabs(cutoff_mu(4.0) + 1.0) < 1e-15 && cutoff_mu(1.5) > cutoff_mu(2.0) &&
               cutoff_mu(2.0) > cutoff_mu(2.5);
  // C^2 across the knots
  for (double knot : {1.0, 3.0}) {
    mu_ok = mu_ok && std::fabs(cutoff_mu_d1(knot - 1e-9) - cutoff_mu_d1(knot + 1e-9)) < 1e-6 &&
            std::fabs(cutoff_mu_d2(knot - 1e-9) - cutoff_mu_d2(knot + 1e-9)) < 1e-5;
  }
  bool chi_ok = cutoff_chi(0.0) == 1.0 && cutoff_chi(0.5) == 1.0 && cutoff_chi(1.0) == 0.0 &&
                cutoff_chi(1.5) == 0.0 && cutoff_chi(0.75) > 0.0 && cutoff_chi(0.75) < 1.0 &&
                std::fabs(cutoff_chi_d1(0.5)) < 1e-15 && std::fabs(cutoff_chi_d1(1.0)) < 1e-15 &&
                std::fabs(cutoff_chi_d2(0.5)) < 1e-12 && std::fabs(cutoff_chi_d2(1.0)) < 1e-12 &&
                std::fabs(cutoff_chi_radial_laplacian(1e-6, 3)) < 1e-9;
  if (!mu_ok || !chi_ok) {
    detail = std::string("cutoff profile check failed (") + (mu_ok ? "chi" : "mu") + ")";
    return false;
  }
  detail = "extension order " + fmt(ec.order) + ", membership exact at 1282 probes";
  return true;
}

bool determinism(std::string& detail) {
  SweepPlan plan;
  plan.base.q = 7;
  plan.base.M = 2;
  plan.cases = {{1, 256, 32}, {2, 256, 32}};
  plan.specs = default_sweep_plan().specs;
  plan.include_control = true;
  plan.flux_supersample = 16;

  const auto body = [](const BlowupReport& rep) {
    const std::string text = sweep_csv(rep, "T");
    return text.substr(text.find('\n') + 1);
  };

  const std::string run1 = body(run_sweep(plan));
  const std::string run2 = body(run_sweep(plan));
  if (run1 != run2) {
    detail = "two identical runs produced different report bodies";
    return false;
  }

  // worker-count independence, field by field
  setenv("LACUNA_THREADS", "1", 1);
  const std::string serial = body(run_sweep(plan));
  setenv("LACUNA_THREADS", "3", 1);
  const std::string parallel = body(run_sweep(plan));
  unsetenv("LACUNA_THREADS");

  const auto fields = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',' || c == '\n') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  const auto fa = fields(serial), fb = fields(parallel);
  if (fa.size() != fb.size()) {
    detail = "worker counts changed the report shape";
    return false;
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    char *ea = nullptr, *eb = nullptr;
    const double va = std::strtod(fa[i].c_str(), &ea);
    const double vb = std::strtod(fb[i].c_str(), &eb);
    const bool na = !fa[i].empty() && ea == fa[i].c_str() + fa[i].size();
    const bool nb = !fb[i].empty() && eb == fb[i].c_str() + fb[i].size();
    if (na != nb || (!na && fa[i] != fb[i])) {
      detail = "field " + std::to_string(i) + " differs across worker counts";
      return false;
    }
    if (na) {
      const double denom = std::max({std::fabs(va), std::fabs(vb), 1e-300});
      const double rel = std::fabs(va - vb) / denom;
      worst = std::max(worst, rel);
      if (rel > tol_worker_rel) {
        detail = "field " + std::to_string(i) + " deviates by " + fmt(rel) +
                 " across worker counts";
        return false;
      }
    }
  }
  detail = "bodies byte-identical across runs; worker-count deviation " + fmt(worst) +
           (serial == parallel ? " (bit-identical)" : "");
  return true;
}

}  // namespace

int main() {
  criterion(1, "admissibility conditions", conditions_suite);
  criterion(2, "radial profile bound", profile_bound);
  criterion(3, "interval lower bounds", interval_lower_bounds);
  criterion(4, "disk solver orders", disk_solver_orders);
  criterion(5, "flux identities at strict base", green_identities_strict);
  criterion(6, "blow-up sweep", blowup_sweep);
  criterion(7, "extension and cutoff identities", extension_and_cutoffs);
  criterion(8, "reproducibility", determinism);

  if (failures == 0) {
    std::printf("acceptance: all 8 criteria pass\n");
  } else {
    std::printf("acceptance: %d criteria FAILED\n", failures);
  }
  return failures;
}
