#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "lacuna/geometry.hpp"
#include "lacuna/mesh.hpp"
#include "lacuna/poisson.hpp"
#include "lacuna/regularity.hpp"

using namespace lacuna;

namespace {

LacunaryParams params_for(int M) {
  LacunaryParams p;
  p.q = 7;
  p.M = M;
  return p;
}

const ScalarField g_one = [](Vec2) { return 1.0; };

// Exact continuum values for the disk control with grad v = (x/2, y/2):
// the kernel reduces through the two-point distance density of the disk,
//   |grad v|_{s,p}^p = (1/2)^p area^2 E[ r^(p - 2 - sp) ],
// evaluated by 30-digit quadrature.
constexpr double disk_grad_oracle_p2 = 2.9184096508688625;  // p=2, eps=0.25
constexpr double disk_grad_oracle_p4 = 0.8663515682713742;  // p=4, eps=0.10

}  // namespace

TEST_CASE("grad seminorm rejects orders outside (0,1)") {
  const Mesh m = mesh_polar(params_for(0), 16, 4);
  const std::vector<double> v(m.node_count(), 0.0);
  CHECK_THROWS_AS(grad_seminorm_2d(m, v, {1.0, 0.25}), std::invalid_argument);  // s = 1.25
  CHECK_THROWS_AS(grad_seminorm_2d(m, v, {2.0, 0.5}), std::invalid_argument);   // s = 1.0
  CHECK(!grad_order_admissible({1.0, 0.25}));
  CHECK(!grad_order_admissible({2.0, 0.5}));
  CHECK(grad_order_admissible({2.0, 0.25}));
  CHECK(grad_order_admissible({4.0, 0.1}));
  CHECK_THROWS_AS(grad_seminorm_2d(m, std::vector<double>(3, 0.0), {2.0, 0.25}),
                  std::invalid_argument);
}

TEST_CASE("grad seminorm vanishes for a constant gradient") {
  const Mesh m = mesh_polar(params_for(1), 32, 6);
  std::vector<double> v(m.node_count());
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    v[i] = 2.0 * m.xy[i].x - 3.0 * m.xy[i].y + 0.7;
  }
  const auto r = grad_seminorm_2d(m, v, {2.0, 0.25});
  // element gradients reproduce the linear up to rounding, so the seminorm
  // sits at rounding level rather than exactly zero
  CHECK(r.value <= 1e-10);
}

TEST_CASE("grad seminorm is absolutely homogeneous") {
  const Mesh m = mesh_polar(params_for(1), 32, 6);
  std::vector<double> v(m.node_count()), w(m.node_count());
  for (std::size_t i = 0; i < m.node_count(); ++i) {
    v[i] = m.xy[i].x * m.xy[i].x - 0.5 * m.xy[i].y + std::sin(3.0 * m.xy[i].y);
    w[i] = -2.0 * v[i];  // power-of-two factor scales every term exactly
  }
  const SeminormSpec spec{2.0, 0.25};
  const auto rv = grad_seminorm_2d(m, v, spec);
  const auto rw = grad_seminorm_2d(m, w, spec);
  CHECK(rv.value > 0.0);
  CHECK(rw.value == doctest::Approx(2.0 * rv.value).epsilon(1e-14));
}

TEST_CASE("grad seminorm on the disk control approaches the continuum value") {
  // FEM gradients of the g=1 Dirichlet solve; the barycenter quadrature of
  // the s=3/4 kernel converges slowly (near-diagonal mass), so the check is
  // a strictly shrinking gap plus the calibrated endpoint. The weaker s=0.35
  // kernel is far-integrable and the same estimator nails it immediately.
  double prev_gap = 1e300;
  double val256 = 0.0;
  for (int nt : {64, 128, 256}) {
    const Mesh m = mesh_polar(params_for(0), nt, std::max(4, nt / 8));
    const auto d = solve_dirichlet(m, g_one);
    const auto r = grad_seminorm_2d(m, d.v, {2.0, 0.25});
    const double gap = std::abs(r.value - disk_grad_oracle_p2);
    CHECK(gap < prev_gap);
    prev_gap = gap;
    val256 = r.value;

    const auto r4 = grad_seminorm_2d(m, d.v, {4.0, 0.1});
    CHECK(r4.value == doctest::Approx(disk_grad_oracle_p4).epsilon(2e-3));
  }
  CHECK(prev_gap <= 0.22);  // measured 0.215 at n_theta = 256
  CHECK(val256 == doctest::Approx(disk_grad_oracle_p2).epsilon(0.08));
}

TEST_CASE("grad seminorm reports its split and decimation") {
  const Mesh m = mesh_polar(params_for(0), 256, 32);
  const auto d = solve_dirichlet(m, g_one);
  const auto r = grad_seminorm_2d(m, d.v, {2.0, 0.25});
  CHECK(r.far_pow > 0.0);
  CHECK(r.near_pow > 0.0);
  CHECK(r.value == doctest::Approx(std::sqrt(r.far_pow + r.near_pow)));
  CHECK(r.stride % 2 == 1);  // even strides would sample one orientation class
  CHECK(r.sampled > 0);
  CHECK(r.sampled <= m.tri.size());
}

TEST_CASE("flux seminorm of the disk control sits at rounding level") {
  const Mesh m = mesh_polar(params_for(0), 256, 32);
  const auto d = solve_dirichlet(m, g_one);
  const auto fl = boundary_flux(m, d, g_one);
  const auto fs = flux_seminorm(m, fl.lambda, {2.0, 0.25}, 16);
  CHECK(fs.value <= 1e-3);  // stated noise allowance; measured 3.7e-14
  CHECK(fs.samples == 4096);
  // ceil(N / 4096) = 80640 shares the factor 315 with the modulus and gets
  // bumped once to the coprime step
  CHECK(fs.step_num == 80641);
  CHECK(!fs.under_resolved);
}

TEST_CASE("flux seminorm jumps by orders of magnitude from control to M=1") {
  const int nt = 256;
  double control = 0.0, pathological = 0.0;
  for (int M : {0, 1}) {
    const Mesh m = mesh_polar(params_for(M), nt, nt / 8);
    const auto d = solve_dirichlet(m, g_one);
    const auto fl = boundary_flux(m, d, g_one);
    const auto fs = flux_seminorm(m, fl.lambda, {2.0, 0.25}, 16);
    (M == 0 ? control : pathological) = fs.value;
    CHECK(fs.under_resolved == (M == 1));  // 256 < 8 * 2^7
  }
  CHECK(pathological >= 1.0);  // measured 2.404
  // calibrated ratio 6.5e13; frozen with headroom
  CHECK(pathological / std::max(control, 1e-15) >= 1e10);
}

TEST_CASE("flux seminorm is nondecreasing in eps on a fixed sample set") {
  const Mesh m = mesh_polar(params_for(1), 256, 32);
  const auto d = solve_dirichlet(m, g_one);
  const auto fl = boundary_flux(m, d, g_one);
  double prev = 0.0;
  for (double eps : {0.1, 0.25, 0.5}) {
    const auto fs = flux_seminorm(m, fl.lambda, {2.0, eps}, 16);
    CHECK(fs.value >= prev);
    prev = fs.value;
  }
}

TEST_CASE("flux seminorm validates its inputs") {
  const Mesh m = mesh_polar(params_for(0), 16, 4);
  const std::vector<double> lam(16, 0.5);
  CHECK_THROWS_AS(flux_seminorm(m, std::vector<double>(8, 0.5), {2.0, 0.25}, 16),
                  std::invalid_argument);
  CHECK_THROWS_AS(flux_seminorm(m, lam, {2.0, 0.25}, 0), std::invalid_argument);
  CHECK_THROWS_AS(flux_seminorm(m, lam, {0.5, 0.25}, 16), std::invalid_argument);
  CHECK_NOTHROW(flux_seminorm(m, lam, {2.0, 0.25}, 16));
}

TEST_CASE("flux seminorm is reproducible call to call") {
  const Mesh m = mesh_polar(params_for(2), 64, 8);
  const auto d = solve_dirichlet(m, g_one);
  const auto fl = boundary_flux(m, d, g_one);
  const auto a = flux_seminorm(m, fl.lambda, {2.0, 0.25}, 16);
  const auto b = flux_seminorm(m, fl.lambda, {2.0, 0.25}, 16);
  CHECK(a.value == b.value);
  CHECK(a.step_num == b.step_num);
}

TEST_CASE("trace certification accepts the exact normal field") {
  const LacunaryParams p = params_for(1);
  const RadialBoundary bd(p);
  const int nt = 256;
  std::vector<RationalAngle> th;
  std::vector<double> u1, u2;
  for (int j = 0; j < nt; ++j) {
    th.push_back(RationalAngle(2 * static_cast<std::uint64_t>(j) + 1,
                               2 * static_cast<std::uint64_t>(nt)));
    const Vec2 n = bd.unit_normal(th.back());
    u1.push_back(n.x);
    u2.push_back(n.y);
  }
  const auto tc = certify_trace_samples(p, th, u1, u2);
  CHECK(tc.max_residual <= 1e-12);  // algebraic identity, measured 1.4e-16
  CHECK(tc.residual.size() == static_cast<std::size_t>(nt));
  // b = F f / w oscillates with f, a = F / w barely moves
  CHECK(tc.b_seminorm > 1.0);
  CHECK(tc.a_seminorm < 0.1);
}

TEST_CASE("trace certification on the disk control is discretization noise") {
  const Mesh m = mesh_polar(params_for(0), 256, 32);
  const auto d = solve_dirichlet(m, g_one);
  const auto tc = certify_trace_relation(m, d);
  // f = 0, so the relation reads b = 0 and b is the tangential gradient
  // component scaled by F; the symmetric solve leaves only rounding
  CHECK(tc.max_residual <= 1e-12);
}

TEST_CASE("trace certification rejects Neumann solutions") {
  const Mesh m = mesh_polar(params_for(0), 64, 8);
  const auto nsol = solve_neumann(m, choose_neumann_rhs(m));
  CHECK_THROWS_AS(certify_trace_relation(m, nsol), std::invalid_argument);
}

TEST_CASE("trace residual decays under refinement on M=1") {
  const LacunaryParams p = params_for(1);
  double r256 = 0.0, r512 = 0.0;
  for (int nt : {256, 512}) {
    const Mesh m = mesh_polar(p, nt, nt / 8);
    const auto d = solve_dirichlet(m, g_one);
    const auto tc = certify_trace_relation(m, d);
    (nt == 256 ? r256 : r512) = tc.max_residual;
    CHECK(tc.growth_constant == doctest::Approx(tc.max_residual * nt));
  }
  const double order = std::log2(r256 / r512);
  CHECK(order >= 0.9);  // measured 2.31
}

TEST_CASE("default sweep plan has the documented shape") {
  const SweepPlan plan = default_sweep_plan();
  CHECK(plan.cases.size() == 6);
  CHECK(plan.specs.size() == 4);
  CHECK(plan.include_control);
  CHECK(plan.flux_supersample == 16);
  for (const auto& c : plan.cases) {
    CHECK((c.M == 1 || c.M == 2));
    CHECK(c.n_r == c.n_theta / 8);
  }
}

TEST_CASE("run_sweep on a small plan: controls, ratios, invariants") {
  SweepPlan plan;
  plan.base = params_for(2);
  plan.cases = {{1, 64, 8}};
  plan.specs = {{2.0, 0.25}};
  plan.flux_supersample = 16;

  const auto rep = run_sweep(plan);
  REQUIRE(rep.rows.size() == 2);  // the control twin is added
  CHECK(rep.rows[0].control);
  CHECK(rep.rows[0].M == 0);
  CHECK(rep.rows[1].M == 1);
  CHECK(rep.grad_specs.size() == 1);
  CHECK(rep.headline_spec == 0);

  for (const auto& r : rep.rows) {
    CHECK(r.error.empty());
    CHECK(r.flux_total > 0.9 * pi);
    CHECK(r.green_dirichlet_rel <= 0.05);
    CHECK(r.flux_semi.size() == 1);
    CHECK(r.grad_semi.size() == 1);
    CHECK(std::isfinite(r.flux_semi[0]));
    CHECK(r.flux_semi[0] >= 0.0);
  }
  CHECK(rep.flux_growth[0][0] == doctest::Approx(1.0));  // control vs itself
  CHECK(rep.flux_growth[1][0] >= 1e6);

  CHECK(rep.invariants.flux_growth_strict);
  CHECK(rep.invariants.control_flat);  // single resolution: nothing to compare
  CHECK(rep.invariants.nonvanishing_flux);
  CHECK(rep.invariants.green_dirichlet_5pct);
  CHECK(rep.invariants.all_pass());
}

TEST_CASE("run_sweep tags failing cases and voids the invariants") {
  SweepPlan plan;
  plan.base = params_for(1);
  plan.cases = {{1, 64, 8}, {1, 12, 8}};  // 12 is not a valid boundary grid
  plan.specs = {{2.0, 0.25}};

  const auto rep = run_sweep(plan);
  bool found_error = false;
  for (const auto& r : rep.rows) {
    if (r.n_theta == 12) {
      CHECK(!r.error.empty());
      found_error = true;
    }
  }
  CHECK(found_error);
  CHECK(!rep.invariants.all_pass());
}

TEST_CASE("run_sweep rejects malformed plans") {
  SweepPlan empty;
  empty.specs = {{2.0, 0.25}};
  CHECK_THROWS_AS(run_sweep(empty), std::invalid_argument);

  SweepPlan nospec;
  nospec.cases = {{1, 64, 8}};
  CHECK_THROWS_AS(run_sweep(nospec), std::invalid_argument);

  SweepPlan badspec;
  badspec.cases = {{1, 64, 8}};
  badspec.specs = {{2.0, 1.5}};
  CHECK_THROWS_AS(run_sweep(badspec), std::invalid_argument);
}
