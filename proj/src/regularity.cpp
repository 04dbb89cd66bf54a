#include "lacuna/regularity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "lacuna/detsum.hpp"
#include "lacuna/geometry.hpp"

namespace lacuna {

namespace {

// |x|^p for the vector norm squared x2 = |x|^2; exact shortcuts where the
// power is a small integer
double pow_from_sq(double x2, double p) {
  if (p == 2.0) return x2;
  if (p == 4.0) return x2 * x2;
  if (p == 1.0) return std::sqrt(x2);
  return std::pow(x2, 0.5 * p);
}

}  // namespace

// ---------------------------------------------------------------------------
// grad_seminorm_2d

GradSeminormResult grad_seminorm_2d(const Mesh& m, std::span<const double> v,
                                    const SeminormSpec& spec) {
  validate_spec(spec);
  const double s = 1.0 / spec.p + spec.eps;
  if (!(s > 0.0 && s < 1.0)) {
    throw std::invalid_argument("grad_seminorm_2d: order s = 1/p + eps must lie in (0,1)");
  }
  if (v.size() != m.node_count()) {
    throw std::invalid_argument("grad_seminorm_2d: value vector does not match mesh");
  }

  const std::size_t nt = m.tri.size();
  const double p = spec.p;
  const double sp = s * p;

  std::vector<Vec2> grad(nt);
  std::vector<Vec2> bary(nt);
  std::vector<double> area(nt);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(nt); ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    grad[t] = element_gradient(m, t, v);
    const auto& tr = m.tri[t];
    const Vec2 a = m.xy[static_cast<std::size_t>(tr[0])];
    const Vec2 b = m.xy[static_cast<std::size_t>(tr[1])];
    const Vec2 c = m.xy[static_cast<std::size_t>(tr[2])];
    bary[t] = {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
    area[t] = triangle_area(m, t);
  }

  // edge-jump terms, every interior edge: |J|^p |e| d^(1-sp)
  double near_pow = 0.0;
  {
    std::unordered_map<std::uint64_t, std::uint32_t> first;
    first.reserve(2 * nt);
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& tr = m.tri[t];
      for (int e = 0; e < 3; ++e) {
        const auto n0 = static_cast<std::uint64_t>(tr[e]);
        const auto n1 = static_cast<std::uint64_t>(tr[(e + 1) % 3]);
        const std::uint64_t key = (std::min(n0, n1) << 32) | std::max(n0, n1);
        const auto it = first.find(key);
        if (it == first.end()) {
          first.emplace(key, static_cast<std::uint32_t>(t));
          continue;
        }
        const std::size_t t2 = it->second;
        const Vec2 pa = m.xy[static_cast<std::size_t>(n0)];
        const Vec2 pb = m.xy[static_cast<std::size_t>(n1)];
        const double elen = std::hypot(pb.x - pa.x, pb.y - pa.y);
        const double jx = grad[t].x - grad[t2].x;
        const double jy = grad[t].y - grad[t2].y;
        const double dx = bary[t].x - bary[t2].x;
        const double dy = bary[t].y - bary[t2].y;
        const double de = std::sqrt(dx * dx + dy * dy);
        near_pow += pow_from_sq(jx * jx + jy * jy, p) * elen * std::pow(de, 1.0 - sp);
      }
    }
  }

  // far field, decimated to roughly target_sampled triangles. The stride is
  // forced odd because the two triangles of each strip quad alternate in the
  // element order; an even stride would sample only one orientation class.
  constexpr std::size_t target_sampled = 12000;
  std::size_t stride = (nt + target_sampled - 1) / target_sampled;
  if (stride % 2 == 0) ++stride;
  const std::size_t ns = (nt + stride - 1) / stride;

  std::vector<double> sx(ns), sy(ns), sgx(ns), sgy(ns), sw(ns);
  std::vector<std::array<std::int32_t, 3>> snode(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const std::size_t t = i * stride;
    sx[i] = bary[t].x;
    sy[i] = bary[t].y;
    sgx[i] = grad[t].x;
    sgy[i] = grad[t].y;
    sw[i] = area[t];
    snode[i] = m.tri[t];
  }

  const double dexpo = -0.5 * (2.0 + sp);
  const auto row = [&](std::size_t i) {
    double acc = 0.0;
    const double xi = sx[i], yi = sy[i], gxi = sgx[i], gyi = sgy[i], wi = sw[i];
    const auto& ni = snode[i];
    for (std::size_t j = i + 1; j < ns; ++j) {
      const auto& nj = snode[j];
      bool touch = false;
      for (int u = 0; u < 3 && !touch; ++u) {
        touch = ni[u] == nj[0] || ni[u] == nj[1] || ni[u] == nj[2];
      }
      if (touch) continue;
      const double dx = xi - sx[j];
      const double dy = yi - sy[j];
      const double gx = gxi - sgx[j];
      const double gy = gyi - sgy[j];
      acc += pow_from_sq(gx * gx + gy * gy, p) * wi * sw[j] *
             std::pow(dx * dx + dy * dy, dexpo);
    }
    return acc;
  };

  const double k2 = static_cast<double>(stride) * static_cast<double>(stride);
  GradSeminormResult out;
  out.far_pow = 2.0 * k2 * tiled_sum(ns, row);
  out.near_pow = near_pow;
  out.value = std::pow(out.far_pow + out.near_pow, 1.0 / p);
  out.sampled = ns;
  out.stride = stride;
  return out;
}

// ---------------------------------------------------------------------------
// flux_seminorm

FluxSeminormResult flux_seminorm(const Mesh& m, std::span<const double> lambda,
                                 const SeminormSpec& spec, int supersample) {
  validate_spec(spec);
  if (lambda.size() != static_cast<std::size_t>(m.n_theta)) {
    throw std::invalid_argument("flux_seminorm: lambda does not match the boundary grid");
  }
  if (supersample < 1) throw std::invalid_argument("flux_seminorm: supersample must be >= 1");

  const std::uint64_t N = m.params.N;
  const auto nb = static_cast<std::uint64_t>(m.n_theta);
  const std::uint64_t sn = nb * static_cast<std::uint64_t>(supersample);
  if (sn > N) throw std::invalid_argument("flux_seminorm: weight grid finer than the modulus");

  // Step numerator: ceil(N / sn) bumped until coprime to the odd part of N.
  // Dyadic steps hold the k >= 2 phases constant (they step by multiples of
  // the odd part); a coprime step visits every residue, and the samples are
  // still exactly uniform, g/N of a turn apart, overshooting one full turn
  // by under sn/N of a turn.
  const std::uint64_t odd = N >> std::countr_zero(N);
  std::uint64_t g = (N + sn - 1) / sn;
  while (std::gcd(g, odd) != 1) ++g;

  const SeriesEvaluator ev(m.params, N);
  std::vector<double> u(sn);
  for (std::uint64_t k = 0; k < sn; ++k) {
    const std::uint64_t num = (k * g) % N;
    const std::uint64_t scaled = num * nb;  // < N * n_theta, fits: N ~ 2^28
    const auto e = static_cast<std::size_t>(scaled / N);
    const double t = static_cast<double>(scaled - static_cast<std::uint64_t>(e) * N) /
                     static_cast<double>(N);
    const double lam = (1.0 - t) * lambda[e] + t * lambda[(e + 1) % nb];
    const double F = 1.0 + ev.deviation(num);
    const double f = ev.f(num);
    u[k] = lam * std::sqrt(F * F + f * f);
  }

  FluxSeminormResult out;
  out.value = gagliardo_1d(u, spec, true);
  out.samples = sn;
  out.step_num = g;
  out.under_resolved = m.params.M >= 1 &&
                       (m.params.q >= 60 || nb < (std::uint64_t{8} << m.params.q));
  return out;
}

// ---------------------------------------------------------------------------
// trace certification

TraceCertification certify_trace_samples(const LacunaryParams& p,
                                         std::span<const RationalAngle> theta,
                                         std::span<const double> u1, std::span<const double> u2,
                                         const SeminormSpec& spec) {
  if (theta.size() != u1.size() || theta.size() != u2.size()) {
    throw std::invalid_argument("certify_trace_samples: sample lengths differ");
  }
  if (theta.size() < 16) {
    throw std::invalid_argument("certify_trace_samples: need at least 16 samples");
  }
  validate_spec(spec);

  const RadialBoundary bd(p);
  const TraceCoefficients c = trace_tangential_pair(bd, theta, u1, u2);

  TraceCertification out;
  out.residual.resize(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) {
    out.residual[j] = std::abs(c.a[j] * bd.f(theta[j]) - c.b[j]);
    out.max_residual = std::max(out.max_residual, out.residual[j]);
  }
  out.growth_constant = out.max_residual * static_cast<double>(theta.size());
  out.a_seminorm = gagliardo_1d(c.a, spec, true);
  out.b_seminorm = gagliardo_1d(c.b, spec, true);
  return out;
}

TraceCertification certify_trace_relation(const Mesh& m, const SolveResult& sol,
                                          const SeminormSpec& spec) {
  if (sol.bc != BoundaryCondition::dirichlet) {
    throw std::invalid_argument(
        "certify_trace_relation: needs a Dirichlet solution; a Neumann gradient is "
        "boundary-tangential, which is the other relation");
  }
  if (sol.v.size() != m.node_count()) {
    throw std::invalid_argument("certify_trace_relation: solution does not match mesh");
  }

  const int nb = m.n_theta;
  std::vector<RationalAngle> theta;
  std::vector<double> u1(static_cast<std::size_t>(nb)), u2(static_cast<std::size_t>(nb));
  theta.reserve(static_cast<std::size_t>(nb));
  const std::size_t strip = static_cast<std::size_t>(nb) +
                            static_cast<std::size_t>(m.n_r - 2) * 2 * static_cast<std::size_t>(nb);
  for (int j = 0; j < nb; ++j) {
    theta.push_back(RationalAngle(2 * static_cast<std::uint64_t>(j) + 1,
                                  2 * static_cast<std::uint64_t>(nb)));
    // gradient on the strip triangle carrying boundary edge j
    const Vec2 gr = element_gradient(m, strip + 2 * static_cast<std::size_t>(j), sol.v);
    u1[static_cast<std::size_t>(j)] = gr.x;
    u2[static_cast<std::size_t>(j)] = gr.y;
  }
  return certify_trace_samples(m.params, theta, u1, u2, spec);
}

// ---------------------------------------------------------------------------
// sweep

SweepPlan default_sweep_plan() {
  SweepPlan plan;
  plan.base.q = 7;
  plan.base.M = 2;
  for (int nt : {256, 512, 1024}) {
    for (int M : {1, 2}) {
      plan.cases.push_back({M, nt, nt / 8});
    }
  }
  plan.specs = {{1.0, 0.25}, {2.0, 0.25}, {2.0, 0.5}, {4.0, 0.1}};
  plan.include_control = true;
  plan.flux_supersample = 16;
  return plan;
}

namespace {

void run_case(const SweepPlan& plan, const std::vector<SeminormSpec>& grad_specs,
              int headline, SweepRow& row) {
  LacunaryParams params = plan.base;
  params.M = row.M;

  const Mesh mesh = mesh_polar(params, row.n_theta, row.n_r);
  row.area_polygon = mesh_area(mesh);
  row.area_smooth = area(params).value;

  const ScalarField g1 = [](Vec2) { return 1.0; };
  const SolveResult d = solve_dirichlet(mesh, g1);
  row.dirichlet_residual = d.residual_rel;

  const FluxResult fl = boundary_flux(mesh, d, g1);
  row.flux_total = fl.total;
  row.green_dirichlet_rel = std::abs(fl.total - row.area_smooth) / row.area_smooth;
  row.conservation_rel = std::abs(fl.total - row.area_polygon) / row.area_polygon;

  const QuadraticRhs grhs = choose_neumann_rhs(mesh);
  const SolveResult nsol = solve_neumann(mesh, grhs);
  row.neumann_residual = nsol.residual_rel;
  const GreenReport gn = green_check_neumann(mesh, nsol, grhs);
  row.green_neumann_lhs = gn.lhs;
  row.green_neumann_rhs = gn.rhs;
  row.green_neumann_rel = gn.rel_err;

  row.flux_semi.resize(plan.specs.size());
  for (std::size_t i = 0; i < plan.specs.size(); ++i) {
    const auto fs = flux_seminorm(mesh, fl.lambda, plan.specs[i], plan.flux_supersample);
    row.flux_semi[i] = fs.value;
    row.flux_under_resolved = fs.under_resolved;
  }

  row.grad_semi.resize(grad_specs.size());
  for (std::size_t i = 0; i < grad_specs.size(); ++i) {
    row.grad_semi[i] = grad_seminorm_2d(mesh, d.v, grad_specs[i]).value;
  }

  const auto tc = certify_trace_relation(mesh, d, plan.specs[static_cast<std::size_t>(headline)]);
  row.trace_max_residual = tc.max_residual;
  row.trace_growth_constant = tc.growth_constant;
  row.trace_a_seminorm = tc.a_seminorm;
  row.trace_b_seminorm = tc.b_seminorm;
}

// |a - b| within 10% of the larger magnitude; floor guards values that sit
// at a known noise level
bool flat10(double a, double b, double floor_) {
  return std::abs(a - b) <= 0.10 * std::max({std::abs(a), std::abs(b), floor_});
}

}  // namespace

BlowupReport run_sweep(const SweepPlan& plan) {
  if (plan.cases.empty()) throw std::invalid_argument("run_sweep: empty plan");
  if (plan.specs.empty()) throw std::invalid_argument("run_sweep: no seminorm specs");
  for (const auto& s : plan.specs) validate_spec(s);
  if (plan.flux_supersample < 1) throw std::invalid_argument("run_sweep: bad supersample");

  BlowupReport rep;
  rep.plan = plan;
  for (const auto& s : plan.specs) {
    if (grad_order_admissible(s)) rep.grad_specs.push_back(s);
  }
  rep.headline_spec = 0;
  for (std::size_t i = 0; i < plan.specs.size(); ++i) {
    if (plan.specs[i].p == 2.0 && plan.specs[i].eps == 0.25) {
      rep.headline_spec = static_cast<int>(i);
      break;
    }
  }

  for (const auto& c : plan.cases) {
    SweepRow r;
    r.M = c.M;
    r.n_theta = c.n_theta;
    r.n_r = c.n_r;
    rep.rows.push_back(std::move(r));
  }
  if (plan.include_control) {
    std::map<std::pair<int, int>, bool> has_control;
    for (const auto& c : plan.cases) {
      auto& flag = has_control[{c.n_theta, c.n_r}];
      flag = flag || c.M == 0;
    }
    for (const auto& [res, present] : has_control) {
      if (present) continue;
      SweepRow r;
      r.M = 0;
      r.n_theta = res.first;
      r.n_r = res.second;
      rep.rows.push_back(std::move(r));
    }
  }
  std::sort(rep.rows.begin(), rep.rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.n_theta, a.M, a.n_r) < std::tie(b.n_theta, b.M, b.n_r);
  });
  for (auto& r : rep.rows) r.control = r.M == 0;

  const auto nrows = static_cast<std::ptrdiff_t>(rep.rows.size());
#pragma omp parallel for schedule(dynamic) \
    num_threads(std::min(worker_count(), static_cast<int>(nrows)))
  for (std::ptrdiff_t i = 0; i < nrows; ++i) {
    auto& row = rep.rows[static_cast<std::size_t>(i)];
    try {
      run_case(plan, rep.grad_specs, rep.headline_spec, row);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }

  // growth ratios against the matched control
  std::map<std::pair<int, int>, std::size_t> control_at;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (rep.rows[i].control && rep.rows[i].error.empty()) {
      control_at[{rep.rows[i].n_theta, rep.rows[i].n_r}] = i;
    }
  }
  rep.flux_growth.resize(rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& row = rep.rows[i];
    if (!row.error.empty()) continue;
    const auto it = control_at.find({row.n_theta, row.n_r});
    if (it == control_at.end()) continue;
    const auto& ctl = rep.rows[it->second];
    auto& ratios = rep.flux_growth[i];
    ratios.resize(row.flux_semi.size());
    for (std::size_t s = 0; s < row.flux_semi.size(); ++s) {
      ratios[s] = row.flux_semi[s] / std::max(ctl.flux_semi[s], 1e-15);
    }
  }

  // invariants; any failed case voids them all
  bool any_error = false;
  for (const auto& r : rep.rows) any_error = any_error || !r.error.empty();
  if (!any_error) {
    auto& inv = rep.invariants;

    // control flatness across the two finest control resolutions
    std::vector<const SweepRow*> controls;
    for (const auto& r : rep.rows) {
      if (r.control) controls.push_back(&r);
    }
    std::sort(controls.begin(), controls.end(),
              [](const SweepRow* a, const SweepRow* b) { return a->n_theta < b->n_theta; });
    if (controls.size() >= 2) {
      const SweepRow& a = *controls[controls.size() - 2];
      const SweepRow& b = *controls[controls.size() - 1];
      bool flat = flat10(a.flux_total, b.flux_total, 1e-9) &&
                  flat10(a.green_neumann_lhs, b.green_neumann_lhs, 1e-9) &&
                  flat10(a.green_neumann_rhs, b.green_neumann_rhs, 1e-9);
      for (std::size_t s = 0; s < a.flux_semi.size(); ++s) {
        // the disk flux seminorm sits at rounding level; 1e-3 is the stated
        // discretization-noise allowance for it
        flat = flat && flat10(a.flux_semi[s], b.flux_semi[s], 1e-3);
      }
      for (std::size_t s = 0; s < a.grad_semi.size(); ++s) {
        flat = flat && flat10(a.grad_semi[s], b.grad_semi[s], 1e-9);
      }
      inv.control_flat = flat;
    } else {
      inv.control_flat = true;  // nothing to compare
    }

    // strict flux-seminorm growth in M at each resolution
    std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> by_res;
    for (const auto& r : rep.rows) {
      by_res[{r.n_theta, r.n_r}].push_back(
          {r.M, r.flux_semi[static_cast<std::size_t>(rep.headline_spec)]});
    }
    bool growth = true;
    for (auto& [res, vals] : by_res) {
      std::sort(vals.begin(), vals.end());
      for (std::size_t k = 1; k < vals.size(); ++k) {
        growth = growth && vals[k].second > vals[k - 1].second;
      }
    }
    inv.flux_growth_strict = growth;

    bool nonvanish = true, green5 = true;
    for (const auto& r : rep.rows) {
      nonvanish = nonvanish && r.flux_total >= 0.9 * pi;
      green5 = green5 && r.green_dirichlet_rel <= 0.05;
    }
    inv.nonvanishing_flux = nonvanish;
    inv.green_dirichlet_5pct = green5;
  }

  return rep;
}

}  // namespace lacuna
