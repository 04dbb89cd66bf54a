#include "lacuna/poisson.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <cmath>
#include <stdexcept>

#include "lacuna/detsum.hpp"

namespace lacuna {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// degree-4 rule on the reference triangle, 6 points, weights sum to 1
struct TriQuadPoint {
  double l1, l2, l3, w;
};

constexpr TriQuadPoint tri_quad_4[6] = {
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
};

struct ElementGeom {
  double area;
  double gx[3], gy[3];  // P1 basis gradients
};

ElementGeom element_geom(const Mesh& m, std::size_t t) {
  const Vec2& p1 = m.xy[m.tri[t][0]];
  const Vec2& p2 = m.xy[m.tri[t][1]];
  const Vec2& p3 = m.xy[m.tri[t][2]];
  ElementGeom e;
  const double b1 = p2.y - p3.y, c1 = p3.x - p2.x;
  const double b2 = p3.y - p1.y, c2 = p1.x - p3.x;
  const double b3 = p1.y - p2.y, c3 = p2.x - p1.x;
  const double twoA = (p2.x - p1.x) * (p3.y - p1.y) - (p2.y - p1.y) * (p3.x - p1.x);
  e.area = 0.5 * twoA;
  e.gx[0] = b1 / twoA;
  e.gx[1] = b2 / twoA;
  e.gx[2] = b3 / twoA;
  e.gy[0] = c1 / twoA;
  e.gy[1] = c2 / twoA;
  e.gy[2] = c3 / twoA;
  return e;
}

struct Assembled {
  SpMat S;                     // full stiffness
  Eigen::VectorXd b;           // load, b_i = integral(g phi_i), 3-midpoint rule
  Eigen::VectorXd mass;        // mass_i = integral(phi_i)
  double g_l1 = 0;             // integral of |g|, same quadrature
};

Assembled assemble(const Mesh& m, const ScalarField& g) {
  const auto n = static_cast<Eigen::Index>(m.node_count());
  const std::size_t nt = m.tri_count();
  Assembled a;
  a.b = Eigen::VectorXd::Zero(n);
  a.mass = Eigen::VectorXd::Zero(n);

  // local matrices and loads are slot addressed per triangle, so the
  // parallel fill is race free and the worker count cannot change any sum
  std::vector<double> lk(nt * 9);
  std::vector<double> lb(nt * 3);
  std::vector<double> l1(nt);
  std::vector<double> areas(nt);
#pragma omp parallel for schedule(static) num_threads(worker_count())
  for (std::ptrdiff_t ti = 0; ti < static_cast<std::ptrdiff_t>(nt); ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    const auto e = element_geom(m, t);
    const auto& v = m.tri[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        lk[t * 9 + static_cast<std::size_t>(3 * i + j)] =
            e.area * (e.gx[i] * e.gx[j] + e.gy[i] * e.gy[j]);
      }
    }
    const Vec2& p1 = m.xy[v[0]];
    const Vec2& p2 = m.xy[v[1]];
    const Vec2& p3 = m.xy[v[2]];
    const Vec2 m12{0.5 * (p1.x + p2.x), 0.5 * (p1.y + p2.y)};
    const Vec2 m23{0.5 * (p2.x + p3.x), 0.5 * (p2.y + p3.y)};
    const Vec2 m31{0.5 * (p3.x + p1.x), 0.5 * (p3.y + p1.y)};
    const double g12 = g(m12), g23 = g(m23), g31 = g(m31);
    // phi_i equals 1/2 on the two midpoints of edges touching vertex i
    lb[t * 3 + 0] = e.area / 3.0 * 0.5 * (g12 + g31);
    lb[t * 3 + 1] = e.area / 3.0 * 0.5 * (g12 + g23);
    lb[t * 3 + 2] = e.area / 3.0 * 0.5 * (g23 + g31);
    l1[t] = e.area / 3.0 * (std::abs(g12) + std::abs(g23) + std::abs(g31));
    areas[t] = e.area;
  }

  // ordered gather in triangle order keeps node sums deterministic
  std::vector<Triplet> trips;
  trips.reserve(nt * 9);
  a.g_l1 = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& v = m.tri[t];
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        trips.emplace_back(v[i], v[j], lk[t * 9 + static_cast<std::size_t>(3 * i + j)]);
      }
      a.b[v[i]] += lb[t * 3 + static_cast<std::size_t>(i)];
      a.mass[v[i]] += areas[t] / 3.0;
    }
    a.g_l1 += l1[t];
  }
  a.S.resize(n, n);
  a.S.setFromTriplets(trips.begin(), trips.end());
  return a;
}

constexpr double refine_target = 1e-12;
constexpr int refine_max = 3;

}  // namespace

QuadraticRhs choose_neumann_rhs(const Mesh& m) {
  // the moment integrands are quadratic, so the degree-4 rule is exact and
  // agrees with the 3-midpoint assembly rule; the assembled load of the
  // returned g then sums to zero up to rounding
  const double m1 = integrate(m, [](Vec2 p) { return p.x * p.y; });
  const double m2 = integrate(m, [](Vec2 p) { return p.x * p.x - p.y * p.y; });
  QuadraticRhs g;
  const double norm = std::hypot(m1, m2);
  if (std::abs(m1) < 1e-12 && std::abs(m2) < 1e-12) {
    g.alpha = 1.0;
    g.beta = 0.0;
  } else {
    g.alpha = -m2 / norm;
    g.beta = m1 / norm;
  }
  return g;
}

SolveResult solve_dirichlet(const Mesh& m, const ScalarField& g) {
  const auto a = assemble(m, g);
  const auto n = static_cast<Eigen::Index>(m.node_count());

  std::vector<char> is_bd(m.node_count(), 0);
  for (int id : m.boundary) is_bd[static_cast<std::size_t>(id)] = 1;
  std::vector<Eigen::Index> compact(m.node_count(), -1);
  Eigen::Index ni = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!is_bd[static_cast<std::size_t>(i)]) compact[static_cast<std::size_t>(i)] = ni++;
  }

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.S.nonZeros()));
  for (Eigen::Index k = 0; k < a.S.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a.S, k); it; ++it) {
      const auto r = compact[static_cast<std::size_t>(it.row())];
      const auto c = compact[static_cast<std::size_t>(it.col())];
      if (r >= 0 && c >= 0) trips.emplace_back(r, c, it.value());
    }
  }
  SpMat Sii(ni, ni);
  Sii.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd bi(ni);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (compact[static_cast<std::size_t>(i)] >= 0) bi[compact[static_cast<std::size_t>(i)]] = a.b[i];
  }

  Eigen::SimplicialLDLT<SpMat> solver(Sii);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("solve_dirichlet: factorization failed");
  }
  Eigen::VectorXd vi = solver.solve(-bi);

  SolveResult out;
  out.bc = BoundaryCondition::dirichlet;
  const double bnorm = std::max(bi.norm(), 1e-300);
  double relres = (Sii * vi + bi).norm() / bnorm;
  while (relres > refine_target && out.refine_steps < refine_max) {
    const Eigen::VectorXd r = -bi - Sii * vi;
    vi += solver.solve(r);
    ++out.refine_steps;
    relres = (Sii * vi + bi).norm() / bnorm;
  }
  out.residual_rel = relres;

  out.v.assign(m.node_count(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (compact[static_cast<std::size_t>(i)] >= 0) {
      out.v[static_cast<std::size_t>(i)] = vi[compact[static_cast<std::size_t>(i)]];
    }
  }
  return out;
}

SolveResult solve_neumann(const Mesh& m, const ScalarField& g) {
  const auto a = assemble(m, g);
  const auto n = static_cast<Eigen::Index>(m.node_count());

  // pure Neumann requires integral(g) = 0; the load row sum is that integral
  if (std::abs(a.b.sum()) > 1e-10 * std::max(a.g_l1, 1e-300)) {
    throw std::invalid_argument(
        "solve_neumann: incompatible right-hand side, integral(g) must vanish");
  }

  // Zero-mean Lagrange saddle [[S, mass], [mass^T, 0]] solved by block
  // elimination. Rows of S sum to zero, so summing the first block gives
  // lambda * (1^T mass) = -(1^T b) independently of v, and the remaining
  // system S v = -(b + lambda mass) is consistent. The SPD factorization
  // works on S with one pinned node (any node, the domain is connected);
  // the pinned row is then satisfied automatically because residuals of a
  // consistent system sum to zero. The zero-mean constraint fixes the
  // remaining constant. This is the exact saddle solution, without the
  // dense mass row ever entering the sparse factorization.
  const double omega = a.mass.sum();

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(a.S.nonZeros()));
  for (Eigen::Index k = 0; k < a.S.outerSize(); ++k) {
    for (SpMat::InnerIterator it(a.S, k); it; ++it) {
      if (it.row() > 0 && it.col() > 0) {
        trips.emplace_back(it.row() - 1, it.col() - 1, it.value());
      }
    }
  }
  SpMat A(n - 1, n - 1);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::SimplicialLDLT<SpMat> solver(A);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("solve_neumann: factorization failed");
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  double lambda = 0.0;

  // exact saddle correction: given first-block residual r1 and constraint
  // residual r2, solve S dv + mass dl = r1, mass^T dv = r2
  const auto saddle_step = [&](const Eigen::VectorXd& r1, double r2) {
    const double dl = r1.sum() / omega;
    const Eigen::VectorXd rhs = r1 - dl * a.mass;
    Eigen::VectorXd dv(n);
    dv[0] = 0.0;
    dv.tail(n - 1) = solver.solve(rhs.tail(n - 1));
    const double shift = (r2 - a.mass.dot(dv)) / omega;
    dv.array() += shift;
    v += dv;
    lambda += dl;
  };

  saddle_step(-a.b, 0.0);

  SolveResult out;
  out.bc = BoundaryCondition::neumann;
  const double bnorm = std::max(a.b.norm(), 1e-300);
  const auto saddle_resid = [&](Eigen::VectorXd& r1, double& r2) {
    r1 = -a.b - a.S * v - lambda * a.mass;
    r2 = -a.mass.dot(v);
    return std::sqrt(r1.squaredNorm() + r2 * r2) / bnorm;
  };

  Eigen::VectorXd r1;
  double r2 = 0.0;
  double relres = saddle_resid(r1, r2);
  while (relres > refine_target && out.refine_steps < refine_max) {
    saddle_step(r1, r2);
    ++out.refine_steps;
    relres = saddle_resid(r1, r2);
  }
  out.residual_rel = relres;
  out.multiplier = lambda;

  out.v.assign(m.node_count(), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) out.v[static_cast<std::size_t>(i)] = v[i];
  return out;
}

FluxResult boundary_flux(const Mesh& m, const SolveResult& sol, const ScalarField& g) {
  const auto a = assemble(m, g);
  const auto n = static_cast<Eigen::Index>(m.node_count());
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = sol.v[static_cast<std::size_t>(i)];

  // boundary rows of S v + b are the weak fluxes integral(lambda phi_i)
  const Eigen::VectorXd resid = a.S * v + a.b;

  const int nb = m.n_theta;
  std::vector<double> edge_len(static_cast<std::size_t>(nb));
  for (int j = 0; j < nb; ++j) {
    const Vec2& p = m.xy[m.boundary[static_cast<std::size_t>(j)]];
    const Vec2& q = m.xy[m.boundary[static_cast<std::size_t>((j + 1) % nb)]];
    edge_len[static_cast<std::size_t>(j)] = std::hypot(q.x - p.x, q.y - p.y);
  }

  std::vector<Triplet> trips;
  trips.reserve(static_cast<std::size_t>(nb) * 4);
  for (int j = 0; j < nb; ++j) {
    const int jn = (j + 1) % nb;
    const double L = edge_len[static_cast<std::size_t>(j)];
    trips.emplace_back(j, j, L / 3.0);
    trips.emplace_back(jn, jn, L / 3.0);
    trips.emplace_back(j, jn, L / 6.0);
    trips.emplace_back(jn, j, L / 6.0);
  }
  SpMat Mbd(nb, nb);
  Mbd.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd rb(nb);
  for (int j = 0; j < nb; ++j) rb[j] = resid[m.boundary[static_cast<std::size_t>(j)]];

  Eigen::SparseLU<SpMat> solver;
  solver.analyzePattern(Mbd);
  solver.factorize(Mbd);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("boundary_flux: boundary mass factorization failed");
  }
  const Eigen::VectorXd lam = solver.solve(rb);

  FluxResult out;
  out.lambda.assign(lam.data(), lam.data() + nb);
  out.total = 0.0;
  for (int j = 0; j < nb; ++j) {
    const int jn = (j + 1) % nb;
    out.total += edge_len[static_cast<std::size_t>(j)] * 0.5 * (out.lambda[static_cast<std::size_t>(j)] + out.lambda[static_cast<std::size_t>(jn)]);
  }

  // raw per-edge normal derivative from the adjacent element gradient;
  // boundary edge j lives in the first triangle of strip (n_r - 1, j)
  out.raw_edge.assign(static_cast<std::size_t>(nb), 0.0);
  for (int j = 0; j < nb; ++j) {
    const std::size_t t = static_cast<std::size_t>(m.n_theta) +
                          static_cast<std::size_t>(m.n_r - 2) * 2 * static_cast<std::size_t>(m.n_theta) +
                          2 * static_cast<std::size_t>(j);
    const Vec2 gr = element_gradient(m, t, sol.v);
    const Vec2& p = m.xy[m.boundary[static_cast<std::size_t>(j)]];
    const Vec2& q = m.xy[m.boundary[static_cast<std::size_t>((j + 1) % nb)]];
    const double L = edge_len[static_cast<std::size_t>(j)];
    // CCW traversal: outward normal is the direction vector rotated by -90
    const double nx = (q.y - p.y) / L;
    const double ny = -(q.x - p.x) / L;
    out.raw_edge[static_cast<std::size_t>(j)] = nx * gr.x + ny * gr.y;
  }
  return out;
}

GreenReport green_check_dirichlet(const Mesh& m, const SolveResult& sol, const ScalarField& g) {
  const auto flux = boundary_flux(m, sol, g);
  GreenReport rep;
  rep.lhs = flux.total;
  rep.rhs = integrate(m, g);
  rep.rel_err = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.rhs), 1e-300);
  return rep;
}

GreenReport green_check_neumann(const Mesh& m, const SolveResult& sol, const QuadraticRhs& g) {
  const int nb = m.n_theta;
  double lhs = 0.0;
  for (int j = 0; j < nb; ++j) {
    const int jn = (j + 1) % nb;
    const Vec2& p = m.xy[m.boundary[static_cast<std::size_t>(j)]];
    const Vec2& q = m.xy[m.boundary[static_cast<std::size_t>(jn)]];
    const double L = std::hypot(q.x - p.x, q.y - p.y);
    const double nx = (q.y - p.y) / L;
    const double ny = -(q.x - p.x) / L;
    const double v0 = sol.v[static_cast<std::size_t>(m.boundary[static_cast<std::size_t>(j)])];
    const double v1 = sol.v[static_cast<std::size_t>(m.boundary[static_cast<std::size_t>(jn)])];
    const Vec2 mid{0.5 * (p.x + q.x), 0.5 * (p.y + q.y)};
    const auto dn = [&](Vec2 pt) {
      const Vec2 gr = g.gradient(pt);
      return nx * gr.x + ny * gr.y;
    };
    // v linear, dn g linear along the edge: Simpson is exact
    const double e0 = v0 * dn(p);
    const double em = 0.5 * (v0 + v1) * dn(mid);
    const double e1 = v1 * dn(q);
    lhs += L / 6.0 * (e0 + 4.0 * em + e1);
  }
  GreenReport rep;
  rep.lhs = -lhs;
  rep.rhs = integrate(m, [&](Vec2 p) { return g(p) * g(p); });
  rep.rel_err = std::abs(rep.lhs - rep.rhs) / std::max(std::abs(rep.rhs), 1e-300);
  return rep;
}

ErrorNorms error_norms(const Mesh& m, const std::vector<double>& v, const ScalarField& exact,
                       const VectorField& exact_grad) {
  ErrorNorms out;
  for (std::size_t t = 0; t < m.tri_count(); ++t) {
    const auto e = element_geom(m, t);
    const auto& tv = m.tri[t];
    const Vec2& p1 = m.xy[tv[0]];
    const Vec2& p2 = m.xy[tv[1]];
    const Vec2& p3 = m.xy[tv[2]];
    const Vec2 gh = element_gradient(m, t, v);
    for (const auto& qp : tri_quad_4) {
      const Vec2 x{qp.l1 * p1.x + qp.l2 * p2.x + qp.l3 * p3.x,
                   qp.l1 * p1.y + qp.l2 * p2.y + qp.l3 * p3.y};
      const double vh = qp.l1 * v[static_cast<std::size_t>(tv[0])] +
                        qp.l2 * v[static_cast<std::size_t>(tv[1])] +
                        qp.l3 * v[static_cast<std::size_t>(tv[2])];
      const double dl2 = vh - exact(x);
      const Vec2 ge = exact_grad(x);
      const double dgx = gh.x - ge.x, dgy = gh.y - ge.y;
      out.l2 += qp.w * e.area * dl2 * dl2;
      out.h1 += qp.w * e.area * (dgx * dgx + dgy * dgy);
    }
  }
  out.l2 = std::sqrt(out.l2);
  out.h1 = std::sqrt(out.h1);
  return out;
}

double integrate(const Mesh& m, const ScalarField& f) {
  double s = 0.0;
  for (std::size_t t = 0; t < m.tri_count(); ++t) {
    const auto e = element_geom(m, t);
    const auto& tv = m.tri[t];
    const Vec2& p1 = m.xy[tv[0]];
    const Vec2& p2 = m.xy[tv[1]];
    const Vec2& p3 = m.xy[tv[2]];
    double acc = 0.0;
    for (const auto& qp : tri_quad_4) {
      const Vec2 x{qp.l1 * p1.x + qp.l2 * p2.x + qp.l3 * p3.x,
                   qp.l1 * p1.y + qp.l2 * p2.y + qp.l3 * p3.y};
      acc += qp.w * f(x);
    }
    s += e.area * acc;
  }
  return s;
}

Vec2 element_gradient(const Mesh& m, std::size_t t, std::span<const double> v) {
  const auto e = element_geom(m, t);
  const auto& tv = m.tri[t];
  Vec2 g{0.0, 0.0};
  for (int i = 0; i < 3; ++i) {
    g.x += e.gx[i] * v[static_cast<std::size_t>(tv[i])];
    g.y += e.gy[i] * v[static_cast<std::size_t>(tv[i])];
  }
  return g;
}

}  // namespace lacuna
