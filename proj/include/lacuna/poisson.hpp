#pragma once

// P1 Galerkin solver for  laplace v = g  on the meshed domain.
//
// Sign convention: the weak form of laplace v = g with the boundary
// conditions used here is  integral(grad v . grad phi) = -integral(g phi),
// so the linear system is  S v = -b  with S the (positive) stiffness matrix.
// For g = 1 on the disk this gives v = (r^2 - 1)/4 <= 0.
//
// Dirichlet: v = 0 on the boundary, interior block factored with LDLT.
// Neumann: d v / d n = 0 with the compatibility integral(g) = 0 enforced by
// the right-hand-side choice; the constant nullspace is pinned by a
// zero-mean Lagrange multiplier. The saddle system is eliminated exactly
// (rows of S sum to zero, so the multiplier is the mean residual) and the
// remaining singular solve reuses the LDLT factorization with one node pinned.

#include <cstddef>
#include <functional>
#include <string>
#include <span>
#include <vector>

#include "lacuna/mesh.hpp"

namespace lacuna {

// assembly evaluates fields from multiple threads, so callables must be pure
using ScalarField = std::function<double(Vec2)>;
using VectorField = std::function<Vec2(Vec2)>;

enum class BoundaryCondition { dirichlet, neumann };

struct SolveResult {
  BoundaryCondition bc = BoundaryCondition::dirichlet;
  std::vector<double> v;    // nodal values, mesh node order
  double residual_rel = 0;  // ||S v + b|| / ||b|| after refinement
  int refine_steps = 0;
  double multiplier = 0;    // neumann only: zero-mean Lagrange multiplier
};

// g = alpha x1 x2 + beta (x1^2 - x2^2); both pieces are harmonic and
// mean-free on symmetric domains.
struct QuadraticRhs {
  double alpha = 1.0;
  double beta = 0.0;
  double operator()(Vec2 p) const { return alpha * p.x * p.y + beta * (p.x * p.x - p.y * p.y); }
  Vec2 gradient(Vec2 p) const {
    return Vec2{alpha * p.y + 2.0 * beta * p.x, alpha * p.x - 2.0 * beta * p.y};
  }
};

// Picks (alpha, beta) orthogonal to the domain moments (integral of x1 x2,
// integral of x1^2 - x2^2) so that integral(g) = 0 holds exactly in the
// assembled quadrature. Falls back to (1, 0) when both moments are below
// 1e-12 (the disk).
QuadraticRhs choose_neumann_rhs(const Mesh& m);

SolveResult solve_dirichlet(const Mesh& m, const ScalarField& g);
SolveResult solve_neumann(const Mesh& m, const ScalarField& g);

struct FluxResult {
  std::vector<double> lambda;    // consistent nodal flux, mesh.boundary order
  std::vector<double> raw_edge;  // per-edge n . grad v, edge j = (boundary[j], boundary[j+1])
  double total = 0;              // integral of lambda over the polygon boundary
};

// Consistent boundary flux: solve  M_bd lambda = (S v + b) | boundary rows,
// with M_bd the 1D boundary mass matrix. total then matches integral(g) up
// to the interior solver residual.
FluxResult boundary_flux(const Mesh& m, const SolveResult& sol, const ScalarField& g);

struct GreenReport {
  double lhs = 0;
  double rhs = 0;
  double rel_err = 0;
};

// integral(g) vs the consistent flux total of the Dirichlet solution.
GreenReport green_check_dirichlet(const Mesh& m, const SolveResult& sol, const ScalarField& g);

// For harmonic g with the Neumann solution v:
//   integral(g^2) = - boundary integral(v dg/dn),
// evaluated with Simpson per edge (exact for the quadratic integrand).
GreenReport green_check_neumann(const Mesh& m, const SolveResult& sol, const QuadraticRhs& g);

struct ErrorNorms {
  double l2 = 0;
  double h1 = 0;  // seminorm
};

ErrorNorms error_norms(const Mesh& m, const std::vector<double>& v, const ScalarField& exact,
                       const VectorField& exact_grad);

// quadrature helpers over the mesh (degree-4 six point rule)
double integrate(const Mesh& m, const ScalarField& f);

// P1 gradient on one element
Vec2 element_gradient(const Mesh& m, std::size_t t, std::span<const double> v);

}  // namespace lacuna
