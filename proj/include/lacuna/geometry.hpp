#pragma once

// Geometry of the perturbed disk omega = {r < F(theta)} and the 3d bodies
// built over it. Since F' = f exactly (term by term), the boundary tangent,
// outward normal and arclength density all come in closed form:
//
//   ds/dtheta = sqrt(F^2 + f^2)
//   n ~ (F cos + f sin, F sin - f cos)
//
// The trace-relation helpers turn a boundary vector field into coefficient
// pairs (a, b) such that a f - b vanishes exactly when the field is normal
// (or tangential, for the other pair). That identity is what lets boundary
// regularity of a field be read off the regularity of f itself.

#include <cstdint>
#include <span>
#include <vector>

#include "lacuna/angle.hpp"
#include "lacuna/lacunary.hpp"

namespace lacuna {

struct Vec2 {
  double x = 0.0, y = 0.0;
};
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

class RadialBoundary {
 public:
  explicit RadialBoundary(const LacunaryParams& p) : params_(p) { validate_params(p); }

  double F(RationalAngle t) const { return eval_F(params_, t); }
  double f(RationalAngle t) const { return eval_f(params_, t); }
  double deviation(RationalAngle t) const { return eval_deviation(params_, t); }

  Vec2 point(RationalAngle t) const {
    const double r = F(t);
    return {r * cos_ra(t), r * sin_ra(t)};
  }

  Vec2 unit_normal(RationalAngle t) const;

  // |ds/dtheta| = sqrt(F^2 + f^2)
  double arclength_weight(RationalAngle t) const;

  const LacunaryParams& params() const { return params_; }

 private:
  LacunaryParams params_;
};

struct TraceCoefficients {
  std::vector<double> a, b;
};

// For the field (u1, u2) sampled at the given angles:
//   normal pair:      a = u2 cos - u1 sin,  b = F (u1 cos + u2 sin)
//     a f - b = 0  iff  u . n = 0;  u = unit normal gives a f - b = -sqrt(F^2+f^2)
//   tangential pair:  a = u1 cos + u2 sin,  b = -F (u2 cos - u1 sin)
//     a f - b = 0  iff  u is parallel to n;  u = unit tangent gives +sqrt(F^2+f^2)
TraceCoefficients trace_normal_pair(const RadialBoundary& bd, std::span<const RationalAngle> theta,
                                    std::span<const double> u1, std::span<const double> u2);
TraceCoefficients trace_tangential_pair(const RadialBoundary& bd,
                                        std::span<const RationalAngle> theta,
                                        std::span<const double> u1, std::span<const double> u2);

// residual max |a f - b| at the sample angles
double trace_residual(const RadialBoundary& bd, std::span<const RationalAngle> theta,
                      const TraceCoefficients& c);

// Cutoff profiles.
//
// mu: piecewise cubic, C^2. Equals 1 on [0,1], strictly decreases past 1,
// crosses zero at t = 3 with slope -1, and continues linearly (mu(4) = -1).
// Used as the squared-radius profile of the cylindrical body, so the body
// closes transversally where mu hits zero.
double cutoff_mu(double t);
double cutoff_mu_d1(double t);
double cutoff_mu_d2(double t);

// chi: C^3 smoothstep, 1 on [0,1/2], 0 from 1 on. The extra derivative keeps
// centered-difference Laplacians second order across the transition.
double cutoff_chi(double t);
double cutoff_chi_d1(double t);
double cutoff_chi_d2(double t);

// Laplacian of chi(|z|) for z in dim_z dimensions: chi'' + (dim_z-1)/rho chi'
double cutoff_chi_radial_laplacian(double rho, int dim_z);

enum class Containment { inside, boundary, outside };

// omega itself
class PlanarDomain {
 public:
  explicit PlanarDomain(const LacunaryParams& p, double band = 1e-9) : bd_(p), band_(band) {}
  Containment contains(Vec2 v) const;
  const RadialBoundary& boundary() const { return bd_; }

 private:
  RadialBoundary bd_;
  double band_;
};

// {(x, z) : |x|^2 < F(theta)^2 mu(z^2)}; on the axis, inside iff mu(z^2) > 0
class CylindricalDomain {
 public:
  explicit CylindricalDomain(const LacunaryParams& p, double band = 1e-9) : bd_(p), band_(band) {}
  Containment contains(Vec3 v) const;

 private:
  RadialBoundary bd_;
  double band_;
};

// {(x, z) : |z| < 1, |x| < sqrt(1 - z^2) F(theta)}; the slice at height z0
// is the planar domain scaled by sqrt(1 - z0^2)
class EllipsoidalDomain {
 public:
  explicit EllipsoidalDomain(const LacunaryParams& p, double band = 1e-9) : bd_(p), band_(band) {}
  Containment contains(Vec3 v) const;

 private:
  RadialBoundary bd_;
  double band_;
};

struct BoundarySample {
  RationalAngle theta;
  double x1 = 0.0, x2 = 0.0;
};

// n samples of the boundary curve at theta_j = 2 pi j / n
std::vector<BoundarySample> boundary_polyline(const LacunaryParams& p, std::uint64_t n);

struct AreaResult {
  double value = 0.0;
  bool resolved = false;    // final grid had at least 64 points per b_1 period
  std::uint64_t grid = 0;   // points in the final midpoint sum
};

// |omega| = (1/2) int F^2 dtheta by midpoint sums on grids with the odd part
// of N kept (power-of-two grids alias every term past the first), doubling
// until successive values agree to rel_tol
AreaResult area(const LacunaryParams& p, double rel_tol = 1e-10);

// closed form of the same area: pi (1 + 2 S1 + S1^2 + S2 / 2) with
// S1 = sum a_k / b_k, S2 = sum (a_k / b_k)^2
double area_closed_form(const LacunaryParams& p);

// disk solution of  lap v0 = x1 x2  with d v0 / d r = 0 on r = 1 and zero
// mean: v0 = (r^2/24 - 1/12) 2 x1 x2. Reference solution for the Neumann
// solver and for the cylinder extension identity below.
double disk_v0(double x, double y);
Vec2 disk_v0_gradient(double x, double y);
double disk_g0(double x, double y);

struct ExtensionCheck {
  double residual_coarse = 0.0;
  double residual_fine = 0.0;
  double order = 0.0;   // log2(coarse / fine), 2 for a clean second-order stencil
  double h = 0.0;
};

// Verifies the cylinder extension identity at d = 3: for v = v0(x) chi(|z|),
//   Lap v = g0 chi + v0 lap_z chi
// with v0 the explicit disk solution of Lap v0 = x1 x2, d_r v0(1) = 0. The
// check applies a 7-point finite-difference Laplacian at steps h and h/2 on
// sample points away from the cutoff knots and reports the residual decay.
ExtensionCheck extension_identity_check(double h = 0.02);

}  // namespace lacuna
