#include "lacuna/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lacuna/detsum.hpp"

namespace lacuna {

Vec2 RadialBoundary::unit_normal(RationalAngle t) const {
  const double Fv = F(t), fv = f(t);
  const double c = cos_ra(t), s = sin_ra(t);
  const double w = std::sqrt(Fv * Fv + fv * fv);
  return {(Fv * c + fv * s) / w, (Fv * s - fv * c) / w};
}

double RadialBoundary::arclength_weight(RationalAngle t) const {
  const double Fv = F(t), fv = f(t);
  return std::sqrt(Fv * Fv + fv * fv);
}

namespace {

void check_lengths(std::span<const RationalAngle> theta, std::span<const double> u1,
                   std::span<const double> u2) {
  if (theta.size() != u1.size() || theta.size() != u2.size())
    throw std::invalid_argument("trace pair: sample lengths differ");
}

}  // namespace

TraceCoefficients trace_normal_pair(const RadialBoundary& bd, std::span<const RationalAngle> theta,
                                    std::span<const double> u1, std::span<const double> u2) {
  check_lengths(theta, u1, u2);
  TraceCoefficients out;
  out.a.resize(theta.size());
  out.b.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double c = cos_ra(theta[i]), s = sin_ra(theta[i]);
    out.a[i] = u2[i] * c - u1[i] * s;
    out.b[i] = bd.F(theta[i]) * (u1[i] * c + u2[i] * s);
  }
  return out;
}

TraceCoefficients trace_tangential_pair(const RadialBoundary& bd,
                                        std::span<const RationalAngle> theta,
                                        std::span<const double> u1, std::span<const double> u2) {
  check_lengths(theta, u1, u2);
  TraceCoefficients out;
  out.a.resize(theta.size());
  out.b.resize(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double c = cos_ra(theta[i]), s = sin_ra(theta[i]);
    out.a[i] = u1[i] * c + u2[i] * s;
    out.b[i] = -bd.F(theta[i]) * (u2[i] * c - u1[i] * s);
  }
  return out;
}

double trace_residual(const RadialBoundary& bd, std::span<const RationalAngle> theta,
                      const TraceCoefficients& c) {
  if (theta.size() != c.a.size() || theta.size() != c.b.size())
    throw std::invalid_argument("trace_residual: sample lengths differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    worst = std::max(worst, std::abs(c.a[i] * bd.f(theta[i]) - c.b[i]));
  return worst;
}

double cutoff_mu(double t) {
  if (t <= 1.0) return 1.0;
  if (t <= 2.0) {
    const double s = t - 1.0;
    return 1.0 - s * s * s / 6.0;
  }
  if (t <= 3.0) {
    const double s = t - 2.0;
    return 5.0 / 6.0 - 0.5 * s - 0.5 * s * s + s * s * s / 6.0;
  }
  return -(t - 3.0);
}

double cutoff_mu_d1(double t) {
  if (t <= 1.0) return 0.0;
  if (t <= 2.0) {
    const double s = t - 1.0;
    return -0.5 * s * s;
  }
  if (t <= 3.0) {
    const double s = t - 2.0;
    return -0.5 - s + 0.5 * s * s;
  }
  return -1.0;
}

double cutoff_mu_d2(double t) {
  if (t <= 1.0) return 0.0;
  if (t <= 2.0) return -(t - 1.0);
  if (t <= 3.0) return -1.0 + (t - 2.0);
  return 0.0;
}

namespace {
// C^3 smoothstep on [0,1]: 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7; the
// derivatives factor neatly, which also shows the endpoint flatness
inline double s3(double s) { return s * s * s * s * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s))); }
inline double s3_d1(double s) {
  const double u = 1.0 - s;
  return 140.0 * s * s * s * u * u * u;
}
inline double s3_d2(double s) {
  const double u = 1.0 - s;
  return 420.0 * s * s * u * u * (1.0 - 2.0 * s);
}
}  // namespace

double cutoff_chi(double t) {
  if (t < 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  return 1.0 - s3(2.0 * t - 1.0);
}

double cutoff_chi_d1(double t) {
  if (t < 0.5 || t >= 1.0) return 0.0;
  return -2.0 * s3_d1(2.0 * t - 1.0);
}

double cutoff_chi_d2(double t) {
  if (t < 0.5 || t >= 1.0) return 0.0;
  return -4.0 * s3_d2(2.0 * t - 1.0);
}

double cutoff_chi_radial_laplacian(double rho, int dim_z) {
  if (dim_z < 1) throw std::invalid_argument("cutoff_chi_radial_laplacian: dim_z < 1");
  if (rho < 0.5) return 0.0;  // plateau: all derivatives vanish, no 0/0 at the axis
  return cutoff_chi_d2(rho) + (dim_z - 1) / rho * cutoff_chi_d1(rho);
}

namespace {
// |F'| = |f| <= sum q^-k < 1/(q-1): how far F can move across one snap step
inline double snap_slack(const LacunaryParams& p) {
  return pi / static_cast<double>(p.N) / static_cast<double>(p.q - 1);
}
}  // namespace

Containment PlanarDomain::contains(Vec2 v) const {
  const double r = std::hypot(v.x, v.y);
  const RationalAngle t = snap_angle(std::atan2(v.y, v.x), bd_.params().N);
  const double d = r - bd_.F(t);
  // the band absorbs the angle quantization: snapping moves F by |f| pi / N
  if (std::abs(d) <= band_ + snap_slack(bd_.params())) return Containment::boundary;
  return d < 0.0 ? Containment::inside : Containment::outside;
}

Containment CylindricalDomain::contains(Vec3 v) const {
  const double r2 = v.x * v.x + v.y * v.y;
  const RationalAngle t = snap_angle(std::atan2(v.y, v.x), bd_.params().N);
  const double Fv = bd_.F(t);
  const double rhs = Fv * Fv * cutoff_mu(v.z * v.z);
  const double d = r2 - rhs;
  if (std::abs(d) <= band_ + 4.0 * snap_slack(bd_.params())) return Containment::boundary;
  return d < 0.0 ? Containment::inside : Containment::outside;
}

Containment EllipsoidalDomain::contains(Vec3 v) const {
  const double r = std::hypot(v.x, v.y);
  if (v.z * v.z > 1.0) {
    // past the poles; only the poles themselves are boundary
    const double dz = std::abs(v.z) - 1.0;
    return (r * r + dz * dz <= band_ * band_) ? Containment::boundary : Containment::outside;
  }
  const RationalAngle t = snap_angle(std::atan2(v.y, v.x), bd_.params().N);
  const double d = r - std::sqrt(1.0 - v.z * v.z) * bd_.F(t);
  if (std::abs(d) <= band_ + snap_slack(bd_.params())) return Containment::boundary;
  return d < 0.0 ? Containment::inside : Containment::outside;
}

std::vector<BoundarySample> boundary_polyline(const LacunaryParams& p, std::uint64_t n) {
  validate_params(p);
  if (n < 3) throw std::invalid_argument("boundary_polyline: need at least 3 samples");
  RadialBoundary bd(p);
  std::vector<BoundarySample> out;
  out.reserve(n);
  for (std::uint64_t j = 0; j < n; ++j) {
    const RationalAngle t(j, n);
    const Vec2 pt = bd.point(t);
    out.push_back({t, pt.x, pt.y});
  }
  return out;
}

AreaResult area(const LacunaryParams& p, double rel_tol) {
  validate_params(p);
  if (!(rel_tol > 0.0)) throw std::invalid_argument("area: rel_tol must be positive");

  // keep the odd part of N in the grid so no series term aliases to zero
  std::uint64_t odd = p.N;
  while (odd % 2 == 0) odd /= 2;
  std::uint64_t grid = odd;
  while (grid < 1024) grid *= 2;

  // resolution target: 64 points per period of b_1 (unreachable past q ~ 25)
  const bool b1_reachable = p.q <= 25;
  const std::uint64_t resolved_at =
      b1_reachable ? (std::uint64_t{64} << static_cast<unsigned>(p.q)) : UINT64_MAX;
  const std::uint64_t cap = std::uint64_t{1} << 26;

  const auto midpoint_area = [&](std::uint64_t g) {
    SeriesEvaluator ev(p, 2 * g);
    const double h = two_pi / static_cast<double>(g);
    return 0.5 * h * tiled_sum(g, [&](std::size_t j) {
             const double Fv = ev.F(2 * static_cast<std::uint64_t>(j) + 1);
             return Fv * Fv;
           });
  };

  double prev = midpoint_area(grid);
  while (grid * 2 <= cap) {
    grid *= 2;
    const double cur = midpoint_area(grid);
    const bool stable = std::abs(cur - prev) <= rel_tol * std::abs(cur);
    prev = cur;
    // stop once stable, but keep refining toward the resolution target while
    // it is reachable within the cap
    if (stable && (grid >= resolved_at || resolved_at > cap)) break;
  }
  return AreaResult{prev, grid >= resolved_at, grid};
}

double area_closed_form(const LacunaryParams& p) {
  validate_params(p);
  double s1 = 0.0, s2 = 0.0;
  for (int k = 1; k <= p.M; ++k) {
    const std::uint64_t e = freq_exp(p, k);
    if (e > 1100) continue;  // below double underflow, exact zero
    const double ratio = coeff_a(p, k) * std::exp2(-static_cast<double>(e));
    s1 += ratio;
    s2 += ratio * ratio;
  }
  return pi * (1.0 + 2.0 * s1 + s1 * s1 + 0.5 * s2);
}

// disk solution of Lap v0 = x1 x2 with d_r v0 = 0 on r = 1 and zero mean
double disk_v0(double x, double y) {
  const double r2 = x * x + y * y;
  // (r^4/24 - r^2/12) sin(2 theta), and r^2 sin(2 theta) = 2 x y
  return (r2 / 24.0 - 1.0 / 12.0) * 2.0 * x * y;
}

Vec2 disk_v0_gradient(double x, double y) {
  const double r2 = x * x + y * y;
  // d/dx [(r^2/24 - 1/12) 2xy] with d(r^2)/dx = 2x
  return Vec2{x * x * y / 6.0 + (r2 / 12.0 - 1.0 / 6.0) * y,
              x * y * y / 6.0 + (r2 / 12.0 - 1.0 / 6.0) * x};
}

double disk_g0(double x, double y) { return x * y; }

namespace {

double extension_v(double x, double y, double z) { return disk_v0(x, y) * cutoff_chi(std::abs(z)); }

double extension_g(double x, double y, double z) {
  return disk_g0(x, y) * cutoff_chi(std::abs(z)) +
         disk_v0(x, y) * cutoff_chi_radial_laplacian(std::abs(z), 1);
}

double fd_laplacian_residual(double x, double y, double z, double h) {
  const double lap =
      (extension_v(x + h, y, z) + extension_v(x - h, y, z) + extension_v(x, y + h, z) +
       extension_v(x, y - h, z) + extension_v(x, y, z + h) + extension_v(x, y, z - h) -
       6.0 * extension_v(x, y, z)) /
      (h * h);
  return std::abs(lap - extension_g(x, y, z));
}

}  // namespace

ExtensionCheck extension_identity_check(double h) {
  if (!(h > 0.0) || h > 0.05) throw std::invalid_argument("extension_identity_check: h out of (0, 0.05]");
  // sample points: interior radii, generic angles, z in the plateau and in
  // the transition band, all at least 2h clear of the chi knots at 1/2 and 1
  const double radii[] = {0.15, 0.4, 0.65};
  const double angles[] = {0.3, 1.1, 2.0, 3.7, 5.1};
  const double zs[] = {0.0, 0.2, 0.62, 0.73, 0.86};
  ExtensionCheck out;
  out.h = h;
  for (double r : radii)
    for (double a : angles)
      for (double z : zs) {
        const double x = r * std::cos(a), y = r * std::sin(a);
        out.residual_coarse = std::max(out.residual_coarse, fd_laplacian_residual(x, y, z, h));
        out.residual_fine = std::max(out.residual_fine, fd_laplacian_residual(x, y, z, 0.5 * h));
      }
  out.order = std::log2(out.residual_coarse / out.residual_fine);
  return out;
}

}  // namespace lacuna
