#include "lacuna/mesh.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace lacuna {

double graded_radius(int i, int n_r) {
  return static_cast<double>(i) * static_cast<double>(3 * n_r - 2 - i) /
         (2.0 * static_cast<double>(n_r) * static_cast<double>(n_r - 1));
}

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

}  // namespace

Mesh mesh_polar(const LacunaryParams& p, int n_theta, int n_r) {
  validate_params(p);
  if (n_theta < 16 || n_theta % 8 != 0) {
    throw std::invalid_argument("mesh_polar: n_theta must be >= 16 and a multiple of 8");
  }
  if (n_r < 4) {
    throw std::invalid_argument("mesh_polar: n_r must be >= 4");
  }

  Mesh m;
  m.params = p;
  m.n_theta = n_theta;
  m.n_r = n_r;

  const std::size_t nn = 1 + static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(n_r);
  m.xy.resize(nn);
  m.theta.resize(nn, RationalAngle{0, 1});
  m.rho.resize(nn, 0.0);
  m.xy[0] = Vec2{0.0, 0.0};

  SeriesEvaluator ev(p, static_cast<std::uint64_t>(n_theta));
  for (int j = 0; j < n_theta; ++j) {
    const RationalAngle th{static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(n_theta)};
    const double F = ev.F(static_cast<std::uint64_t>(j));
    if (!(F > 0.0)) {
      throw std::runtime_error("mesh_polar: boundary radius not positive at a grid angle");
    }
    const double c = cos_ra(th);
    const double s = sin_ra(th);
    for (int i = 1; i <= n_r; ++i) {
      const int id = m.node(i, j);
      const double r = graded_radius(i, n_r) * F;
      m.xy[id] = Vec2{r * c, r * s};
      m.theta[id] = th;
      m.rho[id] = graded_radius(i, n_r);
    }
  }

  m.tri.reserve(static_cast<std::size_t>(n_theta) * static_cast<std::size_t>(2 * n_r - 1));
  for (int j = 0; j < n_theta; ++j) {
    const int jn = (j + 1) % n_theta;
    m.tri.push_back({0, m.node(1, j), m.node(1, jn)});
  }
  // quad (inner j, outer j, outer j+1, inner j+1) is the CCW order in the
  // plane; split along the inner-j to outer-j+1 diagonal
  for (int i = 1; i < n_r; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const int jn = (j + 1) % n_theta;
      const int a = m.node(i, j);
      const int b = m.node(i, jn);
      const int c = m.node(i + 1, jn);
      const int d = m.node(i + 1, j);
      m.tri.push_back({a, d, c});
      m.tri.push_back({a, c, b});
    }
  }

  m.boundary.reserve(n_theta);
  for (int j = 0; j < n_theta; ++j) m.boundary.push_back(m.node(n_r, j));

  double min_cos = -1.0;
  for (std::size_t t = 0; t < m.tri.size(); ++t) {
    const double area = signed_area(m.xy[m.tri[t][0]], m.xy[m.tri[t][1]], m.xy[m.tri[t][2]]);
    if (!(area > 0.0)) {
      std::ostringstream os;
      os << "mesh_polar: tangled element " << t << " (signed area " << area
         << "); boundary oscillation exceeds the outer ring width, increase n_theta or reduce n_r";
      throw std::runtime_error(os.str());
    }
    for (int v = 0; v < 3; ++v) {
      const Vec2& a = m.xy[m.tri[t][v]];
      const Vec2& b = m.xy[m.tri[t][(v + 1) % 3]];
      const Vec2& c = m.xy[m.tri[t][(v + 2) % 3]];
      const double ux = b.x - a.x, uy = b.y - a.y;
      const double vx = c.x - a.x, vy = c.y - a.y;
      const double cosang = (ux * vx + uy * vy) / (std::hypot(ux, uy) * std::hypot(vx, vy));
      min_cos = std::max(min_cos, cosang);  // largest cosine is the smallest angle
    }
  }
  m.min_angle_deg = std::acos(std::min(1.0, min_cos)) * 180.0 / pi;
  return m;
}

double triangle_area(const Mesh& m, std::size_t t) {
  return signed_area(m.xy[m.tri[t][0]], m.xy[m.tri[t][1]], m.xy[m.tri[t][2]]);
}

double mesh_area(const Mesh& m) {
  double s = 0.0;
  for (std::size_t t = 0; t < m.tri.size(); ++t) s += triangle_area(m, t);
  return s;
}

}  // namespace lacuna
