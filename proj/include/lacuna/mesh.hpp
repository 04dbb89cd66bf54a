#pragma once

// Structured polar mesh of omega = {r < F(theta)}.
//
// Reference coordinates (rho, theta) map to (rho F(theta), theta), so spokes
// follow the perturbed boundary exactly and the outer ring lies on it. Radii
// are graded quadratically: ring widths shrink linearly outward and the last
// width is exactly half the average, concentrating elements where the
// boundary oscillates. Every element's signed area is checked; a tangled
// mesh (boundary oscillation outrunning the outer ring width) is rejected.

#include <array>
#include <cstdint>
#include <vector>

#include "lacuna/geometry.hpp"
#include "lacuna/lacunary.hpp"

namespace lacuna {

struct Mesh {
  LacunaryParams params;
  int n_theta = 0;
  int n_r = 0;
  std::vector<Vec2> xy;                   // node 0 is the center
  std::vector<RationalAngle> theta;       // per node; center carries 0/1
  std::vector<double> rho;                // per node reference radius
  std::vector<std::array<int, 3>> tri;    // CCW
  std::vector<int> boundary;              // outer ring node ids, angular order
  double min_angle_deg = 0;               // mesh quality, reported not enforced

  int node(int ring, int j) const { return 1 + (ring - 1) * n_theta + j; }
  std::size_t node_count() const { return xy.size(); }
  std::size_t tri_count() const { return tri.size(); }

  // boundary edge j runs from boundary[j] to boundary[(j+1) % n_theta]
  std::size_t boundary_edge_count() const { return boundary.size(); }
};

// graded reference radius, i = 1..n_r: rho_i = i (3 n_r - 2 - i) / (2 n_r (n_r - 1))
double graded_radius(int i, int n_r);

// Preconditions: n_theta >= 16 and a multiple of 8, n_r >= 4. Produces
// 1 + n_theta * n_r nodes and n_theta (2 n_r - 1) triangles. Throws
// std::runtime_error if any element is tangled.
Mesh mesh_polar(const LacunaryParams& p, int n_theta, int n_r);

inline int default_rings(int n_theta) { return n_theta / 8 < 4 ? 4 : n_theta / 8; }

double triangle_area(const Mesh& m, std::size_t t);
double mesh_area(const Mesh& m);  // sum of element areas

}  // namespace lacuna
