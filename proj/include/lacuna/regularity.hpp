#pragma once

// Blow-up diagnostics. The solutions on the perturbed disk are perfectly
// ordinary H^1 functions; what fails is membership one fractional step up,
// and at finite mesh size that failure shows as growth of discrete
// fractional seminorms with the truncation order M while a smooth-disk
// control stays put. This module computes those seminorms, certifies the
// boundary trace relation a f = b on Dirichlet solutions, and runs the
// case-vs-control sweep that assembles the evidence.
//
// The boundary flux seminorm needs care: the flux grid angles j/n_theta are
// dyadic, and every frequency 2^(q^k) with k >= 2 is a multiple of any such
// denominator, so the k >= 2 content of the boundary weight is invisible
// there (and constant along any dyadically subsampled refinement of it).
// The seminorm therefore supersamples the arclength weight on the full
// modulus-N angle grid with a step coprime to the odd part of N, which
// cycles through all residues of the hidden phase.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lacuna/mesh.hpp"
#include "lacuna/poisson.hpp"
#include "lacuna/separation.hpp"

namespace lacuna {

// ---------------------------------------------------------------------------
// interior 2D Gagliardo seminorm of the piecewise-constant gradient

struct GradSeminormResult {
  double value = 0.0;     // (far_pow + near_pow)^(1/p)
  double far_pow = 0.0;   // non-touching pairs, p-th power units
  double near_pow = 0.0;  // edge-jump model for touching pairs
  std::size_t sampled = 0;  // triangles entering the far-field double sum
  std::size_t stride = 1;   // decimation stride (1 = every triangle)
};

// Estimates |grad v|_{s,p} at order s = 1/p + eps by a double sum over
// triangle barycenters, kernel |g_T - g_T'|^p area_T area_T' / d^(2+sp).
// Pairs sharing a vertex are excluded from the double sum (the kernel is
// ill-defined for touching piecewise constants) and replaced by an
// edge-jump term |J_e|^p |e| d_e^(1-sp) per interior edge, the half-space
// model of the same integral cut at the barycenter distance d_e. On large
// meshes the far-field sum is decimated to every K-th triangle with weights
// scaled by K; edge terms are always complete. v holds node values.
// Throws std::invalid_argument unless s = 1/p + eps lies in (0,1).
GradSeminormResult grad_seminorm_2d(const Mesh& m, std::span<const double> v,
                                    const SeminormSpec& spec);

inline bool grad_order_admissible(const SeminormSpec& spec) {
  const double s = 1.0 / spec.p + spec.eps;
  return s > 0.0 && s < 1.0;
}

// ---------------------------------------------------------------------------
// boundary flux seminorm

struct FluxSeminormResult {
  double value = 0.0;
  std::size_t samples = 0;        // supersample * n_theta
  std::uint64_t step_num = 0;     // angle step numerator on the modulus-N grid
  bool under_resolved = false;    // n_theta < 8 b_1, warning only
};

// 1D Gagliardo seminorm of theta -> lambda(theta) * sqrt(F^2 + f^2), the
// arclength-weighted flux density. lambda (size n_theta, nodal on the grid
// angles) is interpolated linearly; the weight is evaluated exactly on
// supersample points per edge placed with the coprime step described above,
// so truncation orders that alias away on the flux grid still separate.
FluxSeminormResult flux_seminorm(const Mesh& m, std::span<const double> lambda,
                                 const SeminormSpec& spec, int supersample = 16);

// ---------------------------------------------------------------------------
// trace relation certification

struct TraceCertification {
  double max_residual = 0.0;     // max_j |a_j f_j - b_j|
  double growth_constant = 0.0;  // max_residual * n, the reported C
  double a_seminorm = 0.0;       // 1D Gagliardo seminorm of the a samples
  double b_seminorm = 0.0;       // and of the b samples
  std::vector<double> residual;  // per sample
};

// Core entry on explicit boundary samples: the field (u1, u2) at the given
// angles is turned into the tangential coefficient pair (a, b); a f - b
// vanishes exactly when u is parallel to the outward normal.
TraceCertification certify_trace_samples(const LacunaryParams& p,
                                         std::span<const RationalAngle> theta,
                                         std::span<const double> u1, std::span<const double> u2,
                                         const SeminormSpec& spec = {});

// FEM wrapper: samples grad v of a Dirichlet solution at boundary edge
// midpoints (the gradient is constant on the boundary strip triangle).
// The tangential component of grad v vanishes up to discretization there,
// so the residual must decay under refinement. Throws std::invalid_argument
// on a Neumann solution: its gradient is boundary-tangential, which is the
// other relation.
TraceCertification certify_trace_relation(const Mesh& m, const SolveResult& sol,
                                          const SeminormSpec& spec = {});

// ---------------------------------------------------------------------------
// sweep

struct SweepCase {
  int M = 0;
  int n_theta = 0;
  int n_r = 0;
};

struct SweepPlan {
  LacunaryParams base;  // q and N; M is overridden per case
  std::vector<SweepCase> cases;
  std::vector<SeminormSpec> specs;  // flux-seminorm grid
  bool include_control = true;      // add an M=0 twin per distinct resolution
  int flux_supersample = 16;
};

// M in {1,2} x n_theta in {256,512,1024}, n_r = n_theta/8, specs
// {(1,.25),(2,.25),(2,.5),(4,.1)}, controls on
SweepPlan default_sweep_plan();

struct SweepRow {
  int M = 0;
  int n_theta = 0;
  int n_r = 0;
  bool control = false;
  std::string error;  // nonempty: the case failed, numeric fields are unset

  double area_polygon = 0.0;
  double area_smooth = 0.0;
  double dirichlet_residual = 0.0;
  double neumann_residual = 0.0;

  double flux_total = 0.0;          // Dirichlet, g = 1
  double green_dirichlet_rel = 0.0; // |flux_total - area_smooth| / area_smooth
  double conservation_rel = 0.0;    // |flux_total - area_polygon| / area_polygon
  double green_neumann_lhs = 0.0;
  double green_neumann_rhs = 0.0;
  double green_neumann_rel = 0.0;

  std::vector<double> flux_semi;  // aligned with plan.specs
  bool flux_under_resolved = false;
  std::vector<double> grad_semi;  // aligned with report.grad_specs

  double trace_max_residual = 0.0;
  double trace_growth_constant = 0.0;
  double trace_a_seminorm = 0.0;
  double trace_b_seminorm = 0.0;
};

struct BlowupInvariants {
  bool control_flat = false;          // control diagnostics stable across the
                                      // two finest meshes (10%, noise-floored)
  bool flux_growth_strict = false;    // headline flux seminorm strictly
                                      // increasing in M at each resolution
  bool nonvanishing_flux = false;     // flux_total >= 0.9 pi for every case
  bool green_dirichlet_5pct = false;  // green_dirichlet_rel <= 5% everywhere
  bool all_pass() const {
    return control_flat && flux_growth_strict && nonvanishing_flux && green_dirichlet_5pct;
  }
};

struct BlowupReport {
  SweepPlan plan;
  std::vector<SeminormSpec> grad_specs;  // admissible subset of plan.specs
  int headline_spec = 0;                 // index of (2, 0.25) in plan.specs
  std::vector<SweepRow> rows;            // sorted by (n_theta, M, n_r)
  // flux-seminorm growth vs the control at matched resolution, rows x specs;
  // denominators floored at 1e-15 so ratios stay finite
  std::vector<std::vector<double>> flux_growth;
  BlowupInvariants invariants;
};

// Executes every case (in parallel; the per-case kernels then run serially,
// which keeps each number bit-identical to a single-threaded run), computes
// growth ratios against the matched control, and evaluates the invariants.
// A failed case is reported in its row's error field and fails all
// invariants; errors building the plan itself still throw.
BlowupReport run_sweep(const SweepPlan& plan);

}  // namespace lacuna
