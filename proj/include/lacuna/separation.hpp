#pragma once

// Frequency-separation estimates.
//
// interval_integral measures how much the m-th term of the series moves f
// over a unit interval at scale 1/b_m, against the weight t^-(1+p*eps):
//
//   value = b_m^(p eps) * int_1^2 |f(x + t/b_m) - f(x)|^p t^-(1+p eps) dt
//
// The separation conditions guarantee value >= (gamma a_m b_m^eps)^p: the
// top frequency dominates everything below it and the tail above it cannot
// cancel it. Both sides are carried in log2 because b_m^(p eps) overflows
// double at strict q. gagliardo_1d is the matching discrete seminorm used on
// sampled data.

#include <cstdint>
#include <span>
#include <vector>

#include "lacuna/angle.hpp"
#include "lacuna/lacunary.hpp"

namespace lacuna {

struct SeminormSpec {
  double p = 2.0;
  double eps = 0.25;
};

// p >= 1 and 0 < eps < 1; eps >= 1 leaves the admissible range and is rejected
void validate_spec(const SeminormSpec& s);

struct QuadratureOptions {
  int panels = 512;     // 16-node Gauss-Legendre panels on [1,2]
  int dyadic_bits = 26; // nodes snapped to tau / 2^dyadic_bits
};

struct IntervalEstimate {
  int m = 0;
  SeminormSpec spec;
  double value_log2 = 0.0;
  double lower_log2 = 0.0;  // log2 (gamma a_m b_m^eps)^p
  bool pass = false;
};

// how the integral splits across the series: the m-th term alone, the block
// below it, the tail above it (log2 of the same weighted integral of each)
struct IntervalDecomposition {
  int m = 0;
  double top_log2 = 0.0;
  double below_log2 = 0.0;
  double above_log2 = 0.0;
};

// Preconditions: 1 <= m <= M (so M = 0 is an error), spec valid, gamma > 0.
IntervalEstimate interval_integral(RationalAngle x, int m, const SeminormSpec& spec,
                                   const LacunaryParams& params, double gamma,
                                   const QuadratureOptions& opts = {});

IntervalDecomposition interval_decomposition(RationalAngle x, int m, const SeminormSpec& spec,
                                             const LacunaryParams& params,
                                             const QuadratureOptions& opts = {});

struct LemmaSweep {
  std::vector<IntervalEstimate> rows;               // m = 1..M
  double sum_log2 = 0.0;                            // log-sum-exp of row values
  double floor_log2 = 0.0;                          // log2 M (gamma eps ln 2)^p
  bool pass = false;                                // every row passes and sum >= floor
  std::vector<IntervalDecomposition> failures;      // decomposition of each failing row
};

LemmaSweep lemma_lowerbound_sweep(RationalAngle x, const SeminormSpec& spec,
                                  const LacunaryParams& params, double gamma,
                                  const QuadratureOptions& opts = {});

// Discrete Gagliardo seminorm of periodic samples on [0, 2*pi):
//   value^p = sum over ordered pairs at distance >= grid step (trapezoid
//             weights) + a near-diagonal strip integrated analytically from
//             one-sided slopes.
// Requires n >= 16. The parallel and serial paths are bit-identical.
double gagliardo_1d(std::span<const double> u, const SeminormSpec& spec, bool parallel = true);
double gagliardo_1d_serial(std::span<const double> u, const SeminormSpec& spec);

// max_j |a_j f(theta_j) - b_j| over the uniform grid theta_j = 2*pi*j/n.
// Lengths must match.
double separation_residual(std::span<const double> a_samples, std::span<const double> b_samples,
                           const LacunaryParams& params);

}  // namespace lacuna
