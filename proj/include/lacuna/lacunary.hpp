#pragma once

// The lacunary boundary pair. With a_k = q^-k and b_k = 2^(q^k),
//
//   f(x) = sum_{k=1..M} a_k sin(b_k x)
//   F(x) = 1 + sum_{k=1..M} a_k (1 - cos(b_k x)) / b_k
//
// F is the radial profile of the perturbed disk, f its formal angular
// derivative density. The deviation F - 1 is kept cancellation-free via
// 1 - cos = 2 sin^2(half), since at large q it sits 20 orders of magnitude
// below 1. The admissibility constant gamma and the frequency-ratio
// conditions that the strict mode enforces live here too.

#include <cstdint>
#include <string>
#include <vector>

#include "lacuna/angle.hpp"

namespace lacuna {

// 2^20 * 3^2 * 5 * 7. The odd part matters: pure power-of-two grids satisfy
// 2^(q^k) = 0 mod den for k >= 2, which silently erases every term past the
// first. Divisible by 360, so degree-grid angles are exact.
inline constexpr std::uint64_t default_modulus = (1ull << 20) * 315;

struct LacunaryParams {
  std::uint64_t q = 7;
  int M = 2;
  std::uint64_t N = default_modulus;
};

// q >= 2, 0 <= M <= 4, N >= 8; throws std::invalid_argument
void validate_params(const LacunaryParams& p);

inline double coeff_a(const LacunaryParams& p, int k) {
  return 1.0 / static_cast<double>(checked_pow_u64(p.q, static_cast<unsigned>(k)));
}
// exponent of b_k = 2^(q^k)
inline std::uint64_t freq_exp(const LacunaryParams& p, int k) {
  return checked_pow_u64(p.q, static_cast<unsigned>(k));
}

// sup |F - 1| <= 2^(1-q) / (q-1)
inline double deviation_bound(std::uint64_t q) {
  return std::ldexp(1.0, 1 - static_cast<int>(q)) / static_cast<double>(q - 1);
}

// Evaluates the series on a fixed denominator grid. The per-k phase
// multipliers 2^(q^k) mod den are hoisted so dense sweeps cost one modular
// multiply per term per point.
class SeriesEvaluator {
 public:
  SeriesEvaluator(const LacunaryParams& p, std::uint64_t den);

  RationalAngle theta_k(int k, std::uint64_t j) const {
    return RationalAngle(mulmod_u64(mult_[static_cast<std::size_t>(k - 1)], j % den_, den_), den_);
  }

  double f(std::uint64_t j) const;
  double deviation(std::uint64_t j) const;  // F - 1, no cancellation
  double F(std::uint64_t j) const { return 1.0 + deviation(j); }

  std::uint64_t den() const { return den_; }
  const LacunaryParams& params() const { return params_; }

 private:
  LacunaryParams params_;
  std::uint64_t den_;
  std::vector<std::uint64_t> mult_;  // 2^(q^k) mod den
  std::vector<double> a_;            // q^-k
  std::vector<std::uint64_t> exp_;   // q^k
};

double eval_f(const LacunaryParams& p, RationalAngle x);
double eval_deviation(const LacunaryParams& p, RationalAngle x);
double eval_F(const LacunaryParams& p, RationalAngle x);

// sum_{k<=K} a_k b_k cos(b_k x); +/-inf once b_k exceeds double range
double eval_f_prime_truncated(const LacunaryParams& p, RationalAngle x, int K);
// same sum divided by a_K b_K; finite for any q since earlier terms underflow
double eval_f_prime_scaled(const LacunaryParams& p, RationalAngle x, int K);

struct GammaOptions {
  int quad_points = 64;   // Gauss-Legendre nodes per smooth piece, min 64
  int z_grid = 256;       // coarse minimization grid on [0, pi), min 256
  double rel_tol = 1e-6;  // doubling stability target
  int max_doublings = 16;
};

struct GammaResult {
  double gamma;    // min_z g(z) / 5
  double z_min;    // argmin
  double g_min;    // g(z_min)
  int doublings;   // rounds needed to stabilize
};

// gamma = (1/5) min_z int_1^2 |sin(z+t) - sin(z)| t^-2 dt.
// The integrand has one kink at t = pi - 2z when that lands in (1,2); the
// quadrature splits there. Doubles quadrature and grid until two successive
// values agree to rel_tol; throws std::runtime_error with both values if
// max_doublings rounds do not converge.
GammaResult compute_gamma(const GammaOptions& opts = {});

// g(z) at given quadrature resolution, exposed for tests
double gamma_g(double z, int panels_per_piece);

// smallest q >= 7 with 1/(q-1) <= gamma; throws std::domain_error for gamma <= 0
std::uint64_t choose_q(double gamma);

struct ConditionRow {
  std::string condition;
  int m;
  double lhs_log2;
  double rhs_log2;
  bool pass;
};

// Frequency-ratio and size conditions on the coefficient sequence, checked in
// log2 space so they stay meaningful at strict q:
//   ratio-below:  s_m = (sum_{k<m} a_k b_k) / (a_m b_m) <= gamma   for 2 <= m <= max(M, 8)
//   ratio-above:  1/(q-1) <= gamma                                  (closed form of the tail sum)
//   size(p,eps):  a_m^p b_m^(p eps) >= (eps ln 2)^p for all m       (reported at the worst m)
// with p in {1,2,4}, eps in {0.05,0.25,0.5}.
std::vector<ConditionRow> check_conditions(const LacunaryParams& p, double gamma);

// all rows pass and q >= 7
bool strict_ok(const LacunaryParams& p, const std::vector<ConditionRow>& rows);

}  // namespace lacuna
