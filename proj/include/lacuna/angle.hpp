#pragma once

// Exact angle arithmetic.
//
// All angular inputs live on a rational grid: an angle is 2*pi*num/den with
// 0 <= num < den. Multiplying by 2^E (the series frequencies are b_k = 2^(q^k))
// reduces exactly through modular exponentiation, so sin(b_k x) is computed
// from a reduced phase instead of a catastrophically rounded product.
//
// Pow2Phase handles the one place a power of two meets an angle that is not
// rational in turns: shifts 2^S * t with t dyadic in radians. It keeps
// frac(2^(S-D)/(2*pi)) at high precision (MPFR) so each sample costs only an
// integer multiply.

#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>

namespace lacuna {

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double two_pi = 6.28318530717958647692;

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t modpow_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
  if (m == 0) throw std::domain_error("modpow_u64: zero modulus");
  if (m == 1) return 0;
  std::uint64_t r = 1;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod_u64(r, base, m);
    base = mulmod_u64(base, base, m);
    exp >>= 1;
  }
  return r;
}

// q^k in uint64, throwing on wrap
inline std::uint64_t checked_pow_u64(std::uint64_t q, unsigned k) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < k; ++i) {
    if (q != 0 && r > UINT64_MAX / q) throw std::overflow_error("checked_pow_u64: overflow");
    r *= q;
  }
  return r;
}

struct RationalAngle {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  RationalAngle() = default;
  RationalAngle(std::uint64_t n, std::uint64_t d) {
    if (d == 0) throw std::invalid_argument("RationalAngle: zero denominator");
    den = d;
    num = n % d;
  }

  double turns() const { return static_cast<double>(num) / static_cast<double>(den); }
  double radians() const { return two_pi * turns(); }

  // the angle 2^e * x, reduced mod 2*pi exactly
  RationalAngle times_pow2(std::uint64_t e) const {
    return RationalAngle(mulmod_u64(modpow_u64(2, e, den), num, den), den);
  }

  // reflection 2*pi - x
  RationalAngle reflected() const { return RationalAngle(num == 0 ? 0 : den - num, den); }

  friend bool operator==(const RationalAngle& a, const RationalAngle& b) {
    return a.num == b.num && a.den == b.den;
  }
};

// nearest grid point j/N to an angle given in radians
inline RationalAngle snap_angle(double theta, std::uint64_t N) {
  if (N == 0) throw std::invalid_argument("snap_angle: zero modulus");
  double t = theta / two_pi;
  t -= std::floor(t);
  auto j = static_cast<std::uint64_t>(std::llround(t * static_cast<double>(N)));
  return RationalAngle(j % N, N);
}

inline double sin_ra(const RationalAngle& x) { return std::sin(x.radians()); }
inline double cos_ra(const RationalAngle& x) { return std::cos(x.radians()); }
// sin(x/2), used by the cancellation-free 1 - cos(x) = 2 sin^2(x/2)
inline double sin_half_ra(const RationalAngle& x) {
  return std::sin(pi * static_cast<double>(x.num) / static_cast<double>(x.den));
}

// frac(2^S * t / (2*pi)) for dyadic t = tau / 2^D in radians, S >= D.
// For integer tau, frac(A*tau) = frac(frac(A)*tau), so beta = frac(2^(S-D)/(2*pi))
// computed once at precision (S-D) + margin suffices for the whole quadrature.
class Pow2Phase {
 public:
  Pow2Phase(std::uint64_t S, unsigned D);
  ~Pow2Phase();
  Pow2Phase(const Pow2Phase&) = delete;
  Pow2Phase& operator=(const Pow2Phase&) = delete;

  // frac(2^S * (tau/2^D) / (2*pi)) in [0,1)
  double frac_turns(std::uint64_t tau) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace lacuna
