#pragma once

// Composite 16-point Gauss-Legendre and Simpson rules with a fixed
// evaluation order, plus dyadic snapping for quadrature nodes that must be
// exactly representable as tau / 2^D.

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace lacuna {

struct GL16Node {
  double x, w;
};

inline constexpr GL16Node gl16[16] = {
    {-0.98940093499164994, 0.027152459411754037},
    {-0.9445750230732326, 0.062253523938647706},
    {-0.86563120238783176, 0.095158511682492591},
    {-0.755404408355003, 0.12462897125553403},
    {-0.61787624440264377, 0.14959598881657676},
    {-0.45801677765722737, 0.16915651939500262},
    {-0.28160355077925892, 0.18260341504492361},
    {-0.095012509837637454, 0.18945061045506859},
    {0.095012509837637454, 0.18945061045506859},
    {0.28160355077925892, 0.18260341504492361},
    {0.45801677765722737, 0.16915651939500262},
    {0.61787624440264377, 0.14959598881657676},
    {0.755404408355003, 0.12462897125553403},
    {0.86563120238783176, 0.095158511682492591},
    {0.9445750230732326, 0.062253523938647706},
    {0.98940093499164994, 0.027152459411754037},
};

template <class F>
double integrate_gl16(F&& f, double a, double b, int panels) {
  if (panels < 1) throw std::invalid_argument("integrate_gl16: panels < 1");
  const double h = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    double part = 0.0;
    for (const auto& n : gl16) part += n.w * f(mid + half * n.x);
    total += part * half;
  }
  return total;
}

// nearest multiple of 2^-D; exact because the divisor is a power of two
inline double snap_dyadic(double t, int D) {
  const double s = std::ldexp(1.0, D);
  return static_cast<double>(std::llround(t * s)) / s;
}

inline std::uint64_t dyadic_numerator(double t, int D) {
  const double s = std::ldexp(1.0, D);
  const long long j = std::llround(t * s);
  if (j < 0) throw std::domain_error("dyadic_numerator: negative");
  return static_cast<std::uint64_t>(j);
}

// Simpson with n even subintervals; exact for cubics
template <class F>
double simpson(F&& f, double a, double b, int n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("simpson: n must be even and >= 2");
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace lacuna
