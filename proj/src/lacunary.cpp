#include "lacuna/lacunary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lacuna/logmag.hpp"
#include "lacuna/quadrature.hpp"

namespace lacuna {

void validate_params(const LacunaryParams& p) {
  if (p.q < 2) throw std::invalid_argument("LacunaryParams: q must be >= 2");
  if (p.M < 0 || p.M > 4) throw std::invalid_argument("LacunaryParams: M must be in [0, 4]");
  if (p.N < 8) throw std::invalid_argument("LacunaryParams: N must be >= 8");
}

SeriesEvaluator::SeriesEvaluator(const LacunaryParams& p, std::uint64_t den)
    : params_(p), den_(den) {
  validate_params(p);
  if (den == 0) throw std::invalid_argument("SeriesEvaluator: zero denominator");
  mult_.reserve(static_cast<std::size_t>(p.M));
  a_.reserve(static_cast<std::size_t>(p.M));
  exp_.reserve(static_cast<std::size_t>(p.M));
  for (int k = 1; k <= p.M; ++k) {
    const std::uint64_t e = freq_exp(p, k);
    exp_.push_back(e);
    mult_.push_back(modpow_u64(2, e, den));
    a_.push_back(coeff_a(p, k));
  }
}

double SeriesEvaluator::f(std::uint64_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mult_.size(); ++i) {
    const std::uint64_t r = mulmod_u64(mult_[i], j % den_, den_);
    s += a_[i] * std::sin(two_pi * static_cast<double>(r) / static_cast<double>(den_));
  }
  return s;
}

double SeriesEvaluator::deviation(std::uint64_t j) const {
  double s = 0.0;
  for (std::size_t i = 0; i < mult_.size(); ++i) {
    // terms below 2^-1100 underflow; the true contribution is smaller than
    // any representable double, so dropping them is exact in double
    if (exp_[i] > 1100) continue;
    const std::uint64_t r = mulmod_u64(mult_[i], j % den_, den_);
    const double sh = std::sin(pi * static_cast<double>(r) / static_cast<double>(den_));
    s += 2.0 * a_[i] * sh * sh * std::exp2(-static_cast<double>(exp_[i]));
  }
  return s;
}

double eval_f(const LacunaryParams& p, RationalAngle x) {
  return SeriesEvaluator(p, x.den).f(x.num);
}

double eval_deviation(const LacunaryParams& p, RationalAngle x) {
  return SeriesEvaluator(p, x.den).deviation(x.num);
}

double eval_F(const LacunaryParams& p, RationalAngle x) { return 1.0 + eval_deviation(p, x); }

double eval_f_prime_truncated(const LacunaryParams& p, RationalAngle x, int K) {
  validate_params(p);
  if (K < 0 || K > p.M) throw std::invalid_argument("eval_f_prime_truncated: K out of range");
  double s = 0.0;
  for (int k = 1; k <= K; ++k) {
    const std::uint64_t e = freq_exp(p, k);
    const double bk = (e <= 1023) ? std::ldexp(1.0, static_cast<int>(e))
                                  : std::numeric_limits<double>::infinity();
    s += bk * coeff_a(p, k) * cos_ra(x.times_pow2(e));
  }
  return s;
}

double eval_f_prime_scaled(const LacunaryParams& p, RationalAngle x, int K) {
  validate_params(p);
  if (K < 1 || K > p.M) throw std::invalid_argument("eval_f_prime_scaled: K out of range");
  const double eK = static_cast<double>(freq_exp(p, K));
  const double lgq = std::log2(static_cast<double>(p.q));
  double s = 0.0;
  for (int k = 1; k <= K; ++k) {
    const std::uint64_t e = freq_exp(p, k);
    // (a_k b_k) / (a_K b_K) = q^(K-k) * 2^(q^k - q^K); underflows to 0 for k < K
    const double scale = std::exp2(static_cast<double>(e) - eK + (K - k) * lgq);
    s += scale * cos_ra(x.times_pow2(e));
  }
  return s;
}

namespace {

// g(z) = int_1^2 |sin(z+t) - sin(z)| t^-2 dt, kink-split quadrature
double eval_g(double z, int panels_per_piece) {
  const auto integrand = [z](double t) {
    return std::abs(std::sin(z + t) - std::sin(z)) / (t * t);
  };
  // sin(z+t) = sin(z) at t = pi - 2z (+ 2 pi n); only n = 0 can land in (1,2)
  // for z in [0, pi)
  const double tstar = pi - 2.0 * z;
  if (tstar > 1.0 + 1e-12 && tstar < 2.0 - 1e-12) {
    return integrate_gl16(integrand, 1.0, tstar, panels_per_piece) +
           integrate_gl16(integrand, tstar, 2.0, panels_per_piece);
  }
  return integrate_gl16(integrand, 1.0, 2.0, panels_per_piece);
}

// golden-section minimization; g must be unimodal on [lo, hi]
double golden_min(double lo, double hi, int panels, double* argmin) {
  const double invphi = 0.61803398874989485;
  double a = lo, b = hi;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval_g(c, panels), fd = eval_g(d, panels);
  for (int it = 0; it < 200 && (b - a) > 1e-11; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval_g(c, panels);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval_g(d, panels);
    }
  }
  const double zm = 0.5 * (a + b);
  if (argmin) *argmin = zm;
  return eval_g(zm, panels);
}

double gamma_round(int panels, int zg, double* z_min, double* g_min) {
  // coarse scan over one period of g (g(z + pi) = g(z))
  double best = std::numeric_limits<double>::infinity();
  int best_j = 0;
  for (int j = 0; j < zg; ++j) {
    const double z = pi * j / zg;
    const double v = eval_g(z, panels);
    if (v < best) {
      best = v;
      best_j = j;
    }
  }
  const double h = pi / zg;
  const double lo = pi * best_j / zg - h;
  const double hi = pi * best_j / zg + h;
  const double gm = golden_min(lo, hi, panels, z_min);
  if (g_min) *g_min = gm;
  return gm / 5.0;
}

}  // namespace

double gamma_g(double z, int panels_per_piece) { return eval_g(z, panels_per_piece); }

GammaResult compute_gamma(const GammaOptions& opts) {
  const int panels0 = std::max(4, (std::max(opts.quad_points, 64) + 15) / 16);
  const int zg0 = std::max(opts.z_grid, 256);
  const double rel_tol = opts.rel_tol > 0 ? opts.rel_tol : 1e-6;

  double prev = 0.0;
  double z_min = 0.0, g_min = 0.0;
  for (int r = 0; r <= opts.max_doublings; ++r) {
    const double cur = gamma_round(panels0 << r, zg0 << std::min(r, 8), &z_min, &g_min);
    if (r > 0 && std::abs(cur - prev) <= rel_tol * std::abs(cur)) {
      return GammaResult{cur, z_min, g_min, r};
    }
    prev = cur;
  }
  std::ostringstream os;
  os << "compute_gamma: no convergence after " << opts.max_doublings
     << " doublings; last=" << prev << " at rel_tol=" << rel_tol;
  throw std::runtime_error(os.str());
}

std::uint64_t choose_q(double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("choose_q: gamma must be positive");
  // smallest q >= 7 with 1/(q-1) <= gamma
  const double raw = 1.0 + 1.0 / gamma;
  if (raw > 1e18) throw std::overflow_error("choose_q: gamma too small for a uint64 q");
  std::uint64_t q = std::max<std::uint64_t>(static_cast<std::uint64_t>(std::ceil(raw)), 2);
  while (q > 2 && 1.0 / static_cast<double>(q - 2) <= gamma) --q;  // guard fp edge in ceil
  while (1.0 / static_cast<double>(q - 1) > gamma) ++q;
  return std::max<std::uint64_t>(q, 7);
}

std::vector<ConditionRow> check_conditions(const LacunaryParams& p, double gamma) {
  validate_params(p);
  if (!(gamma > 0.0)) throw std::domain_error("check_conditions: gamma must be positive");
  const int mmax = std::max(p.M, 8);
  const double lgq = std::log2(static_cast<double>(p.q));
  const double lg_gamma = std::log2(gamma);
  std::vector<ConditionRow> rows;

  // log2(a_k b_k) = q^k - k log2 q; exponents as doubles so strict q survives
  const auto lg_akbk = [&](int k) {
    return std::pow(static_cast<double>(p.q), k) - k * lgq;
  };

  for (int m = 2; m <= mmax; ++m) {
    LogMag num;
    for (int k = 1; k < m; ++k) num = num + LogMag::from_log2(lg_akbk(k));
    const double lhs = num.log2_value() - lg_akbk(m);
    rows.push_back({"ratio-below", m, lhs, lg_gamma, lhs <= lg_gamma});
  }

  {
    const double lhs = -std::log2(static_cast<double>(p.q - 1));
    rows.push_back({"ratio-above", 0, lhs, lg_gamma, lhs <= lg_gamma});
  }

  const double ps[] = {1.0, 2.0, 4.0};
  const double epss[] = {0.05, 0.25, 0.5};
  for (double pw : ps) {
    for (double eps : epss) {
      // worst m of lhs - rhs, lhs = p(eps q^m - m log2 q), rhs = p log2(eps ln 2)
      const double rhs = pw * std::log2(eps * std::log(2.0));
      double worst_margin = std::numeric_limits<double>::infinity();
      int worst_m = 1;
      double worst_lhs = 0.0;
      for (int m = 1; m <= mmax; ++m) {
        const double lhs = pw * (eps * std::pow(static_cast<double>(p.q), m) - m * lgq);
        if (lhs - rhs < worst_margin) {
          worst_margin = lhs - rhs;
          worst_m = m;
          worst_lhs = lhs;
        }
      }
      std::ostringstream name;
      name << "size(p=" << pw << ",eps=" << eps << ")";
      rows.push_back({name.str(), worst_m, worst_lhs, rhs, worst_margin >= 0.0});
    }
  }
  return rows;
}

bool strict_ok(const LacunaryParams& p, const std::vector<ConditionRow>& rows) {
  if (p.q < 7) return false;
  return std::all_of(rows.begin(), rows.end(), [](const ConditionRow& r) { return r.pass; });
}

}  // namespace lacuna
