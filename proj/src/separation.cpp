#include "lacuna/separation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "lacuna/detsum.hpp"
#include "lacuna/logmag.hpp"
#include "lacuna/quadrature.hpp"

namespace lacuna {

void validate_spec(const SeminormSpec& s) {
  if (!(s.p >= 1.0) || !std::isfinite(s.p))
    throw std::invalid_argument("SeminormSpec: p must be >= 1");
  if (!(s.eps > 0.0) || !(s.eps < 1.0))
    throw std::invalid_argument("SeminormSpec: eps must lie in (0, 1)");
}

namespace {

void validate_quad(const QuadratureOptions& o) {
  if (o.panels < 1) throw std::invalid_argument("QuadratureOptions: panels < 1");
  if (o.dyadic_bits < 8 || o.dyadic_bits > 40)
    throw std::invalid_argument("QuadratureOptions: dyadic_bits out of [8, 40]");
}

// Per-term state for evaluating f(x + t/b_m) - f(x) at dyadic t.
struct TermPlan {
  double a;                           // q^-k
  double phi;                         // b_k x mod 2 pi, exact reduction
  int kind;                           // 0: k<m tiny shift, 1: k==m, 2: k>m small S, 3: k>m phase table
  std::uint64_t gap = 0;              // q^m - q^k   (kind 0)
  std::uint64_t S = 0;                // q^k - q^m   (kind 2)
  std::unique_ptr<Pow2Phase> phase;   // kind 3
};

struct IntegralParts {
  double full = 0.0;   // int |sum_k a_k d_k|^p w dt
  double top = 0.0;    // int |a_m d_m|^p w dt
  double below = 0.0;  // int |sum_{k<m}|^p w dt
  double above = 0.0;  // int |sum_{k>m}|^p w dt
};

// shift delta applied to phase phi: sin(phi + delta) - sin(phi), cancellation-free
inline double sin_shift(double phi, double delta) {
  return 2.0 * std::sin(0.5 * delta) * std::cos(phi + 0.5 * delta);
}

std::vector<TermPlan> build_plan(RationalAngle x, int m, const LacunaryParams& params,
                                 int dyadic_bits) {
  std::vector<TermPlan> plan;
  const std::uint64_t em = freq_exp(params, m);
  for (int k = 1; k <= params.M; ++k) {
    TermPlan tp;
    tp.a = coeff_a(params, k);
    const std::uint64_t ek = freq_exp(params, k);
    tp.phi = x.times_pow2(ek).radians();
    if (k < m) {
      tp.kind = 0;
      tp.gap = em - ek;
    } else if (k == m) {
      tp.kind = 1;
    } else {
      const std::uint64_t S = ek - em;
      if (S < static_cast<std::uint64_t>(dyadic_bits)) {
        // 2^S * t fits a double exactly; the phi + shift rounding costs
        // < 2^-27 * 2^S radians, negligible against the a_k scale
        tp.kind = 2;
        tp.S = S;
      } else {
        tp.kind = 3;
        tp.phase = std::make_unique<Pow2Phase>(S, static_cast<unsigned>(dyadic_bits));
      }
    }
    plan.push_back(std::move(tp));
  }
  return plan;
}

IntegralParts integral_parts(RationalAngle x, int m, const SeminormSpec& spec,
                             const LacunaryParams& params, const QuadratureOptions& opts) {
  validate_params(params);
  validate_spec(spec);
  validate_quad(opts);
  if (params.M == 0) throw std::domain_error("interval_integral: M = 0 has no top frequency");
  if (m < 1 || m > params.M) throw std::domain_error("interval_integral: m out of [1, M]");

  const auto plan = build_plan(x, m, params, opts.dyadic_bits);
  const double expo = 1.0 + spec.p * spec.eps;

  IntegralParts parts;
  const double h = 1.0 / opts.panels;
  for (int pnl = 0; pnl < opts.panels; ++pnl) {
    const double mid = 1.0 + (pnl + 0.5) * h;
    const double half = 0.5 * h;
    IntegralParts acc;
    for (const auto& node : gl16) {
      const double t = snap_dyadic(mid + half * node.x, opts.dyadic_bits);
      const std::uint64_t tau = dyadic_numerator(t, opts.dyadic_bits);
      double sum = 0.0, top = 0.0, below = 0.0, above = 0.0;
      for (const auto& tp : plan) {
        double d;
        switch (tp.kind) {
          case 0:
            // delta = t 2^-gap; underflow to 0 is exact (true value under
            // the smallest subnormal)
            d = (tp.gap > 1100) ? 0.0 : sin_shift(tp.phi, std::ldexp(t, -static_cast<int>(tp.gap)));
            break;
          case 1:
            d = sin_shift(tp.phi, t);
            break;
          case 2:
            d = sin_shift(tp.phi, std::ldexp(t, static_cast<int>(tp.S)));
            break;
          default: {
            const double psi = two_pi * tp.phase->frac_turns(tau);
            d = sin_shift(tp.phi, psi);
            break;
          }
        }
        const double term = tp.a * d;
        sum += term;
        if (tp.kind == 1) top += term;
        else if (tp.kind == 0) below += term;
        else above += term;
      }
      const double w = node.w * std::pow(t, -expo);
      acc.full += w * std::pow(std::abs(sum), spec.p);
      acc.top += w * std::pow(std::abs(top), spec.p);
      acc.below += w * std::pow(std::abs(below), spec.p);
      acc.above += w * std::pow(std::abs(above), spec.p);
    }
    parts.full += acc.full * half;
    parts.top += acc.top * half;
    parts.below += acc.below * half;
    parts.above += acc.above * half;
  }
  return parts;
}

double lower_bound_log2(int m, const SeminormSpec& spec, const LacunaryParams& params,
                        double gamma) {
  const double lgq = std::log2(static_cast<double>(params.q));
  const double em = static_cast<double>(freq_exp(params, m));
  return spec.p * (std::log2(gamma) + spec.eps * em - m * lgq);
}

}  // namespace

IntervalEstimate interval_integral(RationalAngle x, int m, const SeminormSpec& spec,
                                   const LacunaryParams& params, double gamma,
                                   const QuadratureOptions& opts) {
  if (!(gamma > 0.0)) throw std::domain_error("interval_integral: gamma must be positive");
  const auto parts = integral_parts(x, m, spec, params, opts);
  const double em = static_cast<double>(freq_exp(params, m));
  IntervalEstimate est;
  est.m = m;
  est.spec = spec;
  est.value_log2 = (parts.full > 0.0) ? std::log2(parts.full) + spec.p * spec.eps * em
                                      : -std::numeric_limits<double>::infinity();
  est.lower_log2 = lower_bound_log2(m, spec, params, gamma);
  est.pass = est.value_log2 >= est.lower_log2;
  return est;
}

IntervalDecomposition interval_decomposition(RationalAngle x, int m, const SeminormSpec& spec,
                                             const LacunaryParams& params,
                                             const QuadratureOptions& opts) {
  const auto parts = integral_parts(x, m, spec, params, opts);
  const double em = static_cast<double>(freq_exp(params, m));
  const double scale = spec.p * spec.eps * em;
  const auto lg = [scale](double v) {
    return v > 0.0 ? std::log2(v) + scale : -std::numeric_limits<double>::infinity();
  };
  return IntervalDecomposition{m, lg(parts.top), lg(parts.below), lg(parts.above)};
}

LemmaSweep lemma_lowerbound_sweep(RationalAngle x, const SeminormSpec& spec,
                                  const LacunaryParams& params, double gamma,
                                  const QuadratureOptions& opts) {
  validate_params(params);
  if (params.M < 1) throw std::domain_error("lemma_lowerbound_sweep: M must be >= 1");
  LemmaSweep sweep;
  LogMag sum;
  bool all_pass = true;
  for (int m = 1; m <= params.M; ++m) {
    auto est = interval_integral(x, m, spec, params, gamma, opts);
    if (!est.pass) {
      all_pass = false;
      sweep.failures.push_back(interval_decomposition(x, m, spec, params, opts));
    }
    if (std::isfinite(est.value_log2)) sum = sum + LogMag::from_log2(est.value_log2);
    sweep.rows.push_back(est);
  }
  sweep.sum_log2 = sum.log2_value();
  sweep.floor_log2 =
      std::log2(static_cast<double>(params.M)) + spec.p * std::log2(gamma * spec.eps * std::log(2.0));
  sweep.pass = all_pass && sweep.sum_log2 >= sweep.floor_log2;
  return sweep;
}

namespace {

double gagliardo_impl(std::span<const double> u, const SeminormSpec& spec, bool parallel) {
  validate_spec(spec);
  const std::size_t n = u.size();
  if (n < 16) throw std::invalid_argument("gagliardo_1d: need at least 16 samples");
  const double L = two_pi;
  const double step = L / static_cast<double>(n);
  const double p = spec.p;
  const double expo = 1.0 + p * spec.eps;

  // distance weights depend only on the circular offset; hoisting the pow
  // out of the pair loop leaves every product bit-identical
  std::vector<double> wtab(n);
  for (std::size_t o = 1; o < n; ++o) {
    wtab[o] = std::pow(step * static_cast<double>(std::min(o, n - o)), -expo);
  }
  // |x|^1 and |x|^2 are exact, so these shortcuts match pow bit for bit
  const int pcase = (p == 1.0) ? 1 : (p == 2.0 ? 2 : 0);

  const auto row = [&](std::size_t i) {
    double far = 0.0;
    for (std::size_t o = 1; o < n; ++o) {
      const std::size_t j = (i + o < n) ? i + o : i + o - n;
      const double du = std::abs(u[i] - u[j]);
      const double dup = (pcase == 2) ? du * du : (pcase == 1 ? du : std::pow(du, p));
      far += dup * wtab[o];
    }
    far *= step * step;  // trapezoid pair weight dx dy
    // near-diagonal strip |x-y| < step, integrated analytically from the
    // one-sided slope at i: int_0^step 2 s^(p-1-p eps) ds = 2 step^(p-p eps)/(p-p eps)
    const std::size_t nx = (i + 1 < n) ? i + 1 : 0;
    const double slope = (u[nx] - u[i]) / step;
    const double strip =
        step * std::pow(std::abs(slope), p) * 2.0 * std::pow(step, p - p * spec.eps) / (p - p * spec.eps);
    return far + strip;
  };

  const double total = parallel ? tiled_sum(n, row) : serial_sum(n, row);
  return std::pow(total, 1.0 / p);
}

}  // namespace

double gagliardo_1d(std::span<const double> u, const SeminormSpec& spec, bool parallel) {
  return gagliardo_impl(u, spec, parallel);
}

double gagliardo_1d_serial(std::span<const double> u, const SeminormSpec& spec) {
  return gagliardo_impl(u, spec, false);
}

double separation_residual(std::span<const double> a_samples, std::span<const double> b_samples,
                           const LacunaryParams& params) {
  if (a_samples.size() != b_samples.size())
    throw std::invalid_argument("separation_residual: sample lengths differ");
  if (a_samples.empty()) throw std::invalid_argument("separation_residual: empty samples");
  SeriesEvaluator ev(params, a_samples.size());
  return tiled_max(a_samples.size(), [&](std::size_t j) {
    return std::abs(a_samples[j] * ev.f(j) - b_samples[j]);
  });
}

}  // namespace lacuna
