#include "lacuna/angle.hpp"

#include <mpfr.h>

#include <stdexcept>

namespace lacuna {

struct Pow2Phase::Impl {
  mpfr_t beta;          // frac(2^(S-D) / (2*pi)), ~192 bits
  mpfr_prec_t outprec;  // precision carried into per-sample products
};

Pow2Phase::Pow2Phase(std::uint64_t S, unsigned D) : impl_(new Impl) {
  if (S < D) throw std::invalid_argument("Pow2Phase: S < D");
  const std::uint64_t E = S - D;
  // beta needs ~ D + 53 significant bits after the frac; computing
  // frac(2^E / 2pi) loses up to E leading bits, so work at E + margin.
  const auto workprec = static_cast<mpfr_prec_t>(E + 192);
  impl_->outprec = 192;

  mpfr_t pi2, x;
  mpfr_init2(pi2, workprec);
  mpfr_init2(x, workprec);
  mpfr_const_pi(pi2, MPFR_RNDN);
  mpfr_mul_ui(pi2, pi2, 2, MPFR_RNDN);
  mpfr_set_ui_2exp(x, 1, static_cast<mpfr_exp_t>(E), MPFR_RNDN);  // 2^E exactly
  mpfr_div(x, x, pi2, MPFR_RNDN);
  mpfr_frac(x, x, MPFR_RNDN);
  mpfr_init2(impl_->beta, impl_->outprec);
  mpfr_set(impl_->beta, x, MPFR_RNDN);
  mpfr_clear(x);
  mpfr_clear(pi2);
}

Pow2Phase::~Pow2Phase() {
  if (impl_) mpfr_clear(impl_->beta);
}

double Pow2Phase::frac_turns(std::uint64_t tau) const {
  mpfr_t y;
  mpfr_init2(y, impl_->outprec);
  mpfr_mul_ui(y, impl_->beta, static_cast<unsigned long>(tau), MPFR_RNDN);
  mpfr_frac(y, y, MPFR_RNDN);
  double r = mpfr_get_d(y, MPFR_RNDN);
  mpfr_clear(y);
  if (r < 0.0) r += 1.0;
  if (r >= 1.0) r -= 1.0;
  return r;
}

}  // namespace lacuna
