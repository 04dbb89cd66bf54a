#pragma once

// Nonnegative magnitudes tracked by their base-2 logarithm.
//
// Quantities like b_m^(p*eps) = 2^(p*eps*q^m) overflow double for the strict
// parameter range, so sums and ratios of them are carried in log2 space.
// Addition is log-sum-exp. Exact zero is a distinguished state rather than
// a -inf that could contaminate arithmetic.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace lacuna {

class LogMag {
 public:
  LogMag() = default;  // zero

  static LogMag from_log2(double lg) {
    LogMag m;
    m.lg_ = lg;
    m.zero_ = false;
    return m;
  }

  static LogMag from_value(double v) {
    if (std::isnan(v) || v < 0.0) throw std::domain_error("LogMag: value must be >= 0");
    if (v == 0.0) return LogMag();
    return from_log2(std::log2(v));
  }

  bool is_zero() const { return zero_; }

  double log2_value() const {
    return zero_ ? -std::numeric_limits<double>::infinity() : lg_;
  }

  // May overflow to inf or underflow to 0; callers wanting exactness stay in log space.
  double value() const { return zero_ ? 0.0 : std::exp2(lg_); }

  friend LogMag operator+(LogMag a, LogMag b) {
    if (a.zero_) return b;
    if (b.zero_) return a;
    double hi = a.lg_, lo = b.lg_;
    if (hi < lo) std::swap(hi, lo);
    return from_log2(hi + std::log2(1.0 + std::exp2(lo - hi)));
  }

  friend LogMag operator*(LogMag a, LogMag b) {
    if (a.zero_ || b.zero_) return LogMag();
    return from_log2(a.lg_ + b.lg_);
  }

  friend LogMag operator/(LogMag a, LogMag b) {
    if (b.zero_) throw std::domain_error("LogMag: division by zero");
    if (a.zero_) return LogMag();
    return from_log2(a.lg_ - b.lg_);
  }

  LogMag pow(double e) const {
    if (zero_) {
      if (e <= 0.0) throw std::domain_error("LogMag: 0 to a nonpositive power");
      return LogMag();
    }
    return from_log2(lg_ * e);
  }

  friend bool operator<(LogMag a, LogMag b) {
    if (a.zero_) return !b.zero_;
    if (b.zero_) return false;
    return a.lg_ < b.lg_;
  }
  friend bool operator>(LogMag a, LogMag b) { return b < a; }
  friend bool operator<=(LogMag a, LogMag b) { return !(b < a); }
  friend bool operator>=(LogMag a, LogMag b) { return !(a < b); }

 private:
  double lg_ = 0.0;
  bool zero_ = true;
};

}  // namespace lacuna
