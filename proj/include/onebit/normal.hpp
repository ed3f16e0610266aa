#pragma once

namespace onebit {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoOverPi = 0.63661977236758134308;     // 2/pi
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;    // 1/sqrt(2 pi)
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;    // log(sqrt(2 pi))
inline constexpr double kInvSqrt2 = 0.70710678118654752440;      // 1/sqrt(2)

// Scalar building blocks for the standard normal model. All functions are
// pure; tails are handled in log space so long products of CDF factors stay
// representable far beyond the double underflow threshold.

/// Standard normal density. +-inf map to 0.
double std_normal_pdf(double x);

/// Standard normal CDF via erfc, accurate in both tails. +-inf map to 0/1.
double std_normal_cdf(double x);

/// log(Phi(x)). Direct for x >= -10; asymptotic expansion of the Mills
/// ratio below that, where Phi underflows long before the log does.
double log_std_normal_cdf(double x);

/// Inverse of std_normal_cdf on the open interval (0,1). Rational
/// approximation polished with one Newton step; a few ulp everywhere.
double normal_quantile(double p);

/// pdf(x)^2 / (cdf(x) * cdf(-x)). Even, strictly decreasing in |x|, with
/// maximum 2/pi at x = 0. Switches to log-space evaluation once the
/// denominator would underflow.
double probit_weight(double x);

/// Message sign convention: sign(0) = +1.
inline int sign(double x) { return x >= 0.0 ? 1 : -1; }

}  // namespace onebit
