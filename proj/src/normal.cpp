#include "onebit/normal.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace onebit {

double std_normal_pdf(double x) {
  if (std::isinf(x)) return 0.0;
  return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double std_normal_cdf(double x) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return 0.5 * std::erfc(-x * kInvSqrt2);
}

// For x << 0 write Phi(x) = pdf(x)/(-x) * S(x) with the divergent-but-
// alternating series S(x) = 1 - 1/x^2 + 3/x^4 - 15/x^6 + ..., truncated
// once terms stop improving. At |x| >= 10 the truncation error is far
// below double rounding.
static double log_cdf_tail(double x) {
  const double inv_x2 = 1.0 / (x * x);
  double term = 1.0;
  double sum = 0.0;  // S - 1
  for (int k = 1; k <= 30; ++k) {
    term *= -static_cast<double>(2 * k - 1) * inv_x2;
    if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) {
      sum += term;
      break;
    }
    sum += term;
  }
  return -0.5 * x * x - std::log(-x) - kLogSqrt2Pi + std::log1p(sum);
}

double log_std_normal_cdf(double x) {
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(x)) {
    return x > 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  if (x >= 8.0) {
    // log(1 - Phi(-x)); the tail is below 1e-15 so the first-order term
    // is exact to double precision.
    return -std_normal_cdf(-x);
  }
  if (x >= -10.0) return std::log(std_normal_cdf(x));
  return log_cdf_tail(x);
}

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("normal_quantile: p must lie strictly in (0,1)");
  }

  // Rational approximation (relative error ~1e-9), then one Newton step
  // against the erfc-based CDF.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;

  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  double density = std_normal_pdf(x);
  if (density > 0.0) {
    x -= (std_normal_cdf(x) - p) / density;
  }
  return x;
}

double probit_weight(double x) {
  if (std::abs(x) <= 20.0) {
    double f = std_normal_pdf(x);
    return f * f / (std_normal_cdf(x) * std_normal_cdf(-x));
  }
  // Both CDF factors evaluated in log space; one of them is ~1 so only the
  // far tail matters, but keeping both is symmetric and just as cheap.
  double log_f2 = -x * x - 2.0 * kLogSqrt2Pi;
  return std::exp(log_f2 - log_std_normal_cdf(x) - log_std_normal_cdf(-x));
}

}  // namespace onebit
