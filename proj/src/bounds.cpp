#include "onebit/bounds.hpp"

#include "onebit/errors.hpp"
#include "onebit/normal.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace onebit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kLog2 = 0.69314718055994530942;

void check_n_sigma(std::int64_t n, double sigma, const char* who) {
  if (n < 1) throw std::invalid_argument(std::string(who) + ": n must be >= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument(std::string(who) + ": sigma must be finite and > 0");
  }
}

}  // namespace

double van_trees_bound(std::int64_t n, double sigma, double i0) {
  check_n_sigma(n, sigma, "van_trees_bound");
  if (!(i0 >= 0.0) || !std::isfinite(i0)) {
    throw std::invalid_argument("van_trees_bound: i0 must be finite and >= 0");
  }
  const double ps2 = kPi * sigma * sigma;
  return ps2 / (2.0 * static_cast<double>(n) + ps2 * i0);
}

double risk_asymptote(std::int64_t n, double sigma) {
  check_n_sigma(n, sigma, "risk_asymptote");
  return kPi * sigma * sigma / (2.0 * static_cast<double>(n));
}

namespace {

// Sum rate needed for distortion d, minus the budget n, written so that the
// n-fold log keeps full precision near the root: the rate's second term is
// (n/2) log2(d n / g) with g = d n - sigma^2 + d sigma^2 / sigma_theta^2,
// rearranged through log1p of the relative excess (d n - g) / g. g <= 0
// means the distortion is unreachable at any finite rate (+inf).
double sum_rate_gap_impl(double n, double sigma, double sigma_theta, double d) {
  const double s2 = sigma * sigma;
  const double st2 = sigma_theta * sigma_theta;
  const double g = d * n - s2 + d * s2 / st2;
  if (!(g > 0.0)) return kInf;
  const double excess = s2 * (1.0 - d / st2) / g;  // = (d n - g) / g
  double rate = 0.5 * std::log2(st2 / d) + 0.5 * n * std::log1p(excess) / kLog2;
  if (rate < 0.0) rate = 0.0;
  return rate - n;
}

}  // namespace

double ceo_sum_rate_gap(std::int64_t n, double sigma, double sigma_theta,
                        double d) {
  check_n_sigma(n, sigma, "ceo_sum_rate_gap");
  if (!(sigma_theta > 0.0) || !std::isfinite(sigma_theta)) {
    throw std::invalid_argument("ceo_sum_rate_gap: sigma_theta must be finite and > 0");
  }
  if (!(d > 0.0)) {
    throw std::invalid_argument("ceo_sum_rate_gap: d must be > 0");
  }
  return sum_rate_gap_impl(static_cast<double>(n), sigma, sigma_theta, d);
}

double ceo_lower_bound(std::int64_t n, double sigma, double sigma_theta) {
  check_n_sigma(n, sigma, "ceo_lower_bound");
  if (!(sigma_theta > 0.0) || !std::isfinite(sigma_theta)) {
    throw std::invalid_argument("ceo_lower_bound: sigma_theta must be finite and > 0");
  }
  const double nd = static_cast<double>(n);
  const double s2 = sigma * sigma;
  const double st2 = sigma_theta * sigma_theta;

  // The gap is +inf at the infeasibility edge g = 0 and -n at d = st2, and
  // is strictly decreasing in between, so bisection cannot miss. Run it all
  // the way down to adjacent doubles: the root is later audited to ~1e-9
  // bits of rate, which needs the distortion at full precision.
  double lo = s2 / (nd + s2 / st2);
  double hi = st2;
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double gap = sum_rate_gap_impl(nd, sigma, sigma_theta, mid);
    if (gap > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

double ceo_upper_bound(std::int64_t n, double sigma, double sigma_theta) {
  check_n_sigma(n, sigma, "ceo_upper_bound");
  if (!(sigma_theta > 0.0) || !std::isfinite(sigma_theta)) {
    throw std::invalid_argument("ceo_upper_bound: sigma_theta must be finite and > 0");
  }
  const double s2 = sigma * sigma;
  const double st2 = sigma_theta * sigma_theta;
  return 1.0 / (1.0 / st2 + 3.0 * static_cast<double>(n) / (4.0 * s2 + st2));
}

// ---------------------------------------------------------------------------
// Fisher information of one-bit messages

AlternatingWeight alternating_probit_weight(const std::vector<double>& xs) {
  if (xs.empty()) {
    throw std::invalid_argument("alternating_probit_weight: need at least one point");
  }
  for (std::size_t k = 0; k < xs.size(); ++k) {
    if (std::isnan(xs[k])) {
      throw std::invalid_argument("alternating_probit_weight: NaN input");
    }
    if (k > 0 && !(xs[k - 1] >= xs[k])) {
      throw std::invalid_argument(
          "alternating_probit_weight: points must be non-increasing");
    }
  }

  // Neumaier-compensated alternating sums; the terms can nearly cancel when
  // intervals are narrow, and the square in the numerator doubles the
  // damage of any sloppiness here.
  double sum_cdf = 0.0, comp_cdf = 0.0;
  double sum_pdf = 0.0, comp_pdf = 0.0;
  double sgn = 1.0;
  for (double x : xs) {
    const double c = sgn * std_normal_cdf(x);
    double t = sum_cdf + c;
    comp_cdf += std::abs(sum_cdf) >= std::abs(c) ? (sum_cdf - t) + c : (c - t) + sum_cdf;
    sum_cdf = t;

    const double f = sgn * std_normal_pdf(x);
    t = sum_pdf + f;
    comp_pdf += std::abs(sum_pdf) >= std::abs(f) ? (sum_pdf - t) + f : (f - t) + sum_pdf;
    sum_pdf = t;

    sgn = -sgn;
  }
  const double delta = sum_cdf + comp_cdf;
  const double num = sum_pdf + comp_pdf;

  if (!(delta > 0.0 && delta < 1.0)) {
    return {0.0, true};
  }
  return {num * num / (delta * (1.0 - delta)), false};
}

namespace {

// P(a < Z < b) for a standardized interval, routed through whichever tail of
// the CDF keeps full relative precision. The naive Phi(b) - Phi(a) loses the
// entire mass of an upper-tail interval once both CDFs round to 1, while the
// pdf terms in the score numerator stay representable much further out; the
// mismatch can inflate the information ratio by many orders of magnitude.
double z_interval_mass(double a, double b) {
  if (a == -kInf) return std_normal_cdf(b);  // covers b = +inf -> 1
  if (b == kInf) return std_normal_cdf(-a);
  if (a >= 0.0) return std::max(0.0, std_normal_cdf(-a) - std_normal_cdf(-b));
  if (b <= 0.0) return std::max(0.0, std_normal_cdf(b) - std_normal_cdf(a));
  return std::max(0.0, 1.0 - (std_normal_cdf(a) + std_normal_cdf(-b)));
}

}  // namespace

OneBitFisherInfo one_bit_fisher_info(double theta, double sigma,
                                     const std::vector<Interval>& intervals) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("one_bit_fisher_info: sigma must be finite and > 0");
  }
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("one_bit_fisher_info: theta must be finite");
  }
  if (intervals.empty()) {
    throw std::invalid_argument("one_bit_fisher_info: need at least one interval");
  }
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    if (std::isnan(intervals[k].lo) || std::isnan(intervals[k].hi)) {
      throw std::invalid_argument("one_bit_fisher_info: NaN endpoint");
    }
    if (!(intervals[k].lo < intervals[k].hi)) {
      throw std::invalid_argument("one_bit_fisher_info: interval needs lo < hi");
    }
    if (k > 0 && !(intervals[k - 1].hi <= intervals[k].lo)) {
      throw std::invalid_argument(
          "one_bit_fisher_info: intervals must be sorted and non-overlapping");
    }
  }

  // Accumulate P(X in union) and P(X in complement) as independent sums of
  // positive masses — disjointness means no cancellation can occur — and the
  // score numerator as a compensated sum of pdf differences.
  auto standardize = [&](double v) {
    return std::isinf(v) ? v : (v - theta) / sigma;
  };
  double delta = 0.0;      // P(X in union)
  double complement = 0.0; // P(X in complement)
  double num = 0.0, num_comp = 0.0;
  double prev_hi = -kInf;
  for (const Interval& iv : intervals) {
    const double a = standardize(iv.lo);
    const double b = standardize(iv.hi);
    delta += z_interval_mass(a, b);
    complement += z_interval_mass(prev_hi, a);
    prev_hi = b;
    for (const double term : {std_normal_pdf(b), -std_normal_pdf(a)}) {
      const double t = num + term;
      num_comp +=
          std::abs(num) >= std::abs(term) ? (num - t) + term : (term - t) + num;
      num = t;
    }
  }
  complement += z_interval_mass(prev_hi, kInf);
  const double score_sum = num + num_comp;

  if (!(delta > 0.0 && complement > 0.0)) {
    return {0.0, true};
  }
  return {score_sum * score_sum / (delta * complement * sigma * sigma), false};
}

// ---------------------------------------------------------------------------
// Bound curves

BoundReport make_bound_report(const std::vector<std::int64_t>& ns, double sigma,
                              std::optional<double> i0,
                              std::optional<double> sigma_theta) {
  if (ns.empty()) {
    throw std::invalid_argument("make_bound_report: need at least one n");
  }
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] < 1) throw std::invalid_argument("make_bound_report: n must be >= 1");
    if (k > 0 && !(ns[k - 1] < ns[k])) {
      throw std::invalid_argument("make_bound_report: n grid must be strictly increasing");
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(ns.size());
  BoundReport r;
  r.n = ns;
  r.van_trees = Eigen::ArrayXd::Constant(m, kNaN);
  r.ceo_lower = Eigen::ArrayXd::Constant(m, kNaN);
  r.ceo_upper = Eigen::ArrayXd::Constant(m, kNaN);
  r.asymptote = Eigen::ArrayXd::Constant(m, kNaN);
  for (Eigen::Index k = 0; k < m; ++k) {
    const std::int64_t n = ns[static_cast<std::size_t>(k)];
    r.asymptote[k] = risk_asymptote(n, sigma);
    if (i0) r.van_trees[k] = van_trees_bound(n, sigma, *i0);
    if (sigma_theta) {
      r.ceo_lower[k] = ceo_lower_bound(n, sigma, *sigma_theta);
      r.ceo_upper[k] = ceo_upper_bound(n, sigma, *sigma_theta);
    }
  }
  return r;
}

std::string bound_report_csv(const BoundReport& report) {
  std::string out = "n,van_trees,ceo_lower,ceo_upper,asymptote\n";
  char buf[160];
  for (std::size_t k = 0; k < report.n.size(); ++k) {
    const Eigen::Index j = static_cast<Eigen::Index>(k);
    std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(report.n[k]), report.van_trees[j],
                  report.ceo_lower[j], report.ceo_upper[j], report.asymptote[j]);
    out += buf;
  }
  return out;
}

void write_bound_csv(const BoundReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_bound_csv: cannot open " + path);
  out << bound_report_csv(report);
  if (!out) throw std::runtime_error("write_bound_csv: write failed for " + path);
}

}  // namespace onebit
