#include "onebit/property_checks.hpp"

#include "onebit/bounds.hpp"
#include "onebit/normal.hpp"
#include "onebit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <vector>

namespace onebit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

}  // namespace

ScanReport scan_alternating_weight_bound(std::uint64_t seed, std::int64_t samples,
                                         double limit_scale) {
  SplitMix64 rng(seed);
  ScanReport report;
  report.name = "alternating-weight bound";
  report.samples = samples;
  report.limit = kTwoOverPi * limit_scale + 1e-9;

  double worst = 0.0;
  std::vector<double> worst_xs;
  std::int64_t degenerate = 0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const std::size_t len = 1 + static_cast<std::size_t>(rng.next() % 6);
    std::vector<double> xs(len);
    for (double& x : xs) x = 3.0 * normal_quantile(rng.next_double());
    std::sort(xs.begin(), xs.end(), std::greater<>());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    // Occasional infinite endpoints: a half-line on either side.
    if (rng.next() % 8 == 0) xs.front() = kInf;
    if (rng.next() % 8 == 0) xs.back() = -kInf;

    const AlternatingWeight w = alternating_probit_weight(xs);
    if (w.degenerate) {
      ++degenerate;
      continue;
    }
    if (w.value > worst) {
      worst = w.value;
      worst_xs = xs;
    }
  }
  report.worst = worst;
  report.pass = worst <= report.limit;
  report.detail = fmt("max %.12g over random threshold vectors (limit %.12g, ",
                      worst, report.limit) +
                  std::to_string(degenerate) + " degenerate)";
  return report;
}

ScanReport scan_one_bit_fisher_bound(std::uint64_t seed, std::int64_t samples,
                                     double limit_scale) {
  SplitMix64 rng(seed);
  ScanReport report;
  report.name = "interval-union fisher bound";
  report.samples = samples;
  report.limit = 1e-9;  // tolerated excess over limit_scale * 2/(pi sigma^2)

  const double sigmas[3] = {0.5, 1.0, 2.0};
  double worst_excess = -kInf;
  double worst_ratio = 0.0;
  for (std::int64_t i = 0; i < samples; ++i) {
    const double sigma = sigmas[rng.next() % 3];
    const double theta = -5.0 + 10.0 * rng.next_double();
    const std::size_t k = 1 + static_cast<std::size_t>(rng.next() % 4);
    std::vector<double> ends(2 * k);
    for (double& e : ends) e = 4.0 * normal_quantile(rng.next_double());
    std::sort(ends.begin(), ends.end());
    if (std::adjacent_find(ends.begin(), ends.end()) != ends.end()) {
      --i;
      continue;  // regenerate ties (measure zero)
    }
    if (rng.next() % 100 < 15) ends.front() = -kInf;
    if (rng.next() % 100 < 15) ends.back() = kInf;
    std::vector<Interval> intervals;
    for (std::size_t j = 0; j < k; ++j) {
      intervals.push_back({ends[2 * j], ends[2 * j + 1]});
    }
    const OneBitFisherInfo info = one_bit_fisher_info(theta, sigma, intervals);
    if (info.degenerate) continue;
    const double limit = kTwoOverPi / (sigma * sigma);
    worst_excess = std::max(worst_excess, info.value - limit * limit_scale);
    worst_ratio = std::max(worst_ratio, info.value / limit);
  }
  report.worst = worst_excess;
  report.pass = worst_excess <= report.limit;
  report.detail = fmt("worst excess %.6g over 2/(pi sigma^2); max ratio %.12g",
                      worst_excess, worst_ratio);
  return report;
}

ScanReport scan_probit_weight_shape(std::uint64_t seed, std::int64_t samples,
                                    double limit_scale) {
  SplitMix64 rng(seed);
  ScanReport report;
  report.name = "probit weight shape";
  report.samples = samples;
  report.limit = kTwoOverPi * limit_scale + 1e-12;

  double worst = 0.0;
  bool shape_ok = true;
  std::string violation;

  // Dense fixed grid: bound, evenness, monotone decay away from zero.
  double prev = kTwoOverPi + 1.0;
  for (double x = 0.0; x <= 12.0 + 1e-12; x += 0.01) {
    const double w = probit_weight(x);
    worst = std::max(worst, w);
    const double wneg = probit_weight(-x);
    if (std::abs(w - wneg) > 1e-13 * std::max(1.0, w)) {
      shape_ok = false;
      if (violation.empty()) violation = fmt("evenness broken at x=%.3f", x);
    }
    if (w > prev * (1.0 + 1e-13)) {
      shape_ok = false;
      if (violation.empty()) violation = fmt("not decreasing at x=%.3f", x);
    }
    prev = w;
  }
  // Random pairs for monotonicity in |x| across scales.
  for (std::int64_t i = 0; i < samples; ++i) {
    const double x1 = 25.0 * (rng.next_double() - 0.5);
    const double x2 = 25.0 * (rng.next_double() - 0.5);
    const double lo = std::min(std::abs(x1), std::abs(x2));
    const double hi = std::max(std::abs(x1), std::abs(x2));
    if (hi - lo < 1e-12) continue;
    const double wlo = probit_weight(lo);
    const double whi = probit_weight(hi);
    worst = std::max(worst, std::max(wlo, whi));
    if (whi > wlo * (1.0 + 1e-12)) {
      shape_ok = false;
      if (violation.empty()) {
        violation = fmt("w(%.4f)=%.6g exceeds w(%.4f)", hi, whi, lo);
      }
    }
  }
  report.worst = worst;
  report.pass = shape_ok && worst <= report.limit;
  report.detail = shape_ok
                      ? fmt("max %.12g at x=0 (limit %.12g)", worst, report.limit)
                      : violation;
  return report;
}

ScanReport scan_bound_monotonicity(double limit_scale) {
  ScanReport report;
  report.name = "bound monotonicity";
  report.limit = 0.0;
  bool ok = true;
  std::string violation;
  std::int64_t count = 0;

  const double sigmas[3] = {0.5, 1.0, 2.0};
  const double sigma_thetas[3] = {0.5, 1.0, 3.0};
  for (double sigma : sigmas) {
    for (double st : sigma_thetas) {
      double prev_vt = kInf, prev_lo = kInf, prev_up = kInf, prev_asym = kInf;
      for (std::int64_t n = 10; n <= 1000000; n *= 10) {
        ++count;
        const double i0 = 1.0 / (st * st);
        const double vt = van_trees_bound(n, sigma, i0);
        const double lo = ceo_lower_bound(n, sigma, st);
        const double up = ceo_upper_bound(n, sigma, st);
        const double asym = risk_asymptote(n, sigma);
        if (!(vt > 0.0 && lo > 0.0 && up > 0.0 && asym > 0.0)) {
          ok = false;
          if (violation.empty()) violation = fmt("nonpositive bound at n=%g", (double)n);
        }
        if (vt > prev_vt || lo > prev_lo || up > prev_up || asym > prev_asym) {
          ok = false;
          if (violation.empty()) {
            violation = fmt("bound increased at n=%g (sigma=%g, sigma_theta=%g)",
                            (double)n, sigma, st);
          }
        }
        // The converse ordering would mean the lower bound contradicts an
        // achievable code. limit_scale < 1 shrinks the allowed headroom so
        // this clause can be demonstrated to fire.
        if (lo > up * limit_scale * (1.0 + 1e-12)) {
          ok = false;
          if (violation.empty()) {
            violation = fmt("ceo_lower above %.3g * ceo_upper at n=%g (sigma=%g)",
                            limit_scale, (double)n, sigma);
          }
        }
        prev_vt = vt;
        prev_lo = lo;
        prev_up = up;
        prev_asym = asym;
      }
    }
  }
  report.samples = count;
  report.pass = ok;
  report.worst = ok ? 0.0 : 1.0;
  report.detail = ok ? "all curves non-increasing and ordered" : violation;
  return report;
}

std::vector<ScanReport> run_all_scans(std::uint64_t seed, std::int64_t samples,
                                      double limit_scale) {
  std::vector<ScanReport> reports;
  reports.push_back(scan_alternating_weight_bound(seed, samples, limit_scale));
  reports.push_back(scan_one_bit_fisher_bound(seed + 1, std::max<std::int64_t>(1, samples / 10),
                                              limit_scale));
  reports.push_back(scan_probit_weight_shape(seed + 2, std::max<std::int64_t>(1, samples / 10),
                                             limit_scale));
  reports.push_back(scan_bound_monotonicity(limit_scale));
  return reports;
}

}  // namespace onebit
