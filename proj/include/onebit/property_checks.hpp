#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace onebit {

// Randomized audits of the analytic facts the bounds rest on. Each scan is
// deterministic given its seed and reports the worst value it saw, so a
// failure names a concrete counterexample. limit_scale < 1 tightens the
// asserted limits and exists to prove the checks can fail (fault injection
// for the checkers themselves).

struct ScanReport {
  std::string name;
  bool pass = false;
  double worst = 0.0;      // worst observed value (scan-specific meaning)
  double limit = 0.0;      // the bound it was compared against
  std::int64_t samples = 0;
  std::string detail;      // human-readable worst-case description
};

/// Random strictly-descending threshold vectors (lengths 1..6, occasional
/// infinite endpoints): the alternating probit weight never exceeds 2/pi,
/// and equals it at the single threshold 0.
ScanReport scan_alternating_weight_bound(std::uint64_t seed, std::int64_t samples,
                                         double limit_scale = 1.0);

/// Random interval unions, thetas and sigmas: the Fisher information of the
/// message 1{X in union} never exceeds 2 / (pi sigma^2), and attains it for
/// the half-line split at theta.
ScanReport scan_one_bit_fisher_bound(std::uint64_t seed, std::int64_t samples,
                                     double limit_scale = 1.0);

/// probit_weight is even, bounded by 2/pi, and decreasing in |x| on a fixed
/// grid plus random pairs.
ScanReport scan_probit_weight_shape(std::uint64_t seed, std::int64_t samples,
                                    double limit_scale = 1.0);

/// All four bound curves are non-increasing in n, ordered sensibly
/// (ceo_lower <= ceo_upper), and positive, across a log grid of n and a few
/// (sigma, sigma_theta) combinations.
ScanReport scan_bound_monotonicity(double limit_scale = 1.0);

std::vector<ScanReport> run_all_scans(std::uint64_t seed, std::int64_t samples,
                                      double limit_scale = 1.0);

}  // namespace onebit
