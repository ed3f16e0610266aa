#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace onebit {

/// Bayesian (van Trees style) lower bound on the MSE of any estimator fed
/// by n adaptive one-bit messages: pi sigma^2 / (2 n + pi sigma^2 i0),
/// where i0 is the prior's location Fisher information.
double van_trees_bound(std::int64_t n, double sigma, double i0);

/// Large-n reference curve pi sigma^2 / (2 n).
double risk_asymptote(std::int64_t n, double sigma);

/// Distortion reachable by ANY n-bit (non-adaptive, sum-rate n) code for a
/// Gaussian mean with Gaussian prior N(0, sigma_theta^2): the unique D with
/// sum_rate(D) = n. Solved to machine precision by bisection.
double ceo_lower_bound(std::int64_t n, double sigma, double sigma_theta);

/// Sum rate required for distortion D, minus n. Zero (to rounding) at
/// D = ceo_lower_bound(n, sigma, sigma_theta); exposed so callers can audit
/// the root. Rates below zero are clamped to zero before subtracting.
double ceo_sum_rate_gap(std::int64_t n, double sigma, double sigma_theta,
                        double d);

/// Distortion achieved by a concrete one-shot quantize-and-average code:
/// 1 / (1/sigma_theta^2 + 3 n / (4 sigma^2 + sigma_theta^2)).
double ceo_upper_bound(std::int64_t n, double sigma, double sigma_theta);

// ---------------------------------------------------------------------------
// Fisher information of one-bit messages

struct AlternatingWeight {
  double value = 0.0;
  bool degenerate = false;  // alternating CDF sum hit 0 or 1
};

/// For non-increasing x_1 >= ... >= x_K (ties and infinite endpoints
/// allowed; tied pairs cancel out of the sums):
/// (sum_k (-1)^{k+1} pdf(x_k))^2 / (Delta (1 - Delta)) with
/// Delta = sum_k (-1)^{k+1} cdf(x_k). Bounded by 2/pi; attained exactly
/// when the sums collapse to a single threshold at zero. Degenerate inputs
/// (Delta at 0 or 1) carry no information and report value 0.
AlternatingWeight alternating_probit_weight(const std::vector<double>& xs);

struct Interval {
  double lo, hi;  // lo < hi; +-inf allowed at the extremes
};

struct OneBitFisherInfo {
  double value = 0.0;
  bool degenerate = false;
};

/// Fisher information about theta carried by the single bit
/// 1{X in union of intervals}, X ~ N(theta, sigma^2). Intervals must be
/// sorted and non-overlapping as open sets (touching endpoints are fine;
/// they collapse in the sums). Bounded by 2 / (pi sigma^2). The union and
/// complement masses are each accumulated through the well-conditioned CDF
/// tail, so far-out unions degrade to degenerate rather than blowing up.
OneBitFisherInfo one_bit_fisher_info(double theta, double sigma,
                                     const std::vector<Interval>& intervals);

// ---------------------------------------------------------------------------
// Bound curves

struct BoundReport {
  std::vector<std::int64_t> n;
  Eigen::ArrayXd van_trees;  // NaN when no prior information was supplied
  Eigen::ArrayXd ceo_lower;  // NaN when sigma_theta was not supplied
  Eigen::ArrayXd ceo_upper;  // NaN when sigma_theta was not supplied
  Eigen::ArrayXd asymptote;
};

/// Evaluate all bound curves on a grid of message counts. i0 feeds the van
/// Trees curve; sigma_theta feeds the CEO curves. Either may be absent, in
/// which case the matching columns are NaN.
BoundReport make_bound_report(const std::vector<std::int64_t>& ns, double sigma,
                              std::optional<double> i0,
                              std::optional<double> sigma_theta);

/// CSV with header "n,van_trees,ceo_lower,ceo_upper,asymptote".
void write_bound_csv(const BoundReport& report, const std::string& path);
std::string bound_report_csv(const BoundReport& report);

}  // namespace onebit
