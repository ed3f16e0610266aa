#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace onebit {

// Density on a uniform grid over [lo, hi], stored in log space and
// normalized with the trapezoid rule at construction. Treated as immutable
// afterwards: updates produce new instances. Log space is what makes a few
// thousand consecutive one-bit likelihood factors survive; the linear-space
// copy is cached because every quadrature wants it. log_density() keeps the
// exact normalized log values however negative; density() flushes points more
// than ~690 nats below the peak to exact 0 (invisible to any double-precision
// quadrature, and it keeps concentrated posteriors subnormal-free).
class GridDensity {
 public:
  static constexpr Eigen::Index kMinSize = 64;

  GridDensity(double lo, double hi, Eigen::ArrayXd log_density);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double step() const { return step_; }
  Eigen::Index size() const { return log_p_.size(); }
  const Eigen::ArrayXd& grid() const { return t_; }
  const Eigen::ArrayXd& log_density() const { return log_p_; }
  const Eigen::ArrayXd& density() const { return p_; }

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 0.0;
  Eigen::ArrayXd t_;
  Eigen::ArrayXd log_p_;
  Eigen::ArrayXd p_;
};

struct TruncatedMeans {
  double m_minus = 0.0;  // mean of the part left of the cut
  double m_plus = 0.0;   // mean of the part right of the cut
};

/// Total trapezoid mass; ~1 up to rounding for any constructed density.
double trapezoid_mass(const GridDensity& d);

/// Mean under the density (trapezoid rule).
double conditional_mean(const GridDensity& d);

/// Means of the two pieces obtained by cutting at tau (lo < tau < hi).
/// The cell containing tau is split exactly, interpolating the density
/// linearly inside the cell. Throws DegenerateSplitError when either side
/// carries less than 1e-12 mass.
TruncatedMeans truncated_means(const GridDensity& d, double tau);

/// The unique cut point where tau = (m_minus(tau) + m_plus(tau)) / 2.
/// For log-concave densities the residual is strictly increasing in tau, so
/// plain bisection is reliable; tolerance is rel_tol * (hi - lo). Throws
/// BracketFailureError when no sign change exists on the grid.
double solve_threshold(const GridDensity& d, double rel_tol = 1e-9);

/// Multiply by the one-bit likelihood Phi(message * (t - tau) / sigma) and
/// renormalize. message must be +-1, sigma > 0. Throws GridExhaustionError
/// when no mass remains representable on the grid.
GridDensity posterior_update(const GridDensity& d, int message, double tau,
                             double sigma);

/// Second differences of log density <= tol everywhere (interior -inf or
/// NaN entries fail; -inf endpoints are fine, they encode a hard support
/// boundary).
bool is_log_concave(const GridDensity& d, double tol = 1e-8);

/// Inverse-CDF draw from the density: u in (0,1) -> point in [lo, hi].
/// Piecewise-linear density means a piecewise-quadratic CDF, inverted
/// exactly per cell.
double sample_from_density(const GridDensity& d, double u);

// ---------------------------------------------------------------------------
// Prior families

struct UniformPrior {
  double a = 0.0, b = 1.0;  // support [a, b], a < b
};

struct GaussianPrior {
  double mean = 0.0, stddev = 1.0;  // stddev > 0
};

// density cos^2(pi (t - center) / (2 half_width)) / half_width on
// [center - half_width, center + half_width]
struct CosineSquaredPrior {
  double center = 0.0, half_width = 1.0;  // half_width > 0
};

struct ExplicitPrior {
  GridDensity density;  // must be log-concave
};

struct PriorSpec {
  std::variant<UniformPrior, GaussianPrior, CosineSquaredPrior, ExplicitPrior>
      family;
};

/// Parse "uniform A B", "gaussian MEAN STD", "cosine2 CENTER HALF_WIDTH",
/// or "csv PATH" (a density file readable by read_density_csv).
PriorSpec parse_prior(const std::string& text);

std::string prior_to_string(const PriorSpec& prior);

double prior_mean(const PriorSpec& prior);

/// Location Fisher information of the prior. Closed forms: gaussian
/// 1/stddev^2, cosine-squared pi^2/half_width^2. Explicit densities are
/// integrated numerically and must vanish at their support endpoints.
/// nullopt when the information does not exist (uniform).
std::optional<double> prior_location_fisher(const PriorSpec& prior);

/// Materialize the prior on an m-point grid (m >= 64). Unbounded supports
/// are truncated to leave tail_mass outside (0 < tail_mass <= 1e-6);
/// bounded supports use their exact endpoints and ignore tail_mass.
/// Explicit densities are re-gridded by linear interpolation of the log
/// density when m differs. Non-log-concave explicit densities are rejected.
GridDensity grid_from_prior(const PriorSpec& prior, Eigen::Index m,
                            double tail_mass = 1e-9);

// ---------------------------------------------------------------------------
// Density CSV (columns: t,density)

void write_density_csv(const GridDensity& d, const std::string& path);
GridDensity read_density_csv(const std::string& path);

}  // namespace onebit
