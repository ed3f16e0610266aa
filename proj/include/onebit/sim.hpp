#pragma once

#include "onebit/encoders.hpp"
#include "onebit/grid_density.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace onebit {

enum class Scheme { Bayes, EmpiricalMean, Sgd };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

// Everything a Monte Carlo run needs. Parsed from a plain-text config file
// ("key = value", '#' comments); every field has a CLI override or a
// default except the prior.
struct SimConfig {
  PriorSpec prior;
  double sigma = 1.0;
  std::int64_t n_max = 20000;
  std::int64_t trials = 500;
  double beta = 0.8;
  Eigen::Index grid_m = 4096;
  std::vector<Scheme> schemes = {Scheme::Sgd, Scheme::EmpiricalMean};
  std::uint64_t seed = 1;
  std::optional<double> theta0;  // sign-feedback start; default: prior mean
  std::int64_t bayes_n_cap = 10000;
  Averaging averaging = Averaging::PostUpdate;
  std::int64_t burn_in = 0;
  double tail_mass = 1e-9;

  // Empty -> log-spaced grid with checkpoints_per_decade points per decade
  // starting at n = 10. n_max is always included either way.
  std::vector<std::int64_t> checkpoints;
  int checkpoints_per_decade = 20;
};

/// Throws std::invalid_argument naming the offending key.
void validate_config(const SimConfig& config);

SimConfig parse_config_text(const std::string& text);
SimConfig parse_config_file(const std::string& path);

/// Log-spaced checkpoint grid: round(10^(k/per_decade)) for k >= per_decade,
/// deduplicated, capped below n_max, with n_max appended.
std::vector<std::int64_t> default_checkpoints(std::int64_t n_max, int per_decade = 20);

/// The checkpoints a run of this config records (resolves the log rule).
std::vector<std::int64_t> effective_checkpoints(const SimConfig& config);

/// Checkpoints at which a given scheme reports: the Bayes scheme stops
/// updating after bayes_n_cap messages, the others run to n_max.
std::vector<std::int64_t> scheme_checkpoints(const SimConfig& config, Scheme s);

// ---------------------------------------------------------------------------
// Trials

struct TrialResult {
  std::int64_t trial_index = 0;
  double theta = 0.0;
  // squared errors per enabled scheme (config order), aligned with
  // scheme_checkpoints(config, scheme)
  std::vector<std::vector<double>> sq_errors;
};

/// One fully deterministic trial: theta is the first draw from the trial's
/// stream, every sample x_n = theta + sigma * quantile(u_n) is shared by all
/// enabled schemes. Byte-for-byte independent of any other trial.
TrialResult run_trial(const SimConfig& config, std::int64_t trial_index);

// ---------------------------------------------------------------------------
// Aggregated risk

struct RiskPoint {
  std::int64_t n = 0;
  double mse = 0.0;
  double std_error = 0.0;  // standard error of the MSE estimate
  double n_mse = 0.0;      // n * mse
};

struct SchemeRisk {
  Scheme scheme = Scheme::Sgd;
  std::vector<RiskPoint> points;
};

struct RiskCurve {
  double sigma = 1.0;
  std::int64_t trials = 0;
  std::vector<SchemeRisk> schemes;
};

/// Run all trials on `workers` threads (0 = ONEBIT_WORKERS env var, else
/// hardware concurrency). Results are written into per-trial slots and
/// reduced in trial order, so the curve is bit-identical for any worker
/// count. A throwing trial aborts the run with its index in the message.
RiskCurve run_monte_carlo(const SimConfig& config, int workers = 0);

/// CSV with header "n,scheme,mse,stderr,n_mse"; rows sorted by
/// (scheme name, n); floats at full precision (17 significant digits).
std::string risk_curve_csv(const RiskCurve& curve);
void export_csv(const RiskCurve& curve, const std::string& path);

/// Worker-count resolution: explicit argument wins, then the
/// ONEBIT_WORKERS environment variable, then hardware concurrency.
int resolve_workers(int requested);

/// Draw from the prior by inverse CDF; u in (0,1). Exposed for tests.
double sample_prior(const PriorSpec& prior, double u);

}  // namespace onebit
