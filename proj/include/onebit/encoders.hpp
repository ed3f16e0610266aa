#pragma once

#include "onebit/grid_density.hpp"
#include "onebit/schedule.hpp"

#include <cstdint>

namespace onebit {

/// One-bit message, always +1 or -1.
using Message = int;

/// Which iterates enter the running average: PostUpdate averages
/// theta_1..theta_n (the iterate after each move), PreUpdate averages
/// theta_0..theta_{n-1}. Same limit, slightly different finite-n bias.
enum class Averaging { PostUpdate, PreUpdate };

// ---------------------------------------------------------------------------
// Sign-feedback scheme: theta_n = theta_{n-1} + gamma_n * sgn(x_n - theta_{n-1}),
// reported through the running average of the iterates.

struct SignSgdState {
  GammaSchedule schedule;
  Averaging averaging = Averaging::PostUpdate;
  std::int64_t burn_in = 0;  // averaged iterates dropped from the front
  double theta = 0.0;        // current iterate
  std::int64_t n = 0;        // samples consumed
  double theta_sum = 0.0;
  std::int64_t averaged = 0;  // iterates accumulated into theta_sum
};

SignSgdState sgd_init(double theta0, GammaSchedule schedule,
                      Averaging averaging = Averaging::PostUpdate,
                      std::int64_t burn_in = 0);

/// Consume one sample; returns the emitted message sgn(x - theta_{n-1}).
Message sgd_step(SignSgdState& state, double x);

/// Same, with the step size supplied by the caller. The caller must pass
/// exactly gamma_at(state.schedule, state.n + 1); this exists so a
/// simulation loop can use a precomputed table without changing a single
/// bit of the trajectory.
Message sgd_step(SignSgdState& state, double x, double gamma_n);

/// Running average estimate. Requires at least one averaged iterate.
double sgd_estimate(const SignSgdState& state);

// ---------------------------------------------------------------------------
// Greedy posterior-threshold scheme ("one-step Bayes"): maintain the exact
// posterior on a grid, send sgn(x - tau) against the current threshold, and
// keep tau at the fixed point tau = (m_minus(tau) + m_plus(tau)) / 2.

struct BayesState {
  GridDensity posterior;
  double tau = 0.0;       // threshold used for the NEXT message
  double estimate = 0.0;  // posterior mean
  std::int64_t n = 0;     // messages absorbed
};

/// Start from the prior: posterior = gridded prior, estimate = its mean,
/// tau = its threshold fixed point.
BayesState bayes_init(const PriorSpec& prior, Eigen::Index m,
                      double tail_mass = 1e-9);

/// The message this state would emit for sample x: sign(x - tau).
Message bayes_encode(const BayesState& state, double x);

/// Absorb one message: posterior update at the current tau, then new
/// estimate, then new tau, then n increments. Order matters and is fixed.
void bayes_update(BayesState& state, Message message, double sigma);

// ---------------------------------------------------------------------------
// Unconstrained baseline: running mean of the raw samples.

struct RunningMean {
  double sum = 0.0;
  std::int64_t n = 0;
};

inline void empirical_mean_step(RunningMean& state, double x) {
  state.sum += x;
  state.n += 1;
}

double empirical_mean(const RunningMean& state);

// ---------------------------------------------------------------------------
// Mean field of the sign nonlinearity, used as a diagnostic for the
// averaged-iterate variance: E[sgn(x + noise)] for centered Gaussian noise.

/// E[sgn(x + Z)], Z ~ N(0, sigma^2): equals 2 Phi(x/sigma) - 1.
double expected_sign(double x, double sigma);

/// d/dx E[sgn(x + Z)] at x = 0: equals 2 / (sigma sqrt(2 pi)).
double expected_sign_slope_at_zero(double sigma);

}  // namespace onebit
