#include "onebit/encoders.hpp"

#include "onebit/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace onebit {

SignSgdState sgd_init(double theta0, GammaSchedule schedule,
                      Averaging averaging, std::int64_t burn_in) {
  if (!std::isfinite(theta0)) {
    throw std::invalid_argument("sgd_init: theta0 must be finite");
  }
  if (burn_in < 0) {
    throw std::invalid_argument("sgd_init: burn_in must be >= 0");
  }
  SignSgdState s{schedule, averaging, burn_in, theta0, 0, 0.0, 0};
  return s;
}

Message sgd_step(SignSgdState& state, double x, double gamma_n) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("sgd_step: sample must be finite");
  }
  const Message msg = sign(x - state.theta);
  if (state.averaging == Averaging::PreUpdate && state.n >= state.burn_in) {
    state.theta_sum += state.theta;
    state.averaged += 1;
  }
  state.theta += gamma_n * static_cast<double>(msg);
  state.n += 1;
  if (state.averaging == Averaging::PostUpdate && state.n > state.burn_in) {
    state.theta_sum += state.theta;
    state.averaged += 1;
  }
  return msg;
}

Message sgd_step(SignSgdState& state, double x) {
  return sgd_step(state, x, gamma_at(state.schedule, state.n + 1));
}

double sgd_estimate(const SignSgdState& state) {
  if (state.n < 1) {
    throw std::invalid_argument("sgd_estimate: no samples consumed yet");
  }
  if (state.averaged < 1) {
    throw std::invalid_argument("sgd_estimate: burn-in swallowed every iterate");
  }
  return state.theta_sum / static_cast<double>(state.averaged);
}

BayesState bayes_init(const PriorSpec& prior, Eigen::Index m, double tail_mass) {
  GridDensity posterior = grid_from_prior(prior, m, tail_mass);
  const double estimate = conditional_mean(posterior);
  const double tau = solve_threshold(posterior);
  return BayesState{std::move(posterior), tau, estimate, 0};
}

Message bayes_encode(const BayesState& state, double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("bayes_encode: sample must be finite");
  }
  return sign(x - state.tau);
}

void bayes_update(BayesState& state, Message message, double sigma) {
  state.posterior = posterior_update(state.posterior, message, state.tau, sigma);
  state.estimate = conditional_mean(state.posterior);
  state.tau = solve_threshold(state.posterior);
  state.n += 1;
}

double empirical_mean(const RunningMean& state) {
  if (state.n < 1) {
    throw std::invalid_argument("empirical_mean: no samples consumed yet");
  }
  return state.sum / static_cast<double>(state.n);
}

double expected_sign(double x, double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("expected_sign: sigma must be > 0");
  }
  return 2.0 * std_normal_cdf(x / sigma) - 1.0;
}

double expected_sign_slope_at_zero(double sigma) {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("expected_sign_slope_at_zero: sigma must be > 0");
  }
  return 2.0 * kInvSqrt2Pi / sigma;
}

}  // namespace onebit
