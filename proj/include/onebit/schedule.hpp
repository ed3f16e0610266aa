#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace onebit {

// Power-law step sizes gamma_n = n^(-beta). Any beta in (0, 1] gives a
// positive, strictly decreasing schedule; the averaged-iterate variance
// guarantee additionally needs beta strictly between 2/3 and 1.
struct GammaSchedule {
  double beta;

  explicit GammaSchedule(double beta_) : beta(beta_) {
    if (!(beta > 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("GammaSchedule: beta must lie in (0, 1]");
    }
  }

  /// True when beta sits in the open interval (2/3, 1) required by the
  /// averaged-iterate MSE analysis.
  bool meets_mse_conditions() const { return beta > 2.0 / 3.0 && beta < 1.0; }
};

inline double gamma_at(const GammaSchedule& s, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("gamma_at: n must be >= 1");
  return std::pow(static_cast<double>(n), -s.beta);
}

}  // namespace onebit
