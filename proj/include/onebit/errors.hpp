#pragma once

#include <stdexcept>

namespace onebit {

/// Posterior mass vanished everywhere on the grid (all log weights -inf or
/// the normalizer is no longer finite). Means the grid no longer covers the
/// region the messages point at.
struct GridExhaustionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A root bracket could not be established (no sign change over the grid).
struct BracketFailureError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A truncated-mean split left less than the minimum mass on one side.
struct DegenerateSplitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The prior's location Fisher information does not exist (e.g. a uniform
/// density, which does not vanish at the endpoints of its support).
struct UndefinedFisherInfoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace onebit
