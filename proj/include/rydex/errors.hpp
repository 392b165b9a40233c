#pragma once

#include <stdexcept>
#include <string>

namespace rydex {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Config file failed validation (bad key, missing key, out-of-range value).
struct ConfigError : Error {
  using Error::Error;
};

/// The trace row of the reduced evolution matrix is not numerically zero,
/// which indicates a vectorization-convention bug.
struct ReductionError : Error {
  using Error::Error;
};

/// Linear solve for the steady state failed.
struct SingularSystem : Error {
  using Error::Error;
};

/// Finite-difference grid has too few points.
struct GridTooCoarse : Error {
  using Error::Error;
};

/// Requested Laplace frequency coincides with a system pole.
struct PoleHit : Error {
  using Error::Error;
};

/// Spectrum grids passed to a frequency-domain operation do not match.
struct GridMismatch : Error {
  using Error::Error;
};

/// State-space realization has at least as many zeros as poles.
struct DegenerateRealization : Error {
  using Error::Error;
};

/// RK4 step produced unacceptable trace drift.
struct UnstableStep : Error {
  using Error::Error;
};

/// Velocity superoperator leaked outside its expected block structure.
struct BlockLeakage : Error {
  using Error::Error;
};

/// Quadrature did not converge under node doubling.
struct NonConvergent : Error {
  using Error::Error;
};

/// Eigendecomposition too ill-conditioned to be trusted.
struct IllConditioned : Error {
  using Error::Error;
};

/// Baseband sample magnitude exceeded the ADC reference voltage.
struct ClippedADC : Error {
  using Error::Error;
};

struct DivisionByZero : Error {
  using Error::Error;
};

}  // namespace rydex
