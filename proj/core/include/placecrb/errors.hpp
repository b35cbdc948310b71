#pragma once

#include <stdexcept>
#include <string>

namespace placecrb {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A sensor coincides with the source (zero range).
struct CoincidentSensor : Error {
    using Error::Error;
};

/// Fewer than the minimum three sensors.
struct TooFewSensors : Error {
    using Error::Error;
};

/// Fisher information matrix is numerically singular.
struct SingularFim : Error {
    using Error::Error;
};

/// Requested bound formula does not cover the given combo.
struct UnsupportedCombo : Error {
    using Error::Error;
};

/// Bound denominator is zero (no information in any active modality).
struct ZeroInformation : Error {
    using Error::Error;
};

/// Estimator left its basin or the normal system became singular.
struct Diverged : Error {
    using Error::Error;
};

/// Scenario or geometry file could not be parsed.
struct ParseError : Error {
    using Error::Error;
};

} // namespace placecrb
