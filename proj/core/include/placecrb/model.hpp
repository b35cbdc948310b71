#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "placecrb/errors.hpp"

namespace placecrb {

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

struct SourcePosition {
    double x = 0.0; // meters
    double y = 0.0; // meters

    bool operator==(const SourcePosition&) const = default;
};

/// One sensor in polar form relative to the source: azimuth from the sensor
/// towards the source, in (-pi, pi], and the sensor-source range in meters.
struct SensorPolar {
    double alpha = 0.0; // radians
    double range = 0.0; // meters, > 0

    bool operator==(const SensorPolar&) const = default;
};

enum class Modality : unsigned {
    Tdoa = 1u << 0,
    Aoa = 1u << 1,
    Rss = 1u << 2,
    Toa = 1u << 3,
};

/// Subset of {TDOA, AOA, RSS, TOA} active in a scenario.
class MeasurementCombo {
public:
    constexpr MeasurementCombo() = default;
    constexpr explicit MeasurementCombo(unsigned bits) : bits_(bits & 0xfu) {}

    static constexpr MeasurementCombo of(Modality m) {
        return MeasurementCombo(static_cast<unsigned>(m));
    }
    static constexpr MeasurementCombo all() { return MeasurementCombo(0xfu); }

    constexpr bool has(Modality m) const {
        return (bits_ & static_cast<unsigned>(m)) != 0;
    }
    constexpr bool empty() const { return bits_ == 0; }
    constexpr unsigned bits() const { return bits_; }
    constexpr int count() const {
        unsigned b = bits_;
        int n = 0;
        while (b) {
            n += b & 1u;
            b >>= 1;
        }
        return n;
    }
    constexpr bool subset_of(MeasurementCombo other) const {
        return (bits_ & other.bits_) == bits_;
    }
    constexpr MeasurementCombo with(Modality m) const {
        return MeasurementCombo(bits_ | static_cast<unsigned>(m));
    }

    bool operator==(const MeasurementCombo&) const = default;

private:
    unsigned bits_ = 0;
};

constexpr MeasurementCombo operator|(Modality a, Modality b) {
    return MeasurementCombo(static_cast<unsigned>(a) | static_cast<unsigned>(b));
}
constexpr MeasurementCombo operator|(MeasurementCombo a, Modality b) {
    return a.with(b);
}

/// Canonical name, e.g. "TDOA-AOA-RSS-TOA".
std::string combo_name(MeasurementCombo combo);

/// Per-modality noise parameters. TDOA sigma is the per-sensor range-noise
/// std in meters (range-difference domain), so each TDOA has variance
/// 2*sigma^2 and pairs sharing the reference covary with sigma^2.
struct NoiseModel {
    double sigma = 0.0; // TDOA per-sensor range std, meters
    double rho = 0.0;   // AOA std, radians
    double delta = 0.0; // RSS std, power units
    double gamma = 0.0; // TOA range std, meters
    double p0 = 0.0;    // source power, power units
    double xi = 0.0;    // path-loss exponent, dimensionless

    /// A = -10*xi/ln(10); recomputed so it can never go stale.
    double a() const { return -10.0 * xi / std::log(10.0); }

    bool operator==(const NoiseModel&) const = default;
};

struct Geometry {
    SourcePosition source;
    std::vector<SensorPolar> sensors;
    int reference_index = 0; // TDOA reference sensor

    int size() const { return static_cast<int>(sensors.size()); }

    /// Cartesian position of sensor i, recovered from the polar form.
    std::array<double, 2> sensor_position(int i) const {
        const SensorPolar& s = sensors.at(static_cast<std::size_t>(i));
        return {source.x - s.range * std::cos(s.alpha),
                source.y - s.range * std::sin(s.alpha)};
    }

    bool operator==(const Geometry&) const = default;
};

struct Scenario {
    Geometry geometry;
    NoiseModel noise;
    MeasurementCombo combo;

    bool operator==(const Scenario&) const = default;
};

/// List of human-readable invariant violations; empty means valid.
struct ValidationReport {
    std::vector<std::string> violations;

    bool ok() const { return violations.empty(); }
};

/// Converts Cartesian sensors to the polar form used everywhere else.
/// Throws TooFewSensors (< 3 positions) or CoincidentSensor (zero range).
Geometry geometry_from_cartesian(SourcePosition source,
                                 const std::vector<std::array<double, 2>>& sensor_positions,
                                 int reference_index = 0);

ValidationReport validate_scenario(const Scenario& s);

} // namespace placecrb
