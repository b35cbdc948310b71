#pragma once

#include <vector>

#include "placecrb/model.hpp"
#include "placecrb/rng.hpp"

namespace placecrb::test {

inline NoiseModel case1_noise() {
    NoiseModel n;
    n.sigma = 0.5;
    n.rho = deg2rad(1.0);
    n.delta = 1.0;
    n.gamma = 1.5;
    n.p0 = 1000.0;
    n.xi = 1.0;
    return n;
}

inline NoiseModel case2_noise() {
    NoiseModel n;
    n.sigma = 1.0;
    n.rho = deg2rad(2.0);
    n.delta = 2.0;
    n.gamma = 2.0;
    n.p0 = 1000.0;
    n.xi = 1.0;
    return n;
}

inline Geometry geometry_deg(const std::vector<double>& angles_deg,
                             const std::vector<double>& ranges) {
    Geometry g;
    for (std::size_t i = 0; i < angles_deg.size(); ++i) {
        g.sensors.push_back({wrap_angle(deg2rad(angles_deg[i])), ranges[i]});
    }
    return g;
}

inline Geometry geometry_deg(const std::vector<double>& angles_deg, double range) {
    return geometry_deg(angles_deg, std::vector<double>(angles_deg.size(), range));
}

inline Geometry case1_uaa() { return geometry_deg({150.0, -90.0, 30.0}, 1000.0); }

inline Scenario case1_scenario(const Geometry& g = case1_uaa(),
                               MeasurementCombo combo = MeasurementCombo::all()) {
    return Scenario{g, case1_noise(), combo};
}

/// Exact uniform angular array of n sensors, rotated by offset_deg.
inline Geometry uaa_geometry(int n, double range, double offset_deg = 0.0) {
    std::vector<double> angles;
    for (int i = 0; i < n; ++i) angles.push_back(offset_deg + 360.0 * i / n);
    return geometry_deg(angles, range);
}

/// Random geometry with azimuths in (-pi, pi] and ranges in [100, 5000] m.
inline Geometry random_geometry(RngStream& rng, int n) {
    Geometry g;
    for (int i = 0; i < n; ++i) {
        const double alpha = wrap_angle((2.0 * rng.next_double() - 1.0) * kPi);
        const double range = 100.0 + 4900.0 * rng.next_double();
        g.sensors.push_back({alpha, range});
    }
    return g;
}

/// The seven TDOA-based hybrid combos in O1..O7 order.
inline std::vector<MeasurementCombo> seven_combos() {
    return {
        Modality::Tdoa | Modality::Aoa,
        Modality::Tdoa | Modality::Rss,
        Modality::Tdoa | Modality::Toa,
        Modality::Tdoa | Modality::Aoa | Modality::Rss,
        Modality::Tdoa | Modality::Rss | Modality::Toa,
        Modality::Tdoa | Modality::Aoa | Modality::Toa,
        MeasurementCombo::all(),
    };
}

} // namespace placecrb::test
