#include "placecrb/model.hpp"

#include <cmath>

namespace placecrb {

std::string combo_name(MeasurementCombo combo) {
    std::string name;
    auto append = [&name](const char* part) {
        if (!name.empty()) name += '-';
        name += part;
    };
    if (combo.has(Modality::Tdoa)) append("TDOA");
    if (combo.has(Modality::Aoa)) append("AOA");
    if (combo.has(Modality::Rss)) append("RSS");
    if (combo.has(Modality::Toa)) append("TOA");
    if (name.empty()) name = "none";
    return name;
}

Geometry geometry_from_cartesian(SourcePosition source,
                                 const std::vector<std::array<double, 2>>& sensor_positions,
                                 int reference_index) {
    if (sensor_positions.size() < 3) {
        throw TooFewSensors("geometry requires at least 3 sensors, got " +
                            std::to_string(sensor_positions.size()));
    }
    Geometry g;
    g.source = source;
    g.reference_index = reference_index;
    g.sensors.reserve(sensor_positions.size());
    for (std::size_t i = 0; i < sensor_positions.size(); ++i) {
        const double dx = source.x - sensor_positions[i][0];
        const double dy = source.y - sensor_positions[i][1];
        const double d = std::hypot(dx, dy);
        if (d == 0.0) {
            throw CoincidentSensor("sensor " + std::to_string(i) +
                                   " coincides with the source");
        }
        g.sensors.push_back({wrap_angle(std::atan2(dy, dx)), d});
    }
    return g;
}

ValidationReport validate_scenario(const Scenario& s) {
    ValidationReport report;
    auto flag = [&report](std::string msg) { report.violations.push_back(std::move(msg)); };

    const Geometry& g = s.geometry;
    if (g.size() < 3) flag("too few sensors");
    if (g.reference_index < 0 || g.reference_index >= g.size()) {
        flag("reference index out of range");
    }
    if (!std::isfinite(g.source.x)) flag("nonfinite value: source.x");
    if (!std::isfinite(g.source.y)) flag("nonfinite value: source.y");
    for (int i = 0; i < g.size(); ++i) {
        const SensorPolar& sp = g.sensors[static_cast<std::size_t>(i)];
        if (!std::isfinite(sp.alpha)) flag("nonfinite value: sensor " + std::to_string(i) + " alpha");
        if (!std::isfinite(sp.range)) {
            flag("nonfinite value: sensor " + std::to_string(i) + " distance");
        } else if (sp.range <= 0.0) {
            flag("nonpositive distance: sensor " + std::to_string(i));
        }
    }

    if (s.combo.empty()) flag("empty measurement combo");
    const NoiseModel& n = s.noise;
    for (double v : {n.sigma, n.rho, n.delta, n.gamma, n.p0, n.xi}) {
        if (!std::isfinite(v)) {
            flag("nonfinite value in noise model");
            break;
        }
    }
    if (s.combo.has(Modality::Tdoa) && !(n.sigma > 0.0)) flag("nonpositive std: sigma");
    if (s.combo.has(Modality::Aoa) && !(n.rho > 0.0)) flag("nonpositive std: rho");
    if (s.combo.has(Modality::Rss) && !(n.delta > 0.0)) flag("nonpositive std: delta");
    if (s.combo.has(Modality::Rss) && !(n.xi > 0.0)) flag("nonpositive path-loss exponent: xi");
    if (s.combo.has(Modality::Toa) && !(n.gamma > 0.0)) flag("nonpositive std: gamma");
    return report;
}

} // namespace placecrb
