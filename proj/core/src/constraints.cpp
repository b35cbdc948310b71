#include "placecrb/constraints.hpp"

#include <algorithm>
#include <cmath>

namespace placecrb {

ConstraintSet active_constraints(MeasurementCombo combo) {
    ConstraintSet set;
    if (combo.has(Modality::Tdoa)) {
        set.g1 = true;
        set.g2 = true;
    }
    if (combo.has(Modality::Toa)) set.g2 = true;
    if (combo.has(Modality::Aoa) || combo.has(Modality::Rss)) set.g3 = true;
    return set;
}

double ConstraintReport::group_inf_norm(const std::vector<std::string>& groups) const {
    double norm = 0.0;
    for (const ConstraintResidual& r : residuals) {
        if (std::find(groups.begin(), groups.end(), r.group) != groups.end()) {
            norm = std::max(norm, std::abs(r.scaled));
        }
    }
    return norm;
}

ConstraintReport residuals(const Geometry& geometry, const ConstraintSet& set,
                           double tolerance) {
    double sum_sin = 0.0, sum_cos = 0.0;
    double sum_sin2 = 0.0, sum_cos2 = 0.0;
    double sum_sin2_d2 = 0.0, sum_cos2_d2 = 0.0;
    double max_d2 = 0.0;
    for (const SensorPolar& s : geometry.sensors) {
        sum_sin += std::sin(s.alpha);
        sum_cos += std::cos(s.alpha);
        sum_sin2 += std::sin(2.0 * s.alpha);
        sum_cos2 += std::cos(2.0 * s.alpha);
        const double d2 = s.range * s.range;
        sum_sin2_d2 += std::sin(2.0 * s.alpha) / d2;
        sum_cos2_d2 += std::cos(2.0 * s.alpha) / d2;
        max_d2 = std::max(max_d2, d2);
    }

    ConstraintReport report;
    report.tolerance = tolerance;
    if (set.g1) {
        report.residuals.push_back({"sum_sin_alpha", "G1", sum_sin, sum_sin});
        report.residuals.push_back({"sum_cos_alpha", "G1", sum_cos, sum_cos});
    }
    if (set.g2) {
        report.residuals.push_back({"sum_sin_2alpha", "G2", sum_sin2, sum_sin2});
        report.residuals.push_back({"sum_cos_2alpha", "G2", sum_cos2, sum_cos2});
    }
    if (set.g3) {
        report.residuals.push_back(
            {"sum_sin_2alpha_over_d2", "G3", sum_sin2_d2, sum_sin2_d2 * max_d2});
        report.residuals.push_back(
            {"sum_cos_2alpha_over_d2", "G3", sum_cos2_d2, sum_cos2_d2 * max_d2});
    }
    for (const ConstraintResidual& r : report.residuals) {
        report.inf_norm = std::max(report.inf_norm, std::abs(r.scaled));
    }
    report.satisfied = report.inf_norm < tolerance;
    return report;
}

std::vector<double> circular_gaps_deg(const std::vector<double>& alphas) {
    std::vector<double> deg;
    deg.reserve(alphas.size());
    for (double a : alphas) deg.push_back(rad2deg(wrap_angle(a)));
    std::sort(deg.begin(), deg.end());
    std::vector<double> gaps;
    gaps.reserve(deg.size());
    for (std::size_t i = 1; i < deg.size(); ++i) gaps.push_back(deg[i] - deg[i - 1]);
    gaps.push_back(360.0 + deg.front() - deg.back());
    return gaps;
}

bool is_uaa(const Geometry& geometry, double tol_deg) {
    const int n = geometry.size();
    if (n < 3) return false;
    std::vector<double> alphas;
    alphas.reserve(geometry.sensors.size());
    for (const SensorPolar& s : geometry.sensors) alphas.push_back(s.alpha);
    const double target = 360.0 / n;
    for (double gap : circular_gaps_deg(alphas)) {
        if (std::abs(gap - target) > tol_deg) return false;
    }
    return true;
}

std::map<double, std::vector<int>> distance_groups(const Geometry& geometry) {
    std::map<double, std::vector<int>> groups;
    for (int i = 0; i < geometry.size(); ++i) {
        groups[geometry.sensors[static_cast<std::size_t>(i)].range].push_back(i);
    }
    return groups;
}

} // namespace placecrb
