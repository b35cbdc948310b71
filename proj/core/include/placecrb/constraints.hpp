#pragma once

#include <map>
#include <string>
#include <vector>

#include "placecrb/model.hpp"

namespace placecrb {

/// The three optimality-constraint groups:
///   G1: sum sin(a_i) = 0, sum cos(a_i) = 0
///   G2: sum sin(2a_i) = 0, sum cos(2a_i) = 0
///   G3: sum sin(2a_i)/d_i^2 = 0, sum cos(2a_i)/d_i^2 = 0
struct ConstraintSet {
    bool g1 = false;
    bool g2 = false;
    bool g3 = false;

    bool operator==(const ConstraintSet&) const = default;
};

/// Constraint groups contributed by each modality: TDOA gives G1+G2, TOA
/// gives G2, AOA and RSS each give G3; a combo activates the union.
ConstraintSet active_constraints(MeasurementCombo combo);

struct ConstraintResidual {
    std::string name;   // e.g. "sum_sin_2alpha_over_d2"
    std::string group;  // "G1", "G2" or "G3"
    double value = 0.0; // the literal sum
    double scaled = 0.0; // G3 is rescaled by max d_i^2; others equal value
};

struct ConstraintReport {
    std::vector<ConstraintResidual> residuals;
    double inf_norm = 0.0; // max |scaled| over active residuals
    double tolerance = 0.0;
    bool satisfied = false; // inf_norm < tolerance

    /// Max |scaled| restricted to the named groups (e.g. {"G1","G2"}).
    double group_inf_norm(const std::vector<std::string>& groups) const;
};

/// Evaluates the active constraint sums at a geometry. G3 residuals are
/// reported both raw and scaled by max d_i^2 (raw G3 shrinks as 1/d^2 and
/// would pass trivially at long range); `satisfied` uses the scaled values.
ConstraintReport residuals(const Geometry& geometry, const ConstraintSet& set,
                           double tolerance = 1e-2);

/// True iff the sorted circular azimuth gaps are all within tol_deg of 360/N.
bool is_uaa(const Geometry& geometry, double tol_deg);

/// Circular gaps between sorted azimuths, in degrees (sums to 360).
std::vector<double> circular_gaps_deg(const std::vector<double>& alphas);

/// Sensor indices grouped by identical sensor-source range, keyed by range.
std::map<double, std::vector<int>> distance_groups(const Geometry& geometry);

} // namespace placecrb
