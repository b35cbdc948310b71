#pragma once

#include <vector>

#include "placecrb/model.hpp"

namespace placecrb {

/// Coefficients of the analytic bound 4/(h*n + l*sum(1/d_i^2)):
/// h collects the range-type weights (TDOA, TOA), l the per-range weights
/// (AOA, RSS).
struct BoundInputs {
    double h = 0.0;          // 1/m^2
    double l = 0.0;          // dimensionless over m^2
    double inv_d2_sum = 0.0; // sum of 1/d_i^2, 1/m^2
    int n = 0;               // sensor count
};

BoundInputs bound_inputs_for(MeasurementCombo combo, const NoiseModel& noise,
                             const Geometry& geometry);

/// 4/(h*n + l*inv_d2_sum). Throws ZeroInformation when the denominator is
/// not positive.
double generalized_bound(const BoundInputs& inputs);

/// Smallest achievable tr(CRB) for a TDOA-based combo (the closed-form
/// optimum values O1..O7). Throws UnsupportedCombo when TDOA is absent;
/// use generalized_bound for those extension combos.
double optimal_bound(const Scenario& s);

/// 1-based index of a TDOA-based hybrid combo in the canonical O1..O7
/// listing, or 0 when the combo is not one of the seven.
int bound_index(MeasurementCombo combo);

/// The seven TDOA-based hybrid combos, in O1..O7 order.
const std::vector<MeasurementCombo>& tdoa_hybrid_combos();

struct BoundRow {
    MeasurementCombo combo;
    BoundInputs inputs;
    double bound = 0.0; // m^2
};

/// One row per TDOA-based hybrid combo, sorted ascending by bound value.
std::vector<BoundRow> bound_ordering_report(const NoiseModel& noise,
                                            const Geometry& geometry);

} // namespace placecrb
