#include "placecrb/bounds.hpp"

#include <algorithm>

namespace placecrb {

BoundInputs bound_inputs_for(MeasurementCombo combo, const NoiseModel& noise,
                             const Geometry& geometry) {
    BoundInputs in;
    in.n = geometry.size();
    if (combo.has(Modality::Tdoa)) in.h += 1.0 / (noise.sigma * noise.sigma);
    if (combo.has(Modality::Toa)) in.h += 4.0 / (noise.gamma * noise.gamma);
    if (combo.has(Modality::Aoa)) in.l += 1.0 / (noise.rho * noise.rho);
    if (combo.has(Modality::Rss)) in.l += noise.a() * noise.a() / (noise.delta * noise.delta);
    for (const SensorPolar& s : geometry.sensors) {
        in.inv_d2_sum += 1.0 / (s.range * s.range);
    }
    return in;
}

double generalized_bound(const BoundInputs& inputs) {
    const double denom = inputs.h * inputs.n + inputs.l * inputs.inv_d2_sum;
    if (!(denom > 0.0)) {
        throw ZeroInformation("bound denominator is not positive");
    }
    return 4.0 / denom;
}

double optimal_bound(const Scenario& s) {
    if (!s.combo.has(Modality::Tdoa)) {
        throw UnsupportedCombo("optimal bound derived only for TDOA-based combos; "
                               "use generalized_bound for " + combo_name(s.combo));
    }
    return generalized_bound(bound_inputs_for(s.combo, s.noise, s.geometry));
}

const std::vector<MeasurementCombo>& tdoa_hybrid_combos() {
    static const std::vector<MeasurementCombo> combos = {
        Modality::Tdoa | Modality::Aoa,                                  // O1
        Modality::Tdoa | Modality::Rss,                                  // O2
        Modality::Tdoa | Modality::Toa,                                  // O3
        Modality::Tdoa | Modality::Aoa | Modality::Rss,                  // O4
        Modality::Tdoa | Modality::Rss | Modality::Toa,                  // O5
        Modality::Tdoa | Modality::Aoa | Modality::Toa,                  // O6
        MeasurementCombo::all(),                                         // O7
    };
    return combos;
}

int bound_index(MeasurementCombo combo) {
    const auto& combos = tdoa_hybrid_combos();
    for (std::size_t i = 0; i < combos.size(); ++i) {
        if (combos[i] == combo) return static_cast<int>(i) + 1;
    }
    return 0;
}

std::vector<BoundRow> bound_ordering_report(const NoiseModel& noise,
                                            const Geometry& geometry) {
    std::vector<BoundRow> rows;
    for (MeasurementCombo combo : tdoa_hybrid_combos()) {
        BoundRow row;
        row.combo = combo;
        row.inputs = bound_inputs_for(combo, noise, geometry);
        row.bound = generalized_bound(row.inputs);
        rows.push_back(row);
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const BoundRow& a, const BoundRow& b) { return a.bound < b.bound; });
    return rows;
}

} // namespace placecrb
