#include "doctest.h"

#include <cmath>

#include "placecrb/constraints.hpp"
#include "placecrb/rng.hpp"
#include "test_support.hpp"

using namespace placecrb;
using namespace placecrb::test;

TEST_CASE("constraint attribution follows the per-modality rule") {
    CHECK(active_constraints(Modality::Tdoa | Modality::Toa) == ConstraintSet{true, true, false});
    CHECK(active_constraints(MeasurementCombo::all()) == ConstraintSet{true, true, true});
    CHECK(active_constraints(Modality::Tdoa | Modality::Aoa) ==
          active_constraints(Modality::Tdoa | Modality::Rss));
    CHECK(active_constraints(MeasurementCombo::of(Modality::Toa)) ==
          ConstraintSet{false, true, false});
    CHECK(active_constraints(MeasurementCombo::of(Modality::Aoa)) ==
          ConstraintSet{false, false, true});
    CHECK(active_constraints(MeasurementCombo::of(Modality::Tdoa)) ==
          ConstraintSet{true, true, false});
    // TOA adds nothing on top of TDOA; AOA/RSS add exactly G3.
    CHECK(active_constraints(Modality::Tdoa | Modality::Toa) ==
          active_constraints(MeasurementCombo::of(Modality::Tdoa)));
    CHECK(active_constraints(Modality::Tdoa | Modality::Aoa | Modality::Rss) ==
          active_constraints(Modality::Tdoa | Modality::Aoa));
}

TEST_CASE("two-decimal rounded optimal angles satisfy the full constraint set") {
    const Geometry g = geometry_deg({150.01, -89.99, 30.00}, 1000.0);
    const ConstraintReport rep = residuals(g, active_constraints(MeasurementCombo::all()));
    REQUIRE(rep.residuals.size() == 6);
    for (const ConstraintResidual& r : rep.residuals) {
        CHECK(std::abs(r.value) < 1e-3 * 3);
    }
    CHECK(rep.satisfied);
}

TEST_CASE("quadrature layout zeroes G1 and G2 to rounding") {
    const Geometry g = geometry_deg({0.0, 90.0, 180.0, 270.0}, 1000.0);
    const ConstraintReport rep = residuals(g, ConstraintSet{true, true, false});
    for (const ConstraintResidual& r : rep.residuals) {
        CHECK(std::abs(r.value) < 1e-14);
    }
}

TEST_CASE("UAA with nonuniform ranges satisfies G1/G2 but not G3") {
    const Geometry g = geometry_deg({0.0, 120.0, -120.0}, {1000.0, 1300.0, 1600.0});
    const ConstraintReport rep = residuals(g, ConstraintSet{true, true, true});
    CHECK(rep.group_inf_norm({"G1", "G2"}) < 1e-13);
    // Frozen from direct evaluation of the range-weighted second harmonics.
    double scaled_sin = 0.0, scaled_cos = 0.0;
    for (const ConstraintResidual& r : rep.residuals) {
        if (r.name == "sum_sin_2alpha_over_d2") scaled_sin = r.scaled;
        if (r.name == "sum_cos_2alpha_over_d2") scaled_cos = r.scaled;
    }
    CHECK(scaled_sin == doctest::Approx(-0.44582372857542085).epsilon(1e-9));
    CHECK(scaled_cos == doctest::Approx(1.3026035502958566).epsilon(1e-9));
    CHECK(!rep.satisfied);
}

TEST_CASE("raw G3 residuals shrink with range but the scaled ones do not") {
    const Geometry near = geometry_deg({0.0, 50.0, 170.0}, 100.0);
    const Geometry far = geometry_deg({0.0, 50.0, 170.0}, 10000.0);
    const ConstraintReport rep_near = residuals(near, ConstraintSet{false, false, true});
    const ConstraintReport rep_far = residuals(far, ConstraintSet{false, false, true});
    CHECK(std::abs(rep_far.residuals[0].value) < 1e-4 * std::abs(rep_near.residuals[0].value));
    CHECK(rep_far.residuals[0].scaled ==
          doctest::Approx(rep_near.residuals[0].scaled).epsilon(1e-12));
}

TEST_CASE("is_uaa") {
    CHECK(is_uaa(geometry_deg({150.01, -89.99, 30.00}, 1000.0), 0.5));
    CHECK(!is_uaa(geometry_deg({0.0, 10.0, 20.0}, 1000.0), 0.5));
    CHECK(is_uaa(geometry_deg({0.0, 90.0, 180.0, 270.0}, 1000.0), 0.5));
    CHECK(is_uaa(geometry_deg({17.0, 137.0, -103.0}, 500.0), 0.5));
    CHECK(!is_uaa(geometry_deg({0.0, 120.0, -118.0}, 1000.0), 0.5));
    CHECK(is_uaa(geometry_deg({0.0, 120.0, -118.0}, 1000.0), 2.1));
}

TEST_CASE("circular gaps sum to 360 and honor wrapping") {
    const auto gaps = circular_gaps_deg({deg2rad(170.0), deg2rad(-170.0), deg2rad(0.0)});
    REQUIRE(gaps.size() == 3);
    double total = 0.0;
    for (double g : gaps) total += g;
    CHECK(total == doctest::Approx(360.0));
    CHECK(gaps[0] == doctest::Approx(170.0));
    CHECK(gaps[1] == doctest::Approx(170.0));
    CHECK(gaps[2] == doctest::Approx(20.0));
}

TEST_CASE("rotating every azimuth preserves the residual norms") {
    RngStream rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Geometry g = random_geometry(rng, 3 + static_cast<int>(rng.next_u64() % 6));
        const double theta = (2.0 * rng.next_double() - 1.0) * kPi;
        Geometry rotated = g;
        for (SensorPolar& s : rotated.sensors) s.alpha = wrap_angle(s.alpha + theta);

        auto norms = [](const Geometry& geo) {
            const ConstraintReport rep = residuals(geo, ConstraintSet{true, true, true});
            const auto& r = rep.residuals;
            return std::array<double, 3>{
                std::hypot(r[0].value, r[1].value),
                std::hypot(r[2].value, r[3].value),
                std::hypot(r[4].value, r[5].value),
            };
        };
        const auto a = norms(g);
        const auto b = norms(rotated);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)]) <
                  1e-12 * (1.0 + a[static_cast<std::size_t>(k)]));
        }
    }
}

TEST_CASE("exact UAA with uniform ranges satisfies every active group") {
    for (int n = 3; n <= 10; ++n) {
        const Geometry g = uaa_geometry(n, 900.0, 33.0);
        const ConstraintReport rep = residuals(g, ConstraintSet{true, true, true});
        CHECK(rep.inf_norm < 1e-10 * n);
    }
}

TEST_CASE("distance groups") {
    const Geometry g = geometry_deg({0.0, 40.0, 90.0, -10.0, -60.0, -120.0},
                                    {1000.0, 1000.0, 1000.0, 700.0, 700.0, 700.0});
    const auto groups = distance_groups(g);
    REQUIRE(groups.size() == 2);
    CHECK(groups.at(1000.0).size() == 3);
    CHECK(groups.at(700.0) == std::vector<int>{3, 4, 5});
}
