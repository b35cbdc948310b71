#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "placecrb/model.hpp"
#include "placecrb/rng.hpp"

namespace placecrb {

/// One synthetic draw of the hybrid measurements; only active-modality
/// blocks are populated. TDOA excludes the reference sensor, so its block
/// has length N-1; the others have length N.
struct MeasurementVector {
    MeasurementCombo combo;
    Eigen::VectorXd tdoa; // range-differences, meters
    Eigen::VectorXd aoa;  // azimuths, radians, wrapped
    Eigen::VectorXd rss;  // powers
    Eigen::VectorXd toa;  // round-trip ranges, meters
};

struct McConfig {
    int trials = 10000;
    std::uint64_t seed = 0;
    std::vector<double> sigma_sweep; // TDOA sigma values, meters
    int threads = 0;                 // 0 = hardware concurrency
};

/// Noisy measurements at the true scenario geometry. TDOA noise is realized
/// as differences of iid per-sensor N(0, sigma^2) draws, which produces the
/// sigma^2*(I + 11^T) covariance the FIM assumes.
MeasurementVector sample_measurements(const Scenario& s, RngStream& rng);

/// Maximum-likelihood source estimate: Gauss-Newton on the weighted
/// residuals with block covariance weighting, AOA residuals wrapped into
/// (-pi, pi], and step-halving damping on likelihood increase. Converges
/// when the position update drops below 1e-9 m or after 100 iterations.
/// Throws Diverged when the update exceeds 1e6 m, the normal system is
/// singular, or the iterate collapses onto a sensor.
SourcePosition mle_estimate(const MeasurementVector& m, const Scenario& s,
                            SourcePosition init);

/// Accumulated error moments of one Monte Carlo cell.
struct McCellResult {
    int trials = 0;
    int excluded = 0;    // Diverged trials, not counted in the moments
    double mse = 0.0;    // mean squared position error, m^2
    double mean_ex = 0.0;
    double mean_ey = 0.0;
    double var_ex = 0.0;
    double var_ey = 0.0;
    double cov_exy = 0.0;

    double corr_xy() const {
        const double denom = std::sqrt(var_ex * var_ey);
        return denom > 0.0 ? cov_exy / denom : 0.0;
    }
};

/// Runs `trials` independent sample/estimate rounds at the scenario's true
/// source. Per-trial RNG substreams come from (seed, cell_tag, trial), so
/// the result is identical for any thread count.
McCellResult run_trials(const Scenario& s, int trials, std::uint64_t seed,
                        int threads = 0, std::uint64_t cell_tag = 0);

struct NamedGeometry {
    std::string id;
    Geometry geometry;
};

struct SweepRow {
    double sigma = 0.0;
    std::string geometry_id;
    double mse = 0.0;    // m^2
    double tr_crb = 0.0; // m^2
    int excluded = 0;
};

/// Monte Carlo MSE of each geometry across the sigma sweep, with the
/// matching tr(CRB) per cell.
std::vector<SweepRow> mse_sweep(const std::vector<NamedGeometry>& geometries,
                                const NoiseModel& noise, MeasurementCombo combo,
                                const McConfig& cfg);

} // namespace placecrb
