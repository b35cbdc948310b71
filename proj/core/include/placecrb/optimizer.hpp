#pragma once

#include <cstdint>
#include <vector>

#include "placecrb/constraints.hpp"
#include "placecrb/model.hpp"

namespace placecrb {

enum class GradientMode {
    Analytic,
    FiniteDifference,
};

struct OptimizerConfig {
    int max_steps = 10000;
    double step_size = 1e-3; // radians, applied to the normalized gradient
    GradientMode gradient_mode = GradientMode::Analytic;
    double convergence_tol = 1e-10; // gradient-norm threshold
    double fd_epsilon = 1e-6;       // radians, central differences
};

struct TrajectoryPoint {
    int step = 0;
    std::vector<double> alphas; // radians, wrapped
    double tr_crb = 0.0;        // m^2
    double residual_inf_norm = 0.0;
};

struct Trajectory {
    std::vector<TrajectoryPoint> points; // step 0 plus every accepted step
    Geometry final_geometry;
    double final_tr_crb = 0.0;
    bool converged = false; // gradient norm fell below convergence_tol
    std::uint64_t seed = 0;
};

/// Step size underflowed during backtracking; carries the progress so far so
/// callers can still persist the last good geometry.
struct StallError : Error {
    explicit StallError(Trajectory t)
        : Error("optimizer stalled: backtracking step size underflowed"),
          trajectory(std::move(t)) {}
    Trajectory trajectory;
};

/// tr_crb of the directly assembled FIM; the quantity the optimizer descends.
double objective(const Scenario& s);

/// d tr(F^-1)/d alpha_j, length N. Analytic mode differentiates the closed
/// form via d tr(F^-1) = -tr(F^-1 dF F^-1); finite-difference mode uses
/// central differences of the objective with cfg.fd_epsilon.
std::vector<double> gradient(const Scenario& s, const OptimizerConfig& cfg);

/// Minimizes tr(CRB) over the azimuths with every sensor range frozen.
/// Normalized-gradient steps with backtracking: halve on increase, grow 1.1x
/// on success up to 5x the configured step. Angles re-wrap each step, so the
/// record stays canonical. Deterministic for fixed scenario/config/seed.
/// Step-size underflow with a near-zero gradient ends the run normally (the
/// objective hit its floating-point floor); underflow with a large gradient
/// throws StallError.
Trajectory optimize(const Scenario& s, const OptimizerConfig& cfg,
                    std::uint64_t rng_seed = 0);

} // namespace placecrb
