#include "placecrb/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "placecrb/fim.hpp"

namespace placecrb {

namespace {

double residual_norm(const Geometry& g, MeasurementCombo combo) {
    return residuals(g, active_constraints(combo)).inf_norm;
}

std::vector<double> analytic_gradient(const Scenario& s) {
    const int n = s.geometry.size();
    const NoiseModel& nm = s.noise;
    const double t = (s.combo.has(Modality::Tdoa) ? 1.0 / (nm.sigma * nm.sigma) : 0.0) +
                     (s.combo.has(Modality::Toa) ? 4.0 / (nm.gamma * nm.gamma) : 0.0);
    const double r = s.combo.has(Modality::Rss) ? nm.a() * nm.a() / (nm.delta * nm.delta) : 0.0;
    const double q = s.combo.has(Modality::Aoa) ? 1.0 / (nm.rho * nm.rho) : 0.0;
    const double ct = s.combo.has(Modality::Tdoa) ? 1.0 / (n * nm.sigma * nm.sigma) : 0.0;

    double sum_cos = 0.0, sum_sin = 0.0;
    for (const SensorPolar& sp : s.geometry.sensors) {
        sum_cos += std::cos(sp.alpha);
        sum_sin += std::sin(sp.alpha);
    }

    const Fim f = assemble_fim_closed_form(s);
    const double det = f.det();
    if (!(det > 1e-300)) throw SingularFim("singular FIM in gradient");
    const double tr = f.trace();

    std::vector<double> grad(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const SensorPolar& sp = s.geometry.sensors[static_cast<std::size_t>(j)];
        const double w = t + (r - q) / (sp.range * sp.range);
        const double s2 = std::sin(2.0 * sp.alpha);
        const double c2 = std::cos(2.0 * sp.alpha);
        const double c = std::cos(sp.alpha);
        const double sn = std::sin(sp.alpha);
        const double d11 = -w * s2 + 2.0 * ct * sum_cos * sn;
        const double d22 = w * s2 - 2.0 * ct * sum_sin * c;
        const double d12 = w * c2 - ct * (sum_cos * c - sum_sin * sn);
        const double ddet = d11 * f.phi22 + f.phi11 * d22 - 2.0 * f.phi12 * d12;
        grad[static_cast<std::size_t>(j)] = ((d11 + d22) * det - tr * ddet) / (det * det);
    }
    return grad;
}

std::vector<double> fd_gradient(const Scenario& s, double eps) {
    const int n = s.geometry.size();
    std::vector<double> grad(static_cast<std::size_t>(n));
    Scenario work = s;
    for (int j = 0; j < n; ++j) {
        const double a0 = s.geometry.sensors[static_cast<std::size_t>(j)].alpha;
        work.geometry.sensors[static_cast<std::size_t>(j)].alpha = a0 + eps;
        const double fp = objective(work);
        work.geometry.sensors[static_cast<std::size_t>(j)].alpha = a0 - eps;
        const double fm = objective(work);
        work.geometry.sensors[static_cast<std::size_t>(j)].alpha = a0;
        grad[static_cast<std::size_t>(j)] = (fp - fm) / (2.0 * eps);
    }
    return grad;
}

} // namespace

double objective(const Scenario& s) { return tr_crb(assemble_fim_direct(s)); }

std::vector<double> gradient(const Scenario& s, const OptimizerConfig& cfg) {
    if (cfg.gradient_mode == GradientMode::Analytic) return analytic_gradient(s);
    return fd_gradient(s, cfg.fd_epsilon);
}

Trajectory optimize(const Scenario& s, const OptimizerConfig& cfg, std::uint64_t rng_seed) {
    Scenario work = s;
    for (SensorPolar& sp : work.geometry.sensors) sp.alpha = wrap_angle(sp.alpha);

    Trajectory traj;
    traj.seed = rng_seed;

    auto alphas_of = [](const Geometry& g) {
        std::vector<double> a;
        a.reserve(g.sensors.size());
        for (const SensorPolar& sp : g.sensors) a.push_back(sp.alpha);
        return a;
    };
    auto record = [&](int step, double f) {
        traj.points.push_back({step, alphas_of(work.geometry), f,
                               residual_norm(work.geometry, work.combo)});
    };

    double f = objective(work); // singular initial geometry propagates
    record(0, f);

    const double step_cap = 5.0 * cfg.step_size;
    double step = cfg.step_size;
    for (int k = 1; k <= cfg.max_steps; ++k) {
        const std::vector<double> grad = gradient(work, cfg);
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm < cfg.convergence_tol) {
            traj.converged = true;
            break;
        }

        // Backtracking: reject any increase (or singular FIM) and halve.
        Scenario candidate = work;
        while (true) {
            for (std::size_t j = 0; j < grad.size(); ++j) {
                candidate.geometry.sensors[j].alpha = wrap_angle(
                    work.geometry.sensors[j].alpha - step * grad[j] / norm);
            }
            double fc = std::numeric_limits<double>::infinity();
            try {
                fc = objective(candidate);
            } catch (const SingularFim&) {
            }
            if (fc <= f) {
                work = candidate;
                f = fc;
                step = std::min(step * 1.1, step_cap);
                break;
            }
            step *= 0.5;
            if (step < 1e-15) {
                traj.final_geometry = work.geometry;
                traj.final_tr_crb = f;
                // Underflow with a near-zero gradient is the floating-point
                // floor of the objective, not a failure: stop cleanly.
                if (norm < 1e-6) return traj;
                throw StallError(std::move(traj));
            }
        }
        record(k, f);
    }

    traj.final_geometry = work.geometry;
    traj.final_tr_crb = f;
    return traj;
}

} // namespace placecrb
