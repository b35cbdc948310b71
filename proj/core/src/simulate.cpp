#include "placecrb/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "placecrb/fim.hpp"

namespace placecrb {

MeasurementVector sample_measurements(const Scenario& s, RngStream& rng) {
    const Geometry& g = s.geometry;
    const int n = g.size();
    const NoiseModel& nm = s.noise;

    MeasurementVector m;
    m.combo = s.combo;
    if (s.combo.has(Modality::Tdoa)) {
        Eigen::VectorXd eps(n);
        for (int i = 0; i < n; ++i) eps(i) = rng.next_normal(nm.sigma);
        m.tdoa.resize(n - 1);
        const SensorPolar& ref = g.sensors[static_cast<std::size_t>(g.reference_index)];
        int row = 0;
        for (int i = 0; i < n; ++i) {
            if (i == g.reference_index) continue;
            const SensorPolar& sp = g.sensors[static_cast<std::size_t>(i)];
            m.tdoa(row) = (sp.range - ref.range) + (eps(i) - eps(g.reference_index));
            ++row;
        }
    }
    if (s.combo.has(Modality::Aoa)) {
        m.aoa.resize(n);
        for (int i = 0; i < n; ++i) {
            m.aoa(i) = wrap_angle(g.sensors[static_cast<std::size_t>(i)].alpha +
                                  rng.next_normal(nm.rho));
        }
    }
    if (s.combo.has(Modality::Rss)) {
        m.rss.resize(n);
        for (int i = 0; i < n; ++i) {
            const double d = g.sensors[static_cast<std::size_t>(i)].range;
            m.rss(i) = nm.p0 - 10.0 * nm.xi * std::log10(d) + rng.next_normal(nm.delta);
        }
    }
    if (s.combo.has(Modality::Toa)) {
        m.toa.resize(n);
        for (int i = 0; i < n; ++i) {
            m.toa(i) = 2.0 * g.sensors[static_cast<std::size_t>(i)].range +
                       rng.next_normal(nm.gamma);
        }
    }
    return m;
}

namespace {

struct SensorXY {
    double x, y;
};

/// One Gauss-Newton linearization at the candidate source: accumulates the
/// 2x2 normal matrix, the gradient side and the weighted squared residual.
struct Linearization {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    double nll = 0.0; // r^T W r over active blocks
};

Linearization linearize(const MeasurementVector& m, const Scenario& s,
                        const std::vector<SensorXY>& sensors, double sx, double sy) {
    const int n = static_cast<int>(sensors.size());
    const NoiseModel& nm = s.noise;

    Eigen::VectorXd dist(n), az(n);
    for (int i = 0; i < n; ++i) {
        const double dx = sx - sensors[static_cast<std::size_t>(i)].x;
        const double dy = sy - sensors[static_cast<std::size_t>(i)].y;
        const double d = std::hypot(dx, dy);
        if (d < 1e-9) throw Diverged("estimate collapsed onto sensor " + std::to_string(i));
        dist(i) = d;
        az(i) = std::atan2(dy, dx);
    }

    Linearization lin;
    const int ref = s.geometry.reference_index;
    if (m.combo.has(Modality::Tdoa)) {
        // W = (1/sigma^2)(I - 11^T/N): accumulate J^T r and J^T 1 once, O(N).
        const double inv_s2 = 1.0 / (nm.sigma * nm.sigma);
        Eigen::MatrixXd j(n - 1, 2);
        Eigen::VectorXd r(n - 1);
        int row = 0;
        for (int i = 0; i < n; ++i) {
            if (i == ref) continue;
            j(row, 0) = std::cos(az(i)) - std::cos(az(ref));
            j(row, 1) = std::sin(az(i)) - std::sin(az(ref));
            r(row) = m.tdoa(row) - (dist(i) - dist(ref));
            ++row;
        }
        const Eigen::Vector2d jt1 = j.colwise().sum().transpose();
        const double r1 = r.sum();
        lin.h += inv_s2 * (j.transpose() * j - jt1 * jt1.transpose() / n);
        lin.g += inv_s2 * (j.transpose() * r - jt1 * (r1 / n));
        lin.nll += inv_s2 * (r.squaredNorm() - r1 * r1 / n);
    }
    if (m.combo.has(Modality::Aoa)) {
        const double inv_r2 = 1.0 / (nm.rho * nm.rho);
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d ji(-std::sin(az(i)) / dist(i), std::cos(az(i)) / dist(i));
            const double ri = wrap_angle(m.aoa(i) - az(i));
            lin.h += inv_r2 * ji * ji.transpose();
            lin.g += inv_r2 * ji * ri;
            lin.nll += inv_r2 * ri * ri;
        }
    }
    if (m.combo.has(Modality::Rss)) {
        const double a = nm.a();
        const double inv_d2 = 1.0 / (nm.delta * nm.delta);
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d ji(a * std::cos(az(i)) / dist(i), a * std::sin(az(i)) / dist(i));
            const double ri = m.rss(i) - (nm.p0 - 10.0 * nm.xi * std::log10(dist(i)));
            lin.h += inv_d2 * ji * ji.transpose();
            lin.g += inv_d2 * ji * ri;
            lin.nll += inv_d2 * ri * ri;
        }
    }
    if (m.combo.has(Modality::Toa)) {
        const double inv_g2 = 1.0 / (nm.gamma * nm.gamma);
        for (int i = 0; i < n; ++i) {
            const Eigen::Vector2d ji(2.0 * std::cos(az(i)), 2.0 * std::sin(az(i)));
            const double ri = m.toa(i) - 2.0 * dist(i);
            lin.h += inv_g2 * ji * ji.transpose();
            lin.g += inv_g2 * ji * ri;
            lin.nll += inv_g2 * ri * ri;
        }
    }
    return lin;
}

} // namespace

SourcePosition mle_estimate(const MeasurementVector& m, const Scenario& s,
                            SourcePosition init) {
    std::vector<SensorXY> sensors;
    sensors.reserve(s.geometry.sensors.size());
    for (int i = 0; i < s.geometry.size(); ++i) {
        const auto p = s.geometry.sensor_position(i);
        sensors.push_back({p[0], p[1]});
    }

    double sx = init.x, sy = init.y;
    for (int it = 0; it < 100; ++it) {
        const Linearization lin = linearize(m, s, sensors, sx, sy);
        const double det = lin.h(0, 0) * lin.h(1, 1) - lin.h(0, 1) * lin.h(1, 0);
        if (!(std::abs(det) > 1e-300)) throw Diverged("singular normal system");
        Eigen::Vector2d delta = lin.h.inverse() * lin.g;
        if (!delta.allFinite() || delta.norm() > 1e6) {
            throw Diverged("update exceeded 1e6 m");
        }
        // Step-halving damping on likelihood increase.
        double scale = 1.0;
        double nll_new = lin.nll;
        for (int half = 0; half < 20; ++half) {
            try {
                nll_new = linearize(m, s, sensors, sx + scale * delta(0),
                                    sy + scale * delta(1)).nll;
            } catch (const Diverged&) {
                scale *= 0.5;
                continue;
            }
            if (nll_new <= lin.nll) break;
            scale *= 0.5;
        }
        sx += scale * delta(0);
        sy += scale * delta(1);
        if (scale * delta.norm() < 1e-9) break;
    }
    return SourcePosition{sx, sy};
}

McCellResult run_trials(const Scenario& s, int trials, std::uint64_t seed,
                        int threads, std::uint64_t cell_tag) {
    struct Partial {
        double se = 0.0, ex = 0.0, ey = 0.0, exx = 0.0, eyy = 0.0, exy = 0.0;
        int excluded = 0;
    };

    if (threads <= 0) {
        threads = static_cast<int>(std::thread::hardware_concurrency());
        if (threads <= 0) threads = 1;
    }
    const int chunks = std::clamp(trials, 1, 64);
    std::vector<Partial> partials(static_cast<std::size_t>(chunks));

    auto run_chunk = [&](int chunk) {
        Partial& p = partials[static_cast<std::size_t>(chunk)];
        const int begin = static_cast<int>(static_cast<long long>(trials) * chunk / chunks);
        const int end = static_cast<int>(static_cast<long long>(trials) * (chunk + 1) / chunks);
        for (int trial = begin; trial < end; ++trial) {
            RngStream rng = RngStream::substream(seed, cell_tag,
                                                 static_cast<std::uint64_t>(trial));
            const MeasurementVector m = sample_measurements(s, rng);
            try {
                const SourcePosition est = mle_estimate(m, s, s.geometry.source);
                const double ex = est.x - s.geometry.source.x;
                const double ey = est.y - s.geometry.source.y;
                p.se += ex * ex + ey * ey;
                p.ex += ex;
                p.ey += ey;
                p.exx += ex * ex;
                p.eyy += ey * ey;
                p.exy += ex * ey;
            } catch (const Diverged&) {
                ++p.excluded;
            }
        }
    };

    if (threads == 1 || chunks == 1) {
        for (int c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        const int workers = std::min(threads, chunks);
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int c = next.fetch_add(1); c < chunks; c = next.fetch_add(1)) {
                    run_chunk(c);
                }
            });
        }
        for (std::thread& th : pool) th.join();
    }

    // Merge in chunk order; independent of the thread schedule above.
    Partial total;
    for (const Partial& p : partials) {
        total.se += p.se;
        total.ex += p.ex;
        total.ey += p.ey;
        total.exx += p.exx;
        total.eyy += p.eyy;
        total.exy += p.exy;
        total.excluded += p.excluded;
    }

    McCellResult result;
    result.trials = trials;
    result.excluded = total.excluded;
    const int used = trials - total.excluded;
    if (used > 0) {
        const double inv = 1.0 / used;
        result.mse = total.se * inv;
        result.mean_ex = total.ex * inv;
        result.mean_ey = total.ey * inv;
        result.var_ex = total.exx * inv - result.mean_ex * result.mean_ex;
        result.var_ey = total.eyy * inv - result.mean_ey * result.mean_ey;
        result.cov_exy = total.exy * inv - result.mean_ex * result.mean_ey;
    }
    return result;
}

std::vector<SweepRow> mse_sweep(const std::vector<NamedGeometry>& geometries,
                                const NoiseModel& noise, MeasurementCombo combo,
                                const McConfig& cfg) {
    std::vector<SweepRow> rows;
    for (std::size_t si = 0; si < cfg.sigma_sweep.size(); ++si) {
        for (std::size_t gi = 0; gi < geometries.size(); ++gi) {
            Scenario cell;
            cell.geometry = geometries[gi].geometry;
            cell.noise = noise;
            cell.noise.sigma = cfg.sigma_sweep[si];
            cell.combo = combo;

            const std::uint64_t tag = RngStream::mix(si, gi);
            const McCellResult mc = run_trials(cell, cfg.trials, cfg.seed,
                                               cfg.threads, tag);
            SweepRow row;
            row.sigma = cfg.sigma_sweep[si];
            row.geometry_id = geometries[gi].id;
            row.mse = mc.mse;
            row.tr_crb = tr_crb(assemble_fim_direct(cell));
            row.excluded = mc.excluded;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

} // namespace placecrb
