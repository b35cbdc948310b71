#include "placecrb/fim.hpp"

#include <cmath>

namespace placecrb {

JacobianBlock jacobian(const Geometry& geometry, Modality modality,
                       const NoiseModel& noise) {
    const int n = geometry.size();
    JacobianBlock block;
    block.modality = modality;

    switch (modality) {
    case Modality::Tdoa: {
        block.rows.resize(n - 1, 2);
        const SensorPolar& ref = geometry.sensors[static_cast<std::size_t>(geometry.reference_index)];
        const double cr = std::cos(ref.alpha);
        const double sr = std::sin(ref.alpha);
        int row = 0;
        for (int i = 0; i < n; ++i) {
            if (i == geometry.reference_index) continue;
            const SensorPolar& s = geometry.sensors[static_cast<std::size_t>(i)];
            block.rows(row, 0) = std::cos(s.alpha) - cr;
            block.rows(row, 1) = std::sin(s.alpha) - sr;
            ++row;
        }
        break;
    }
    case Modality::Aoa: {
        block.rows.resize(n, 2);
        for (int i = 0; i < n; ++i) {
            const SensorPolar& s = geometry.sensors[static_cast<std::size_t>(i)];
            block.rows(i, 0) = -std::sin(s.alpha) / s.range;
            block.rows(i, 1) = std::cos(s.alpha) / s.range;
        }
        break;
    }
    case Modality::Rss: {
        // d(mean)/d(source) of p0 - 10*xi*log10(range) is A*[cos, sin]/range.
        const double a = noise.a();
        block.rows.resize(n, 2);
        for (int i = 0; i < n; ++i) {
            const SensorPolar& s = geometry.sensors[static_cast<std::size_t>(i)];
            block.rows(i, 0) = a * std::cos(s.alpha) / s.range;
            block.rows(i, 1) = a * std::sin(s.alpha) / s.range;
        }
        break;
    }
    case Modality::Toa: {
        // Round-trip mean 2*range, hence the factor 2.
        block.rows.resize(n, 2);
        for (int i = 0; i < n; ++i) {
            const SensorPolar& s = geometry.sensors[static_cast<std::size_t>(i)];
            block.rows(i, 0) = 2.0 * std::cos(s.alpha);
            block.rows(i, 1) = 2.0 * std::sin(s.alpha);
        }
        break;
    }
    }
    return block;
}

CovarianceBlock covariance(Modality modality, int n_sensors, const NoiseModel& noise) {
    CovarianceBlock block;
    block.modality = modality;
    switch (modality) {
    case Modality::Tdoa: {
        const int m = n_sensors - 1;
        const double s2 = noise.sigma * noise.sigma;
        block.matrix = s2 * (Eigen::MatrixXd::Identity(m, m) +
                             Eigen::MatrixXd::Ones(m, m));
        break;
    }
    case Modality::Aoa:
        block.matrix = noise.rho * noise.rho *
                       Eigen::MatrixXd::Identity(n_sensors, n_sensors);
        break;
    case Modality::Rss:
        block.matrix = noise.delta * noise.delta *
                       Eigen::MatrixXd::Identity(n_sensors, n_sensors);
        break;
    case Modality::Toa:
        block.matrix = noise.gamma * noise.gamma *
                       Eigen::MatrixXd::Identity(n_sensors, n_sensors);
        break;
    }
    return block;
}

CovarianceBlock covariance_inverse(Modality modality, int n_sensors,
                                   const NoiseModel& noise) {
    CovarianceBlock block;
    block.modality = modality;
    switch (modality) {
    case Modality::Tdoa: {
        // Sherman-Morrison: (I + 11^T)^-1 = I - 11^T/N for an (N-1)-vector of ones.
        const int m = n_sensors - 1;
        const double inv_s2 = 1.0 / (noise.sigma * noise.sigma);
        block.matrix = inv_s2 * (Eigen::MatrixXd::Identity(m, m) -
                                 Eigen::MatrixXd::Ones(m, m) / n_sensors);
        break;
    }
    case Modality::Aoa:
        block.matrix = Eigen::MatrixXd::Identity(n_sensors, n_sensors) /
                       (noise.rho * noise.rho);
        break;
    case Modality::Rss:
        block.matrix = Eigen::MatrixXd::Identity(n_sensors, n_sensors) /
                       (noise.delta * noise.delta);
        break;
    case Modality::Toa:
        block.matrix = Eigen::MatrixXd::Identity(n_sensors, n_sensors) /
                       (noise.gamma * noise.gamma);
        break;
    }
    return block;
}

Fim assemble_fim_direct(const Scenario& s) {
    const int n = s.geometry.size();
    Eigen::Matrix2d f = Eigen::Matrix2d::Zero();
    for (Modality m : {Modality::Tdoa, Modality::Aoa, Modality::Rss, Modality::Toa}) {
        if (!s.combo.has(m)) continue;
        const Eigen::MatrixXd j = jacobian(s.geometry, m, s.noise).rows;
        const Eigen::MatrixXd w = covariance_inverse(m, n, s.noise).matrix;
        f += j.transpose() * w * j;
    }
    return Fim{f(0, 0), 0.5 * (f(0, 1) + f(1, 0)), f(1, 1)};
}

Fim assemble_fim_closed_form(const Scenario& s) {
    const int n = s.geometry.size();
    const NoiseModel& nm = s.noise;
    const double t = (s.combo.has(Modality::Tdoa) ? 1.0 / (nm.sigma * nm.sigma) : 0.0) +
                     (s.combo.has(Modality::Toa) ? 4.0 / (nm.gamma * nm.gamma) : 0.0);
    const double r = s.combo.has(Modality::Rss) ? nm.a() * nm.a() / (nm.delta * nm.delta) : 0.0;
    const double q = s.combo.has(Modality::Aoa) ? 1.0 / (nm.rho * nm.rho) : 0.0;
    const double ct = s.combo.has(Modality::Tdoa) ? 1.0 / (n * nm.sigma * nm.sigma) : 0.0;

    double sum_cos = 0.0;    // B
    double sum_sin = 0.0;    // C
    double phi11 = 0.0, phi12 = 0.0, phi22 = 0.0;
    for (const SensorPolar& sp : s.geometry.sensors) {
        const double c = std::cos(sp.alpha);
        const double sn = std::sin(sp.alpha);
        const double inv_d2 = 1.0 / (sp.range * sp.range);
        phi11 += (t + r * inv_d2) * c * c + q * inv_d2 * sn * sn;
        phi22 += (t + r * inv_d2) * sn * sn + q * inv_d2 * c * c;
        phi12 += (t + (r - q) * inv_d2) * c * sn;
        sum_cos += c;
        sum_sin += sn;
    }
    phi11 -= ct * sum_cos * sum_cos;
    phi22 -= ct * sum_sin * sum_sin;
    phi12 -= ct * sum_cos * sum_sin;
    return Fim{phi11, phi12, phi22};
}

double tr_crb(const Fim& f) {
    const double det = f.det();
    if (!(det > 1e-300)) {
        throw SingularFim("Fisher information matrix is singular (det = " +
                          std::to_string(det) + ")");
    }
    return (f.phi11 + f.phi22) / det;
}

} // namespace placecrb
