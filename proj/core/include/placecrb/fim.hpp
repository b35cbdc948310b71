#pragma once

#include <Eigen/Dense>
#include <utility>

#include "placecrb/model.hpp"

namespace placecrb {

/// Symmetric 2x2 Fisher information matrix for the source position.
struct Fim {
    double phi11 = 0.0;
    double phi12 = 0.0;
    double phi22 = 0.0;

    double trace() const { return phi11 + phi22; }
    double det() const { return phi11 * phi22 - phi12 * phi12; }

    /// Eigenvalues, ascending.
    std::pair<double, double> eigenvalues() const {
        const double mid = 0.5 * (phi11 + phi22);
        const double half = 0.5 * (phi11 - phi22);
        const double r = std::sqrt(half * half + phi12 * phi12);
        return {mid - r, mid + r};
    }

    Eigen::Matrix2d matrix() const {
        Eigen::Matrix2d m;
        m << phi11, phi12, phi12, phi22;
        return m;
    }
};

/// Jacobian rows of one modality's measurement means with respect to the
/// source coordinates: (N-1) x 2 for TDOA, N x 2 otherwise.
struct JacobianBlock {
    Modality modality;
    Eigen::MatrixXd rows;
};

struct CovarianceBlock {
    Modality modality;
    Eigen::MatrixXd matrix;
};

JacobianBlock jacobian(const Geometry& geometry, Modality modality,
                       const NoiseModel& noise);

/// Measurement noise covariance of one modality. TDOA is sigma^2*(I + 11^T)
/// of size N-1 (differences of iid per-sensor noises); the rest are diagonal.
CovarianceBlock covariance(Modality modality, int n_sensors, const NoiseModel& noise);

/// Closed-form inverse of `covariance`; for TDOA this is (1/sigma^2)(I - 11^T/N).
CovarianceBlock covariance_inverse(Modality modality, int n_sensors,
                                   const NoiseModel& noise);

/// F = sum over active modalities of J^T Sigma^-1 J, via explicit matrix
/// products.
Fim assemble_fim_direct(const Scenario& s);

/// Same information matrix from the scalar closed form in the trig sums
/// B, C, D, E, K, G; gated per active modality.
Fim assemble_fim_closed_form(const Scenario& s);

/// tr(F^-1) in m^2 via the 2x2 cofactor formula. Throws SingularFim when the
/// determinant is not positive (degenerate geometry).
double tr_crb(const Fim& f);

} // namespace placecrb
