#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cotrack/errors.hpp"

namespace cotrack {

/// Regularization floor used whenever a matrix must be inverted or a
/// Cholesky factor is required and the input is singular.
inline constexpr double kRegularizationEps = 1e-9;

inline Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
    return 0.5 * (m + m.transpose());
}

inline double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m),
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

/// True if `m` is symmetric within an absolute tolerance scaled by the
/// largest entry magnitude.
inline bool is_symmetric(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
    if (m.rows() != m.cols()) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

/// True if `m` is symmetric and its spectrum is bounded below by
/// -rel_tol * scale (i.e. PSD up to numerical noise).
inline bool is_psd(const Eigen::MatrixXd& m, double rel_tol = 1e-9) {
    if (!is_symmetric(m, rel_tol)) return false;
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return min_eigenvalue(m) >= -rel_tol * scale;
}

/// Symmetrize and clamp negative eigenvalues to zero.
inline Eigen::MatrixXd floor_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(m));
    Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

/// Invert a nominally-SPD matrix; singular inputs get the +eps*I treatment.
inline Eigen::MatrixXd invert_spd(const Eigen::MatrixXd& m,
                                  double eps = kRegularizationEps) {
    Eigen::LLT<Eigen::MatrixXd> llt(symmetrized(m));
    if (llt.info() != Eigen::Success) {
        Eigen::MatrixXd reg = symmetrized(m);
        reg.diagonal().array() += eps;
        llt.compute(reg);
        if (llt.info() != Eigen::Success)
            throw ValidationError("matrix not positive definite after regularization");
    }
    return llt.solve(Eigen::MatrixXd::Identity(m.rows(), m.cols()));
}

} // namespace cotrack
