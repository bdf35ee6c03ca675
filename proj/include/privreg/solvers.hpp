#pragma once

// Deterministic least-squares / ridge solvers and the relative-error metric
// eta = g(theta_hat) / g(theta*), always measured against the ORIGINAL
// objective even when theta_hat was trained on a transformed problem.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <limits>
#include <string>

#include "privreg/dataset.hpp"
#include "privreg/errors.hpp"

namespace privreg {

enum class ModelSource { Exact, AdditiveNoise, RandomProjection, Ridge };

struct ModelEstimate {
    Eigen::VectorXd theta;
    ModelSource source = ModelSource::Exact;
};

struct RidgeProblem {
    double lambda = 0.0;  // >= 0
};

inline ModelEstimate least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (y.size() != X.rows())
        throw ShapeError("least_squares: y length does not match rows of X");
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < X.cols())
        throw RankDeficient("least_squares: rank " + std::to_string(qr.rank()) +
                            " < d=" + std::to_string(X.cols()));
    return {qr.solve(y), ModelSource::Exact};
}

// theta_RR = V (Sigma^2 + lambda I)^-1 Sigma U^T y
inline ModelEstimate ridge_closed_form(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                       const RidgeProblem& rp) {
    if (y.size() != X.rows())
        throw ShapeError("ridge_closed_form: y length does not match rows of X");
    if (rp.lambda < 0.0)
        throw Error("ridge_closed_form: lambda must be nonnegative");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (rp.lambda == 0.0) {
        const double cutoff = static_cast<double>(std::max(X.rows(), X.cols())) *
                              std::numeric_limits<double>::epsilon() * sv(0);
        if ((sv.array() > cutoff).count() < X.cols())
            throw RankDeficient("ridge_closed_form: lambda = 0 requires full column rank");
    }
    const Eigen::VectorXd shrink =
        sv.array() / (sv.array().square() + rp.lambda);
    return {svd.matrixV() * shrink.cwiseProduct(svd.matrixU().transpose() * y),
            ModelSource::Ridge};
}

inline double objective(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& theta) {
    if (theta.size() != X.cols() || y.size() != X.rows())
        throw ShapeError("objective: shape mismatch");
    return (X * theta - y).squaredNorm();
}

// g(theta_hat) / g(theta*) on the original data; >= 1 up to roundoff.
inline double relative_error(const Dataset& ds, const ModelEstimate& est) {
    if (ds.zero_residual())
        throw ZeroResidual("relative_error undefined: g(theta*) = 0");
    const double g_star = ds.residual_norm() * ds.residual_norm();
    return objective(ds.X(), ds.y(), est.theta) / g_star;
}

}  // namespace privreg
