#pragma once

// Dataset container plus the deterministic spectral functionals everything
// else consumes: singular values, condition number kappa, residual ratio r,
// and the per-column interference floor f. One SVD per dataset, cached.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "privreg/errors.hpp"

namespace privreg {

struct SpectralSummary {
    Eigen::VectorXd singular_values;  // descending
    double sigma_max = 0.0;
    double sigma_min = 0.0;
    double kappa = 1.0;               // sigma_max / sigma_min
    double r = 0.0;                   // ||X theta*|| / ||X theta* - y||
    double f = 0.0;                   // min_i f_per_column[i]
    Eigen::VectorXd f_per_column;     // f_i^2 = col energy - largest squared entry
};

class Dataset {
  public:
    const Eigen::MatrixXd& X() const { return X_; }
    const Eigen::VectorXd& y() const { return y_; }
    Eigen::Index n() const { return X_.rows(); }
    Eigen::Index d() const { return X_.cols(); }

    // Least-squares facts cached from the validating SVD.
    const Eigen::VectorXd& theta_star() const { return theta_star_; }
    double fitted_norm() const { return fitted_norm_; }      // ||X theta*||
    double residual_norm() const { return residual_norm_; }  // ||X theta* - y||
    bool zero_residual() const { return zero_residual_; }

    // Full summary; r is undefined when the residual vanishes.
    const SpectralSummary& spectral() const {
        if (zero_residual_)
            throw ZeroResidual("residual ratio r(y) undefined: least-squares residual is zero");
        return summary_;
    }

    // f and f_per_column never depend on the residual.
    std::pair<double, Eigen::VectorXd> leverage_floor() const {
        return {summary_.f, summary_.f_per_column};
    }

    friend Dataset validate_dataset(Eigen::MatrixXd X, Eigen::VectorXd y);

  private:
    Dataset() = default;

    Eigen::MatrixXd X_;
    Eigen::VectorXd y_;
    Eigen::VectorXd theta_star_;
    double fitted_norm_ = 0.0;
    double residual_norm_ = 0.0;
    bool zero_residual_ = false;
    SpectralSummary summary_;
};

// Checks shape, the |X_ij| <= 1 entry bound and full column rank, then caches
// the SVD-derived functionals. Rank rule: singular values above
// max(n,d) * machine_eps * sigma_max count toward the rank.
inline Dataset validate_dataset(Eigen::MatrixXd X, Eigen::VectorXd y) {
    const Eigen::Index n = X.rows(), d = X.cols();
    if (n == 0 || d == 0)
        throw ShapeError("empty data matrix");
    if (y.size() != n)
        throw ShapeError("response length " + std::to_string(y.size()) +
                         " does not match row count " + std::to_string(n));
    if (n <= d)
        throw ShapeError("need more rows than features: n=" + std::to_string(n) +
                         ", d=" + std::to_string(d));
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            if (!(std::abs(X(i, j)) <= 1.0))
                throw EntryOutOfRange("|X(" + std::to_string(i) + "," + std::to_string(j) +
                                      ")| = " + std::to_string(std::abs(X(i, j))) + " exceeds 1");

    Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd sv = svd.singularValues();
    const double cutoff =
        static_cast<double>(std::max(n, d)) * std::numeric_limits<double>::epsilon() * sv(0);
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    if (rank < d)
        throw RankDeficient("numerical rank " + std::to_string(rank) + " < d=" + std::to_string(d));

    Dataset ds;
    ds.X_ = std::move(X);
    ds.y_ = std::move(y);
    ds.theta_star_ =
        svd.matrixV() * (svd.matrixU().transpose() * ds.y_).cwiseQuotient(sv);
    const Eigen::VectorXd fit = ds.X_ * ds.theta_star_;
    ds.fitted_norm_ = fit.norm();
    ds.residual_norm_ = (fit - ds.y_).norm();
    ds.zero_residual_ = ds.residual_norm_ <= 1e-12 * std::max(1.0, ds.y_.norm());

    SpectralSummary& s = ds.summary_;
    s.singular_values = sv;
    s.sigma_max = sv(0);
    s.sigma_min = sv(d - 1);
    s.kappa = s.sigma_max / s.sigma_min;
    s.r = ds.zero_residual_ ? std::numeric_limits<double>::quiet_NaN()
                            : ds.fitted_norm_ / ds.residual_norm_;
    s.f_per_column.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const auto col = ds.X_.col(j).array();
        const double fsq = col.square().sum() - col.square().maxCoeff();
        s.f_per_column(j) = std::sqrt(std::max(0.0, fsq));
    }
    s.f = s.f_per_column.minCoeff();
    return ds;
}

inline const SpectralSummary& spectral_summary(const Dataset& ds) { return ds.spectral(); }

inline std::pair<double, Eigen::VectorXd> column_leverage_floor(const Dataset& ds) {
    return ds.leverage_floor();
}

}  // namespace privreg
