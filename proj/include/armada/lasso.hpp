#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "armada/dataset.hpp"

namespace armada {

struct LassoFit {
    std::vector<double> lambda_path;   // decreasing
    Eigen::MatrixXd coefficients;      // p x n_lambda, input scale
    Eigen::VectorXd intercepts;        // n_lambda
    std::vector<double> cv_mean;       // per-lambda CV error (empty without CV)
    std::vector<double> cv_sd;
    double chosen_lambda = 0.0;
    int chosen_index = -1;
    bool irls_diverged = false;        // logistic path hit a diverging lambda

    std::vector<int> nonzero_at(int lambda_index, double tol = 0.0) const;
};

struct LassoOptions {
    int n_lambda = 100;
    double lambda_min_ratio = 1e-3;
    double tol = 1e-9;        // coordinate-descent stopping, standardized scale
    int max_passes = 2000;
    int max_irls = 50;
};

// Coordinate descent over a fixed lambda path with warm starts. x columns are
// standardized internally; coefficients are reported on the input scale.
LassoFit lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ResponseKind kind,
                    const std::vector<double>& lambdas, const LassoOptions& opts = {});

std::vector<double> default_lambda_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        ResponseKind kind, const LassoOptions& opts = {});

// Full path + k-fold cross-validation (error-minimizing lambda rule;
// stratified folds for a binary response).
LassoFit lasso_cv(const Eigen::MatrixXd& x, const ResponseVariable& y, int folds, std::uint64_t seed,
                  const LassoOptions& opts = {});

// Indices of nonzero coefficients at the CV-chosen lambda.
std::vector<int> lasso_select(const Eigen::MatrixXd& x, const ResponseVariable& y, int folds,
                              std::uint64_t seed, const LassoOptions& opts = {});

std::string lasso_fit_to_json(const LassoFit& fit);

}  // namespace armada
