#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "armada/covclust.hpp"
#include "armada/dataset.hpp"

namespace armada {

// Latent factor model of one cluster, fitted conditionally on the response:
// X_i = delta_i(Y) + b_i Z + eps_i, with Z the q latent factors.
struct FactorModel {
    int q = 0;
    Eigen::MatrixXd loadings;            // p_k x q
    Eigen::VectorXd specific_variances;  // p_k, floored at 1e-6 x column variance
    Eigen::MatrixXd factor_scores;       // n x q posterior means
    Eigen::MatrixXd response_effects;    // p_k x 2, (intercept, slope) on (1, Y)
    double common_variance = 0.0;        // trace(BB') / trace(BB' + Psi)
    bool converged = true;
    double log_likelihood = 0.0;
    std::vector<double> ll_trace;        // observed-data log-likelihood per EM step
};

struct CorrectedDataset {
    Eigen::MatrixXd matrix;  // n x p, factor contribution removed per cluster
    Partition partition;
    std::vector<FactorModel> models;  // one per cluster label
    ResponseVariable response;
    std::vector<std::string> covariate_names;

    Eigen::Index n() const { return matrix.rows(); }
    Eigen::Index p() const { return matrix.cols(); }
};

// EM fit on the residuals of the cluster regressed on (1, Y). q = 0 returns
// an empty loading matrix with Psi equal to the residual variances.
FactorModel fit_factor_model(const Eigen::MatrixXd& cluster, const ResponseVariable& y, int q,
                             int max_iter = 200, double rel_tol = 1e-6);

// Scans q = 0..q_max and picks the smallest q whose residual-correlation
// criterion is within 5% of the minimum.
int select_num_factors(const Eigen::MatrixXd& cluster, const ResponseVariable& y, int q_max);

// X* = X - Z B' columnwise; the delta(Y) signal stays in.
Eigen::MatrixXd decorrelate(const Eigen::MatrixXd& cluster, const FactorModel& model);

double common_variance(const FactorModel& model);

// Per-cluster q selection, fit and correction; clusters reassembled in the
// original column order.
CorrectedDataset pretreat(const Dataset& d, const Partition& partition, int q_max);

std::string factor_model_to_json(const FactorModel& model);

// n x mean squared off-diagonal correlation; the q-selection criterion.
double residual_correlation_energy(const Eigen::MatrixXd& corrected);

}  // namespace armada
