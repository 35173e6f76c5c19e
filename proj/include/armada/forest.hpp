#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "armada/dataset.hpp"

namespace armada {

struct ForestOptions {
    int n_trees = 500;
    int mtry = 0;           // 0 = floor(sqrt(p)) for Binary, floor(p/3) for Continuous
    int min_node_size = 0;  // 0 = 1 for Binary, 5 for Continuous
};

struct ForestImportance {
    Eigen::VectorXd importances;     // mean OOB permutation importance over trees
    Eigen::VectorXd importance_sds;  // sd over trees
    int n_trees = 0;
    int mtry = 0;
    double oob_error = 0.0;     // misclassification rate (Binary) or MSE (Continuous)
    double oob_error_se = 0.0;
};

ForestImportance grow_forest(const Eigen::MatrixXd& x, const ResponseVariable& y, int n_trees,
                             int mtry, std::uint64_t seed, int min_node_size = 0);

// Forest restricted to a feature subset; importance skipped, OOB error only.
void forest_oob_error(const Eigen::MatrixXd& x, const ResponseVariable& y,
                      const std::vector<int>& features, const ForestOptions& opts, std::uint64_t seed,
                      double* error, double* error_se);

// Retains covariates whose mean importance reaches the minimum predicted
// value of a regression tree fitted to the importance standard deviations in
// decreasing-importance order. Result is ordered by decreasing importance.
std::vector<int> forest_threshold_step(const ForestImportance& imp);

// Nested-forest OOB minimization over the top-j retained covariates
// (j = 1..|retained|, capped at 100 models).
std::vector<int> forest_interpret_step(const Eigen::MatrixXd& x, const ResponseVariable& y,
                                       const std::vector<int>& retained_ordered, std::uint64_t seed,
                                       const ForestOptions& opts = {});

void importance_to_csv(const ForestImportance& imp, const std::vector<std::string>& names,
                       const std::string& path);

}  // namespace armada
