#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "armada/types.hpp"

namespace armada {

enum class ResponseKind { Binary, Continuous };

struct ResponseVariable {
    ResponseKind kind = ResponseKind::Binary;
    Eigen::VectorXd values;  // Binary encoded 0/1

    // Enforces the class/support requirements (Binary: both classes with at
    // least 2 samples; Continuous: at least 3 distinct values).
    void validate() const;
    Eigen::Index n() const { return values.size(); }
};

// Samples are rows, covariates are columns, everywhere.
struct Dataset {
    Eigen::MatrixXd matrix;                    // n x p
    std::vector<std::string> covariate_names;  // p labels, unique
    ResponseVariable response;
    std::vector<std::string> sample_ids;       // n labels

    Eigen::Index n() const { return matrix.rows(); }
    Eigen::Index p() const { return matrix.cols(); }

    // Full pipeline-entry validation: n >= 4, p >= 2, unique names, response
    // invariants. load_csv accepts smaller frames; this gate runs before any
    // statistical work.
    void validate() const;
};

struct StandardizedMatrix {
    Eigen::MatrixXd values;       // each column: mean 0, sd 1 (n-1 denominator)
    Eigen::VectorXd column_means;
    Eigen::VectorXd column_sds;   // all > 0

    Eigen::Index n() const { return values.rows(); }
    Eigen::Index p() const { return values.cols(); }
};

struct CsvOptions {
    bool first_column_is_id = true;
    char decimal_point = '.';   // fixed; field kept for documentation
};

Dataset load_csv(const std::string& path, const std::string& response_column,
                 ResponseKind response_kind, const CsvOptions& opts = {});

void save_csv(const Dataset& d, const std::string& path, const std::string& response_column);

// Column-affine standardization; throws data_error naming any constant column.
StandardizedMatrix standardize(const Eigen::MatrixXd& matrix,
                               const std::vector<std::string>* names = nullptr);
StandardizedMatrix standardize(const Dataset& d);

// Unbiased (n-1 denominator) column moments.
double column_mean(const Eigen::VectorXd& x);
double column_sd(const Eigen::VectorXd& x);

}  // namespace armada
