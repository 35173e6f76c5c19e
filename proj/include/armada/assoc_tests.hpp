#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "armada/dataset.hpp"
#include "armada/factor_model.hpp"

namespace armada {

enum class TestKind { Wilcoxon, PearsonCor };

struct PValueVector {
    std::vector<double> values;  // in [0,1]
    TestKind test_kind = TestKind::Wilcoxon;
    std::vector<std::string> covariate_names;
};

// Two-sided rank-sum test. Exact enumeration for n <= 20 without ties,
// otherwise normal approximation with midranks, tie correction and
// continuity correction.
double wilcoxon_rank_sum(const Eigen::VectorXd& x, const Eigen::VectorXd& y01);

// Two-sided test of zero correlation via t = r sqrt((n-2)/(1-r^2)).
double pearson_cor_test(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

PValueVector raw_pvalues(const Eigen::MatrixXd& matrix, const ResponseVariable& response,
                         const std::vector<std::string>& names);
PValueVector raw_pvalues(const CorrectedDataset& cd);

void pvalues_to_csv(const PValueVector& pv, const std::string& path);

}  // namespace armada
