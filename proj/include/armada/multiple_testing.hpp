#pragma once

#include <optional>
#include <string>
#include <vector>

#include "armada/assoc_tests.hpp"

namespace armada {

enum class AdjustMethod { Bonferroni, BH, QValue, LocalFDR, FactorAdjusted };

struct AdjustedPValues {
    AdjustMethod method = AdjustMethod::Bonferroni;
    std::vector<double> values;      // adjusted p-values (LocalFDR: lfdr estimates)
    std::optional<double> pi0_hat;
    bool fallback_null = false;      // LocalFDR fell back to the theoretical N(0,1) null
};

AdjustedPValues bonferroni(const PValueVector& p);
AdjustedPValues benjamini_hochberg(const PValueVector& p);

std::vector<double> default_lambda_grid();  // 0.05..0.95 step 0.05
AdjustedPValues storey_qvalue(const PValueVector& p, const std::vector<double>& lambda_grid = default_lambda_grid());

// Efron-style local fdr: z = Phi^-1(1-p), Poisson-regression density fit
// (120 bins, degree-7 polynomial), empirical null by central matching.
AdjustedPValues local_fdr(const PValueVector& p);

// FAMT-style route on one cluster: refit the factor model, decorrelate,
// test, then BH within the cluster.
AdjustedPValues factor_adjusted_selection(const Eigen::MatrixXd& cluster, const ResponseVariable& y,
                                          int q_max, const std::vector<std::string>& names);

void adjusted_to_csv(const AdjustedPValues& adj, const std::vector<std::string>& names,
                     const std::string& path);
std::string adjust_method_name(AdjustMethod method);

}  // namespace armada
