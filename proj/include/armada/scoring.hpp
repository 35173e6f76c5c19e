#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "armada/dataset.hpp"
#include "armada/multiple_testing.hpp"

namespace armada {

enum class MethodKind {
    Bonferroni,
    BH,
    QValue,
    LocalFDR,
    FactorAdjusted,
    Lasso,
    ForestThreshold,
    ForestInterpret,
};

struct MethodSpec {
    MethodKind kind = MethodKind::BH;
    double alpha = 0.05;  // selection cut for adjusted values
    int folds = 10;       // lasso CV
    int n_trees = 500;
    int mtry = 0;         // 0 = forest default
    int q_max = 15;       // factor-adjusted refit
};

struct MethodBank {
    std::vector<MethodSpec> methods;

    int size() const { return static_cast<int>(methods.size()); }
    // The paper's eight methods: five multiple-testing procedures on the
    // matching univariate test, the penalized regression, and the two forest
    // steps. Identical composition for both response kinds; the underlying
    // test, loss and forest type follow the response.
    static MethodBank default_bank();
};

std::string method_kind_name(MethodKind kind);
MethodKind method_kind_from_name(const std::string& name);

struct ScoreVector {
    std::vector<int> scores;                    // 0..L per covariate
    std::vector<std::vector<char>> per_method;  // L x p selection flags
    std::vector<std::string> method_names;      // L
    std::vector<std::string> covariate_names;   // p
    std::vector<double> tiebreak_pvalues;       // raw p-values of the first test method
    int chosen_k = 0;                           // cluster count actually used

    int L() const { return static_cast<int>(per_method.size()); }
};

struct PipelineOptions {
    int q_max = 15;
    int stability_b = 20;  // bootstrap hierarchies when k is absent
    int k_max = 10;
};

struct PipelineResult {
    ScoreVector scores;
    Partition partition;
    CorrectedDataset corrected;
    std::optional<StabilityCurve> stability;  // present when k was auto-selected
};

// Full pipeline: clustering (stability-selected K when absent), per-cluster
// factor correction, then every bank method on the corrected data.
PipelineResult armada_pipeline(const Dataset& d, std::optional<int> k, const MethodBank& bank,
                               std::uint64_t seed, const PipelineOptions& opts = {});

ScoreVector armada_scores(const Dataset& d, std::optional<int> k, const MethodBank& bank,
                          std::uint64_t seed, const PipelineOptions& opts = {});

// Bank methods applied to an already-corrected dataset.
ScoreVector score_corrected(const CorrectedDataset& corrected, const MethodBank& bank,
                            std::uint64_t seed);

std::vector<int> select(const ScoreVector& s, int threshold = 1);
std::vector<int> rank(const ScoreVector& s);

void scores_to_tsv(const ScoreVector& s, const std::string& path);

}  // namespace armada
