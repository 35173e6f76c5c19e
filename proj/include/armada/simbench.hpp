#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "armada/dataset.hpp"
#include "armada/scoring.hpp"

namespace armada {

enum class DesignKind { MainClassification, MixtureClassification, Regression };

struct SimDesign {
    DesignKind kind = DesignKind::MainClassification;
    int n = 60;
    int n_clusters = 4;
    int p_per_cluster = 400;
    std::vector<int> q_per_cluster = {4, 6, 8, 10};
    double comvar = 0.8;
    // Marginal sd of the pre-shift covariates. The classification tables are
    // only reproducible at 1.25, the regression table at 1.0; ComVar is
    // scale-free so both keep the 0.8 target.
    double marginal_sd = 1.22;

    int p() const { return n_clusters * p_per_cluster; }
    std::vector<char> truth() const;              // influential covariate flags
    std::vector<std::string> group_names() const; // effect groups plus "-" for noise
    int group_of(int covariate) const;            // index into group_names()

    static SimDesign main_classification();
    static SimDesign mixture_classification();
    static SimDesign regression();
    static SimDesign from_name(const std::string& name);
    std::string name() const;
};

// Latent-factor cluster draw: unit marginal variance, every covariate at the
// target common-variance fraction.
Eigen::MatrixXd simulate_cluster(int p_k, int q_k, double comvar, int n, std::uint64_t seed);

struct SimulatedData {
    Dataset dataset;
    std::vector<char> truth;
};
SimulatedData simulate_design(const SimDesign& design, std::uint64_t seed);

// Wilcoxon/Pearson at p <= 0.05 after: (1) nothing, (2) one global factor
// correction, (3) clustering then per-cluster correction.
struct PretreatComparison {
    std::array<std::vector<int>, 3> tp;  // per procedure, per run
    std::array<std::vector<int>, 3> fp;
};
PretreatComparison compare_pretreatments(const SimDesign& design, int n_runs, std::uint64_t seed,
                                         int q_max = 15);

struct GroupRateTable {
    std::vector<std::string> groups;
    std::vector<double> mean;
    std::vector<double> sd;
};

struct RocCurve {
    std::vector<double> fpr;  // shared grid
    std::vector<double> tpr;  // mean sensitivity over runs
};

struct BenchmarkReport {
    SimDesign design;
    int n_runs = 0;
    std::vector<std::string> method_names;       // ARMADA, RawTest, FactorAdjusted
    std::vector<GroupRateTable> rates;           // per method
    std::vector<RocCurve> mean_roc;              // per method
    std::vector<std::vector<int>> tp;            // per method, per run
    std::vector<std::vector<int>> fp;
    std::vector<double> mean_runtime_seconds;    // per method
    double noise_score_zero_fraction = 0.0;      // ARMADA noise covariates scoring exactly 0
    std::vector<double> mean_scores;             // per covariate, ARMADA, over runs
    std::vector<std::vector<double>> scores_by_group;  // pooled ARMADA scores per group
};

BenchmarkReport run_benchmark(const SimDesign& design, int n_runs, std::uint64_t seed,
                              const MethodBank& bank = MethodBank::default_bank(), int q_max = 15,
                              int score_threshold = 1);

struct BootstrapScores {
    std::vector<double> mean_scores;    // per covariate, over replicates
    std::vector<double> median_scores;
    int replicates = 0;
};

BootstrapScores bootstrap_scores(const Dataset& d, int b, const MethodBank& bank, std::uint64_t seed,
                                 std::optional<int> k = std::nullopt);

void rates_to_tsv(const BenchmarkReport& report, const std::string& path);
void roc_to_csv(const BenchmarkReport& report, const std::string& path);
void tp_fp_to_csv(const PretreatComparison& cmp, const std::string& path);

}  // namespace armada
