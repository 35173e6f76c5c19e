#include "armada/scoring.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

#include "armada/covclust.hpp"
#include "armada/factor_model.hpp"
#include "armada/forest.hpp"
#include "armada/lasso.hpp"
#include "armada/parallel.hpp"
#include "armada/rng.hpp"
#include "armada/types.hpp"

namespace armada {

MethodBank MethodBank::default_bank() {
    MethodBank bank;
    bank.methods = {
        {MethodKind::Bonferroni}, {MethodKind::BH},    {MethodKind::QValue},
        {MethodKind::LocalFDR},   {MethodKind::FactorAdjusted}, {MethodKind::Lasso},
        {MethodKind::ForestThreshold}, {MethodKind::ForestInterpret},
    };
    return bank;
}

std::string method_kind_name(MethodKind kind) {
    switch (kind) {
        case MethodKind::Bonferroni: return "bonferroni";
        case MethodKind::BH: return "bh";
        case MethodKind::QValue: return "qvalue";
        case MethodKind::LocalFDR: return "local_fdr";
        case MethodKind::FactorAdjusted: return "factor_adjusted";
        case MethodKind::Lasso: return "lasso";
        case MethodKind::ForestThreshold: return "forest_threshold";
        case MethodKind::ForestInterpret: return "forest_interpret";
    }
    return "unknown";
}

MethodKind method_kind_from_name(const std::string& name) {
    for (MethodKind kind : {MethodKind::Bonferroni, MethodKind::BH, MethodKind::QValue,
                            MethodKind::LocalFDR, MethodKind::FactorAdjusted, MethodKind::Lasso,
                            MethodKind::ForestThreshold, MethodKind::ForestInterpret}) {
        if (method_kind_name(kind) == name) return kind;
    }
    throw data_error("unknown method name: " + name);
}

namespace {

std::vector<char> run_method(const MethodSpec& spec, const CorrectedDataset& corrected,
                             const PValueVector& raw_pv, std::uint64_t method_seed) {
    const std::size_t p = static_cast<std::size_t>(corrected.p());
    std::vector<char> selected(p, 0);

    auto select_by_threshold = [&](const std::vector<double>& values) {
        for (std::size_t i = 0; i < p; ++i) selected[i] = values[i] <= spec.alpha ? 1 : 0;
    };

    switch (spec.kind) {
        case MethodKind::Bonferroni:
            select_by_threshold(bonferroni(raw_pv).values);
            break;
        case MethodKind::BH:
            select_by_threshold(benjamini_hochberg(raw_pv).values);
            break;
        case MethodKind::QValue:
            select_by_threshold(storey_qvalue(raw_pv).values);
            break;
        case MethodKind::LocalFDR:
            select_by_threshold(local_fdr(raw_pv).values);
            break;
        case MethodKind::FactorAdjusted: {
            // Per cluster on the corrected data; the selections are unioned.
            const auto clusters = corrected.partition.clusters();
            for (const auto& members : clusters) {
                Eigen::MatrixXd sub(corrected.n(), static_cast<Eigen::Index>(members.size()));
                std::vector<std::string> names;
                names.reserve(members.size());
                for (std::size_t j = 0; j < members.size(); ++j) {
                    sub.col(static_cast<Eigen::Index>(j)) = corrected.matrix.col(members[j]);
                    names.push_back(corrected.covariate_names[static_cast<std::size_t>(members[j])]);
                }
                const AdjustedPValues adj =
                    factor_adjusted_selection(sub, corrected.response, spec.q_max, names);
                for (std::size_t j = 0; j < members.size(); ++j) {
                    if (adj.values[j] <= spec.alpha) selected[static_cast<std::size_t>(members[j])] = 1;
                }
            }
            break;
        }
        case MethodKind::Lasso: {
            for (int j : lasso_select(corrected.matrix, corrected.response, spec.folds, method_seed)) {
                selected[static_cast<std::size_t>(j)] = 1;
            }
            break;
        }
        case MethodKind::ForestThreshold: {
            const ForestImportance imp = grow_forest(corrected.matrix, corrected.response,
                                                     spec.n_trees, spec.mtry, method_seed);
            for (int j : forest_threshold_step(imp)) selected[static_cast<std::size_t>(j)] = 1;
            break;
        }
        case MethodKind::ForestInterpret: {
            // Fresh forest for this step; the threshold retention feeds the
            // nested-model search.
            const ForestImportance imp = grow_forest(corrected.matrix, corrected.response,
                                                     spec.n_trees, spec.mtry, method_seed);
            const std::vector<int> retained = forest_threshold_step(imp);
            ForestOptions opts{spec.n_trees, spec.mtry, 0};
            for (int j : forest_interpret_step(corrected.matrix, corrected.response, retained,
                                               derive_seed(method_seed, "nested"), opts)) {
                selected[static_cast<std::size_t>(j)] = 1;
            }
            break;
        }
    }
    return selected;
}

}  // namespace

ScoreVector score_corrected(const CorrectedDataset& corrected, const MethodBank& bank,
                            std::uint64_t seed) {
    if (bank.size() < 1) throw data_error("method bank is empty");
    const std::size_t p = static_cast<std::size_t>(corrected.p());
    const PValueVector raw_pv = raw_pvalues(corrected);

    ScoreVector out;
    out.covariate_names = corrected.covariate_names;
    out.tiebreak_pvalues = raw_pv.values;
    out.chosen_k = corrected.partition.k;
    out.per_method.resize(static_cast<std::size_t>(bank.size()));
    out.method_names.resize(static_cast<std::size_t>(bank.size()));

    parallel_for(static_cast<std::size_t>(bank.size()), [&](std::size_t m) {
        const MethodSpec& spec = bank.methods[m];
        out.method_names[m] = method_kind_name(spec.kind);
        out.per_method[m] = run_method(spec, corrected, raw_pv,
                                       derive_seed(seed, "bank." + method_kind_name(spec.kind), m));
    });

    out.scores.assign(p, 0);
    for (const auto& flags : out.per_method) {
        for (std::size_t i = 0; i < p; ++i) out.scores[i] += flags[i];
    }
    return out;
}

PipelineResult armada_pipeline(const Dataset& d, std::optional<int> k, const MethodBank& bank,
                               std::uint64_t seed, const PipelineOptions& opts) {
    d.validate();
    const StandardizedMatrix std_matrix = standardize(d);

    PipelineResult result;
    int chosen_k;
    if (k) {
        if (*k < 1 || *k > d.p()) throw data_error("cluster count out of range 1.." + std::to_string(d.p()));
        chosen_k = *k;
    } else {
        const int k_max = std::min<int>(opts.k_max, static_cast<int>(d.p()) - 1);
        result.stability =
            stability_select_k(std_matrix, opts.stability_b, k_max, derive_seed(seed, "stability"));
        chosen_k = result.stability->chosen_k;
    }

    result.partition = hierarchical_cluster(std_matrix, chosen_k);
    result.corrected = pretreat(d, result.partition, opts.q_max);
    result.scores = score_corrected(result.corrected, bank, seed);
    return result;
}

ScoreVector armada_scores(const Dataset& d, std::optional<int> k, const MethodBank& bank,
                          std::uint64_t seed, const PipelineOptions& opts) {
    return armada_pipeline(d, k, bank, seed, opts).scores;
}

std::vector<int> select(const ScoreVector& s, int threshold) {
    if (threshold < 0 || threshold > s.L()) {
        throw data_error("select: threshold out of range 0.." + std::to_string(s.L()));
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        if (s.scores[i] >= threshold) out.push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> rank(const ScoreVector& s) {
    std::vector<int> order(s.scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (s.scores[static_cast<std::size_t>(a)] != s.scores[static_cast<std::size_t>(b)]) {
            return s.scores[static_cast<std::size_t>(a)] > s.scores[static_cast<std::size_t>(b)];
        }
        const double pa = s.tiebreak_pvalues[static_cast<std::size_t>(a)];
        const double pb = s.tiebreak_pvalues[static_cast<std::size_t>(b)];
        if (pa != pb) return pa < pb;
        return a < b;
    });
    return order;
}

void scores_to_tsv(const ScoreVector& s, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "name\tscore";
    for (const auto& name : s.method_names) out << '\t' << name;
    out << '\n';
    for (std::size_t i = 0; i < s.scores.size(); ++i) {
        out << s.covariate_names[i] << '\t' << s.scores[i];
        for (const auto& flags : s.per_method) out << '\t' << static_cast<int>(flags[i]);
        out << '\n';
    }
}

}  // namespace armada
