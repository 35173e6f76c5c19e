#include "armada/simbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "armada/assoc_tests.hpp"
#include "armada/covclust.hpp"
#include "armada/factor_model.hpp"
#include "armada/parallel.hpp"
#include "armada/rng.hpp"
#include "armada/special.hpp"
#include "armada/types.hpp"

namespace armada {

SimDesign SimDesign::main_classification() { return SimDesign{}; }

SimDesign SimDesign::mixture_classification() {
    SimDesign d;
    d.kind = DesignKind::MixtureClassification;
    return d;
}

SimDesign SimDesign::regression() {
    SimDesign d;
    d.kind = DesignKind::Regression;
    d.marginal_sd = 1.0;
    return d;
}

SimDesign SimDesign::from_name(const std::string& name) {
    if (name == "main") return main_classification();
    if (name == "mixture") return mixture_classification();
    if (name == "regression") return regression();
    throw data_error("unknown design: " + name + " (expected main|mixture|regression)");
}

std::string SimDesign::name() const {
    switch (kind) {
        case DesignKind::MainClassification: return "main";
        case DesignKind::MixtureClassification: return "mixture";
        case DesignKind::Regression: return "regression";
    }
    return "unknown";
}

namespace {

int influential_per_cluster(DesignKind kind) {
    switch (kind) {
        case DesignKind::MainClassification: return 40;
        case DesignKind::MixtureClassification: return 60;
        case DesignKind::Regression: return 5;
    }
    return 0;
}

}  // namespace

std::vector<char> SimDesign::truth() const {
    std::vector<char> t(static_cast<std::size_t>(p()), 0);
    const int m1 = influential_per_cluster(kind);
    for (int k = 0; k < n_clusters; ++k) {
        for (int i = 0; i < m1; ++i) t[static_cast<std::size_t>(k * p_per_cluster + i)] = 1;
    }
    return t;
}

std::vector<std::string> SimDesign::group_names() const {
    switch (kind) {
        case DesignKind::MainClassification: return {"1.5", "1", "0.75", "0.5", "-"};
        case DesignKind::MixtureClassification:
            return {"(0.7-3)", "(0.7-2)", "(0.7-1)", "(0.3-3)", "(0.3-2)", "(0.3-1)", "-"};
        case DesignKind::Regression: return {"1", "0.8", "0.6", "0.4", "0.2", "-"};
    }
    return {};
}

int SimDesign::group_of(int covariate) const {
    const int within = covariate % p_per_cluster;
    const int m1 = influential_per_cluster(kind);
    const int n_groups = static_cast<int>(group_names().size()) - 1;
    if (within >= m1) return n_groups;  // noise
    const int per_group = m1 / n_groups;
    return within / per_group;
}

Eigen::MatrixXd simulate_cluster(int p_k, int q_k, double comvar, int n, std::uint64_t seed) {
    if (!(comvar > 0.0 && comvar < 1.0)) throw data_error("simulate_cluster: comvar outside (0,1)");
    if (q_k < 1) throw data_error("simulate_cluster: q_k must be >= 1");
    Rng rng(seed);

    // Loadings: Gaussian rows rescaled to ||b_i||^2 = comvar, with unit
    // specific variances scaled to 1 - comvar, so every covariate has unit
    // marginal variance and common-variance fraction exactly comvar.
    Eigen::MatrixXd loadings(p_k, q_k);
    for (int i = 0; i < p_k; ++i) {
        for (int j = 0; j < q_k; ++j) loadings(i, j) = rng.normal();
        const double norm = loadings.row(i).norm();
        if (norm > 0.0) {
            loadings.row(i) *= std::sqrt(comvar) / norm;
        } else {
            loadings.row(i).setZero();
            loadings(i, 0) = std::sqrt(comvar);
        }
    }
    Eigen::MatrixXd factors(n, q_k);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < q_k; ++j) factors(i, j) = rng.normal();
    }
    const double noise_sd = std::sqrt(1.0 - comvar);
    Eigen::MatrixXd x = factors * loadings.transpose();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p_k; ++j) x(i, j) += noise_sd * rng.normal();
    }
    return x;
}

SimulatedData simulate_design(const SimDesign& design, std::uint64_t seed) {
    const int n = design.n;
    const int p = design.p();

    SimulatedData out;
    out.truth = design.truth();
    Dataset& d = out.dataset;
    d.matrix.resize(n, p);
    for (int k = 0; k < design.n_clusters; ++k) {
        d.matrix.middleCols(k * design.p_per_cluster, design.p_per_cluster) =
            design.marginal_sd *
            simulate_cluster(design.p_per_cluster, design.q_per_cluster[static_cast<std::size_t>(k)],
                             design.comvar, n,
                             derive_seed(seed, "design.cluster", static_cast<std::uint64_t>(k)));
    }

    d.covariate_names.reserve(static_cast<std::size_t>(p));
    for (int j = 1; j <= p; ++j) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "V%04d", j);
        d.covariate_names.emplace_back(buf);
    }
    d.sample_ids.reserve(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "S%03d", i);
        d.sample_ids.emplace_back(buf);
    }

    if (design.kind == DesignKind::Regression) {
        Rng rng(derive_seed(seed, "design.response"));
        d.response.kind = ResponseKind::Continuous;
        d.response.values.resize(n);
        for (int i = 0; i < n; ++i) d.response.values[i] = rng.normal();
        static const double deltas[5] = {1.0, 0.8, 0.6, 0.4, 0.2};
        for (int k = 0; k < design.n_clusters; ++k) {
            for (int i = 0; i < 5; ++i) {
                d.matrix.col(k * design.p_per_cluster + i) += deltas[i] * d.response.values;
            }
        }
        return out;
    }

    // Balanced two-class response: first half Y=1, second half Y=0.
    d.response.kind = ResponseKind::Binary;
    d.response.values.resize(n);
    for (int i = 0; i < n; ++i) d.response.values[i] = i < n / 2 ? 1.0 : 0.0;

    if (design.kind == DesignKind::MainClassification) {
        static const double levels[4] = {1.5, 1.0, 0.75, 0.5};
        for (int k = 0; k < design.n_clusters; ++k) {
            for (int i = 0; i < 40; ++i) {
                const double delta = levels[i / 10];
                for (int s = 0; s < n; ++s) {
                    if (d.response.values[s] == 0.0) d.matrix(s, k * design.p_per_cluster + i) += delta;
                }
            }
        }
        return out;
    }

    // Mixture design: per-sample random shift, mixture weight and mean level
    // by group of ten covariates.
    static const std::pair<double, double> mixture[6] = {
        {0.7, 3.0}, {0.7, 2.0}, {0.7, 1.0}, {0.3, 3.0}, {0.3, 2.0}, {0.3, 1.0}};
    for (int k = 0; k < design.n_clusters; ++k) {
        Rng rng(derive_seed(seed, "design.shift", static_cast<std::uint64_t>(k)));
        for (int i = 0; i < 60; ++i) {
            const auto [weight, level] = mixture[i / 10];
            for (int s = 0; s < n; ++s) {
                const double y = d.response.values[s];
                const double mean = rng.uniform() < weight ? level * y : 0.0;
                d.matrix(s, k * design.p_per_cluster + i) += mean + rng.normal();
            }
        }
    }
    return out;
}

namespace {

struct Counts {
    int tp = 0, fp = 0;
};

Counts count_tp_fp(const std::vector<char>& selected, const std::vector<char>& truth) {
    Counts c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (selected[i]) {
            (truth[i] ? c.tp : c.fp)++;
        }
    }
    return c;
}

// The benchmark's factor-adjusted competitor mirrors the reference
// procedure's statistic: one global factor model, t statistics of the
// adjusted effects against the specific variances, then BH.
std::vector<double> parametric_factor_adjusted_pvalues(const Dataset& d, int q_max) {
    const int cap = static_cast<int>(std::min<Eigen::Index>(d.n() - 2, d.p() - 1));
    const int q = select_num_factors(d.matrix, d.response, std::max(0, std::min(q_max, cap)));
    const FactorModel model = fit_factor_model(d.matrix, d.response, q);
    const Eigen::VectorXd& y = d.response.values;
    const double y_ss = (y.array() - y.mean()).square().sum();
    const double df = static_cast<double>(d.n() - 2);
    std::vector<double> pvalues(static_cast<std::size_t>(d.p()));
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        const double t = model.response_effects(j, 1) / std::sqrt(model.specific_variances[j] / y_ss);
        pvalues[static_cast<std::size_t>(j)] = clamp_pvalue(student_t_two_sided(t, df));
    }
    return pvalues;
}

Partition single_cluster_partition(int p) {
    Partition part;
    part.k = 1;
    part.labels.assign(static_cast<std::size_t>(p), 1);
    part.homogeneity = 0.0;
    return part;
}

std::vector<char> pvalue_selection(const PValueVector& pv, double alpha) {
    std::vector<char> sel(pv.values.size(), 0);
    for (std::size_t i = 0; i < pv.values.size(); ++i) sel[i] = pv.values[i] <= alpha ? 1 : 0;
    return sel;
}

}  // namespace

PretreatComparison compare_pretreatments(const SimDesign& design, int n_runs, std::uint64_t seed,
                                         int q_max) {
    if (n_runs < 1) throw data_error("compare_pretreatments: n_runs must be >= 1");
    PretreatComparison cmp;
    for (auto& v : cmp.tp) v.assign(static_cast<std::size_t>(n_runs), 0);
    for (auto& v : cmp.fp) v.assign(static_cast<std::size_t>(n_runs), 0);

    parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t r) {
        const SimulatedData sim = simulate_design(design, derive_seed(seed, "bench.run", r));
        const Dataset& d = sim.dataset;

        // Procedure 1: raw data.
        {
            const Counts c = count_tp_fp(pvalue_selection(raw_pvalues(d.matrix, d.response, d.covariate_names), 0.05),
                                         sim.truth);
            cmp.tp[0][r] = c.tp;
            cmp.fp[0][r] = c.fp;
        }
        // Procedure 2: one global factor correction.
        {
            const CorrectedDataset corrected = pretreat(d, single_cluster_partition(design.p()), q_max);
            const Counts c = count_tp_fp(pvalue_selection(raw_pvalues(corrected), 0.05), sim.truth);
            cmp.tp[1][r] = c.tp;
            cmp.fp[1][r] = c.fp;
        }
        // Procedure 3: estimated clusters, correction inside each.
        {
            const Partition part = hierarchical_cluster(standardize(d), design.n_clusters);
            const CorrectedDataset corrected = pretreat(d, part, q_max);
            const Counts c = count_tp_fp(pvalue_selection(raw_pvalues(corrected), 0.05), sim.truth);
            cmp.tp[2][r] = c.tp;
            cmp.fp[2][r] = c.fp;
        }
    });
    return cmp;
}

namespace {

constexpr int kRocGridSize = 101;

// Piecewise-linear interpolation of (fpr, tpr) points onto the shared grid.
std::vector<double> roc_on_grid(std::vector<std::pair<double, double>> points) {
    points.emplace_back(0.0, 0.0);
    points.emplace_back(1.0, 1.0);
    std::sort(points.begin(), points.end());
    std::vector<double> tpr(kRocGridSize, 0.0);
    for (int g = 0; g < kRocGridSize; ++g) {
        const double x = static_cast<double>(g) / (kRocGridSize - 1);
        double y = 0.0;
        for (std::size_t i = 0; i + 1 < points.size(); ++i) {
            if (x >= points[i].first && x <= points[i + 1].first) {
                const double span = points[i + 1].first - points[i].first;
                const double f = span > 0.0 ? (x - points[i].first) / span : 0.0;
                y = std::max(y, points[i].second + f * (points[i + 1].second - points[i].second));
            }
        }
        tpr[static_cast<std::size_t>(g)] = y;
    }
    return tpr;
}

// ROC points from a "smaller is stronger" score vector (p-values).
std::vector<std::pair<double, double>> roc_points_from_pvalues(const std::vector<double>& score,
                                                               const std::vector<char>& truth) {
    const double n_pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
    const double n_neg = static_cast<double>(truth.size()) - n_pos;
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
    std::vector<std::pair<double, double>> points;
    double tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && score[order[j]] == score[order[i]]) {
            (truth[order[j]] ? tp : fp) += 1.0;
            ++j;
        }
        points.emplace_back(fp / n_neg, tp / n_pos);
        i = j;
    }
    return points;
}

// ROC points from the integer ARMADA score: thresholds L+1 .. 0.
std::vector<std::pair<double, double>> roc_points_from_scores(const std::vector<int>& scores, int L,
                                                              const std::vector<char>& truth) {
    const double n_pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
    const double n_neg = static_cast<double>(truth.size()) - n_pos;
    std::vector<std::pair<double, double>> points;
    for (int t = L + 1; t >= 0; --t) {
        double tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= t) (truth[i] ? tp : fp) += 1.0;
        }
        points.emplace_back(fp / n_neg, tp / n_pos);
    }
    return points;
}

}  // namespace

BenchmarkReport run_benchmark(const SimDesign& design, int n_runs, std::uint64_t seed,
                              const MethodBank& bank, int q_max, int score_threshold) {
    if (n_runs < 1) throw data_error("run_benchmark: n_runs must be >= 1");
    BenchmarkReport report;
    report.design = design;
    report.n_runs = n_runs;
    report.method_names = {"ARMADA", "RawTest", "FactorAdjusted"};
    const std::size_t n_methods = report.method_names.size();
    const std::vector<std::string> groups = design.group_names();

    struct RunResult {
        std::array<std::vector<char>, 3> selected;
        std::array<std::vector<double>, 3> roc_tpr;
        std::array<double, 3> seconds{};
        std::vector<int> armada_scores;
    };
    std::vector<RunResult> runs(static_cast<std::size_t>(n_runs));
    const std::vector<char> truth = design.truth();

    parallel_for(static_cast<std::size_t>(n_runs), [&](std::size_t r) {
        const SimulatedData sim = simulate_design(design, derive_seed(seed, "bench.run", r));
        const Dataset& d = sim.dataset;
        RunResult& rr = runs[r];
        using clock = std::chrono::steady_clock;

        {  // ARMADA at the known cluster count.
            const auto t0 = clock::now();
            const ScoreVector scores =
                armada_scores(d, design.n_clusters, bank, derive_seed(seed, "bench.armada", r));
            rr.seconds[0] = std::chrono::duration<double>(clock::now() - t0).count();
            rr.selected[0].assign(scores.scores.size(), 0);
            for (int j : select(scores, score_threshold)) rr.selected[0][static_cast<std::size_t>(j)] = 1;
            rr.roc_tpr[0] = roc_on_grid(roc_points_from_scores(scores.scores, scores.L(), sim.truth));
            rr.armada_scores = scores.scores;
        }
        {  // Raw univariate test at 0.05.
            const auto t0 = clock::now();
            const PValueVector pv = raw_pvalues(d.matrix, d.response, d.covariate_names);
            rr.seconds[1] = std::chrono::duration<double>(clock::now() - t0).count();
            rr.selected[1] = pvalue_selection(pv, 0.05);
            rr.roc_tpr[1] = roc_on_grid(roc_points_from_pvalues(pv.values, sim.truth));
        }
        {  // Global factor-adjusted t statistics, BH at 0.05.
            const auto t0 = clock::now();
            PValueVector pv;
            pv.values = parametric_factor_adjusted_pvalues(d, q_max);
            const AdjustedPValues adj = benjamini_hochberg(pv);
            rr.seconds[2] = std::chrono::duration<double>(clock::now() - t0).count();
            std::vector<char> sel(adj.values.size(), 0);
            for (std::size_t i = 0; i < adj.values.size(); ++i) sel[i] = adj.values[i] <= 0.05 ? 1 : 0;
            rr.selected[2] = std::move(sel);
            rr.roc_tpr[2] = roc_on_grid(roc_points_from_pvalues(adj.values, sim.truth));
        }
    });

    report.rates.resize(n_methods);
    report.mean_roc.resize(n_methods);
    report.tp.assign(n_methods, std::vector<int>(static_cast<std::size_t>(n_runs), 0));
    report.fp.assign(n_methods, std::vector<int>(static_cast<std::size_t>(n_runs), 0));
    report.mean_runtime_seconds.assign(n_methods, 0.0);

    for (std::size_t m = 0; m < n_methods; ++m) {
        // Selection rates pooled over runs and covariates within each group.
        std::vector<double> sum(groups.size(), 0.0);
        std::vector<double> count(groups.size(), 0.0);
        for (int r = 0; r < n_runs; ++r) {
            const auto& sel = runs[static_cast<std::size_t>(r)].selected[m];
            for (int j = 0; j < design.p(); ++j) {
                const int g = design.group_of(j);
                sum[static_cast<std::size_t>(g)] += sel[static_cast<std::size_t>(j)];
                count[static_cast<std::size_t>(g)] += 1.0;
            }
            const Counts c = count_tp_fp(sel, truth);
            report.tp[m][static_cast<std::size_t>(r)] = c.tp;
            report.fp[m][static_cast<std::size_t>(r)] = c.fp;
            report.mean_runtime_seconds[m] += runs[static_cast<std::size_t>(r)].seconds[m];
        }
        report.mean_runtime_seconds[m] /= static_cast<double>(n_runs);
        GroupRateTable table;
        table.groups = groups;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double rate = sum[g] / count[g];
            table.mean.push_back(rate);
            // Sample sd of the pooled selection indicators.
            table.sd.push_back(std::sqrt(rate * (1.0 - rate) * count[g] / (count[g] - 1.0)));
        }
        report.rates[m] = std::move(table);

        RocCurve roc;
        roc.fpr.resize(kRocGridSize);
        roc.tpr.assign(kRocGridSize, 0.0);
        for (int g = 0; g < kRocGridSize; ++g) roc.fpr[static_cast<std::size_t>(g)] = static_cast<double>(g) / (kRocGridSize - 1);
        for (int r = 0; r < n_runs; ++r) {
            for (int g = 0; g < kRocGridSize; ++g) {
                roc.tpr[static_cast<std::size_t>(g)] += runs[static_cast<std::size_t>(r)].roc_tpr[m][static_cast<std::size_t>(g)];
            }
        }
        for (auto& v : roc.tpr) v /= static_cast<double>(n_runs);
        report.mean_roc[m] = std::move(roc);
    }

    // ARMADA score summaries for the figure exports.
    report.mean_scores.assign(static_cast<std::size_t>(design.p()), 0.0);
    report.scores_by_group.assign(groups.size(), {});
    long long noise_zero = 0, noise_total = 0;
    for (int r = 0; r < n_runs; ++r) {
        const auto& scores = runs[static_cast<std::size_t>(r)].armada_scores;
        for (int j = 0; j < design.p(); ++j) {
            report.mean_scores[static_cast<std::size_t>(j)] += scores[static_cast<std::size_t>(j)];
            report.scores_by_group[static_cast<std::size_t>(design.group_of(j))].push_back(
                scores[static_cast<std::size_t>(j)]);
            if (!truth[static_cast<std::size_t>(j)]) {
                ++noise_total;
                if (scores[static_cast<std::size_t>(j)] == 0) ++noise_zero;
            }
        }
    }
    for (auto& v : report.mean_scores) v /= static_cast<double>(n_runs);
    report.noise_score_zero_fraction =
        noise_total > 0 ? static_cast<double>(noise_zero) / static_cast<double>(noise_total) : 0.0;
    return report;
}

BootstrapScores bootstrap_scores(const Dataset& d, int b, const MethodBank& bank, std::uint64_t seed,
                                 std::optional<int> k) {
    if (b < 10) throw data_error("bootstrap_scores: need at least 10 replicates");
    const std::size_t p = static_cast<std::size_t>(d.p());
    std::vector<std::vector<int>> replicate_scores(static_cast<std::size_t>(b));

    std::vector<Eigen::Index> class0, class1;
    if (d.response.kind == ResponseKind::Binary) {
        for (Eigen::Index i = 0; i < d.n(); ++i) {
            (d.response.values[i] == 0.0 ? class0 : class1).push_back(i);
        }
    }

    parallel_for(static_cast<std::size_t>(b), [&](std::size_t r) {
        for (int attempt = 0;; ++attempt) {
            Rng rng(derive_seed(seed, "bootstrap.replicate", r * 16 + static_cast<std::uint64_t>(attempt)));
            std::vector<Eigen::Index> rows;
            rows.reserve(static_cast<std::size_t>(d.n()));
            if (d.response.kind == ResponseKind::Binary) {
                // Stratified by class.
                for (std::size_t i = 0; i < class0.size(); ++i) {
                    rows.push_back(class0[static_cast<std::size_t>(rng.below(class0.size()))]);
                }
                for (std::size_t i = 0; i < class1.size(); ++i) {
                    rows.push_back(class1[static_cast<std::size_t>(rng.below(class1.size()))]);
                }
            } else {
                for (Eigen::Index i = 0; i < d.n(); ++i) {
                    rows.push_back(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(d.n()))));
                }
            }
            Dataset replicate;
            replicate.covariate_names = d.covariate_names;
            replicate.response.kind = d.response.kind;
            replicate.matrix.resize(d.n(), d.p());
            replicate.response.values.resize(d.n());
            replicate.sample_ids.resize(static_cast<std::size_t>(d.n()));
            for (Eigen::Index i = 0; i < d.n(); ++i) {
                replicate.matrix.row(i) = d.matrix.row(rows[static_cast<std::size_t>(i)]);
                replicate.response.values[i] = d.response.values[rows[static_cast<std::size_t>(i)]];
                replicate.sample_ids[static_cast<std::size_t>(i)] =
                    d.sample_ids[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])];
            }
            try {
                const ScoreVector s =
                    armada_scores(replicate, k, bank, derive_seed(seed, "bootstrap.score", r));
                replicate_scores[r] = s.scores;
                return;
            } catch (const data_error&) {
                if (attempt >= 10) throw;  // degenerate replicate, redraw
            }
        }
    });

    BootstrapScores out;
    out.replicates = b;
    out.mean_scores.assign(p, 0.0);
    out.median_scores.assign(p, 0.0);
    std::vector<double> column(static_cast<std::size_t>(b));
    for (std::size_t j = 0; j < p; ++j) {
        for (int r = 0; r < b; ++r) column[static_cast<std::size_t>(r)] = replicate_scores[static_cast<std::size_t>(r)][j];
        out.mean_scores[j] = std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(b);
        std::sort(column.begin(), column.end());
        out.median_scores[j] = b % 2 == 1 ? column[static_cast<std::size_t>(b / 2)]
                                          : 0.5 * (column[static_cast<std::size_t>(b / 2 - 1)] +
                                                   column[static_cast<std::size_t>(b / 2)]);
    }
    return out;
}

void rates_to_tsv(const BenchmarkReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out.precision(17);
    out << "group";
    for (const auto& name : report.method_names) out << '\t' << name << "_mean\t" << name << "_sd";
    out << '\n';
    for (std::size_t g = 0; g < report.rates[0].groups.size(); ++g) {
        out << report.rates[0].groups[g];
        for (std::size_t m = 0; m < report.method_names.size(); ++m) {
            out << '\t' << report.rates[m].mean[g] << '\t' << report.rates[m].sd[g];
        }
        out << '\n';
    }
}

void roc_to_csv(const BenchmarkReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out.precision(17);
    out << "method,fpr,tpr\n";
    for (std::size_t m = 0; m < report.method_names.size(); ++m) {
        for (std::size_t g = 0; g < report.mean_roc[m].fpr.size(); ++g) {
            out << report.method_names[m] << ',' << report.mean_roc[m].fpr[g] << ','
                << report.mean_roc[m].tpr[g] << '\n';
        }
    }
}

void tp_fp_to_csv(const PretreatComparison& cmp, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "run,procedure,tp,fp\n";
    for (std::size_t proc = 0; proc < 3; ++proc) {
        for (std::size_t r = 0; r < cmp.tp[proc].size(); ++r) {
            out << r + 1 << ',' << proc + 1 << ',' << cmp.tp[proc][r] << ',' << cmp.fp[proc][r] << '\n';
        }
    }
}

}  // namespace armada
