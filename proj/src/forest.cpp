#include "armada/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "armada/parallel.hpp"
#include "armada/rng.hpp"
#include "armada/types.hpp"

namespace armada {

namespace {

struct TreeNode {
    int feature = -1;        // -1: leaf
    double threshold = 0.0;  // go left when x <= threshold
    int left = -1, right = -1;
    double value = 0.0;      // class-1 fraction or mean response
};

using Tree = std::vector<TreeNode>;

int auto_mtry(int p, ResponseKind kind) {
    const int m = kind == ResponseKind::Binary ? static_cast<int>(std::sqrt(static_cast<double>(p)))
                                               : p / 3;
    return std::max(1, std::min(p, m));
}

int auto_min_node(ResponseKind kind) { return kind == ResponseKind::Binary ? 1 : 5; }

struct SplitScan {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
};

class TreeBuilder {
  public:
    TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ResponseKind kind,
                const std::vector<int>& features, int mtry, int min_node, Rng& rng)
        : x_(x), y_(y), kind_(kind), features_(features), mtry_(mtry), min_node_(min_node), rng_(rng) {}

    Tree build(std::vector<int>& samples) {
        tree_.clear();
        grow(samples, 0, static_cast<int>(samples.size()));
        return std::move(tree_);
    }

  private:
    // Grows the node for samples_[lo, hi); returns its index.
    int grow(std::vector<int>& samples, int lo, int hi) {
        const int node_index = static_cast<int>(tree_.size());
        tree_.emplace_back();
        const int size = hi - lo;

        double sum = 0.0, sumsq = 0.0;
        for (int i = lo; i < hi; ++i) {
            const double v = y_[samples[static_cast<std::size_t>(i)]];
            sum += v;
            sumsq += v * v;
        }
        tree_[static_cast<std::size_t>(node_index)].value = sum / size;

        const bool pure = kind_ == ResponseKind::Binary ? (sum == 0.0 || sum == size)
                                                        : (sumsq - sum * sum / size <= 1e-24);
        if (size < 2 || size <= min_node_ || pure) return node_index;

        const SplitScan split = best_split(samples, lo, hi, sum, sumsq);
        if (split.feature < 0) return node_index;

        const int mid = static_cast<int>(
            std::partition(samples.begin() + lo, samples.begin() + hi,
                           [&](int s) { return x_(s, split.feature) <= split.threshold; }) -
            samples.begin());
        if (mid == lo || mid == hi) return node_index;

        tree_[static_cast<std::size_t>(node_index)].feature = split.feature;
        tree_[static_cast<std::size_t>(node_index)].threshold = split.threshold;
        const int left = grow(samples, lo, mid);
        const int right = grow(samples, mid, hi);
        tree_[static_cast<std::size_t>(node_index)].left = left;
        tree_[static_cast<std::size_t>(node_index)].right = right;
        return node_index;
    }

    SplitScan best_split(const std::vector<int>& samples, int lo, int hi, double sum, double sumsq) {
        const int size = hi - lo;
        // mtry candidates without replacement (partial Fisher-Yates).
        candidates_ = features_;
        const int m = std::min<int>(mtry_, static_cast<int>(candidates_.size()));
        for (int i = 0; i < m; ++i) {
            const std::size_t j = static_cast<std::size_t>(i) +
                                  static_cast<std::size_t>(rng_.below(candidates_.size() - static_cast<std::size_t>(i)));
            std::swap(candidates_[static_cast<std::size_t>(i)], candidates_[j]);
        }

        SplitScan best;
        const double parent_score =
            kind_ == ResponseKind::Binary ? gini(sum, size) : sumsq - sum * sum / size;

        pairs_.resize(static_cast<std::size_t>(size));
        for (int c = 0; c < m; ++c) {
            const int feature = candidates_[static_cast<std::size_t>(c)];
            for (int i = 0; i < size; ++i) {
                const int s = samples[static_cast<std::size_t>(lo + i)];
                pairs_[static_cast<std::size_t>(i)] = {x_(s, feature), y_[s]};
            }
            std::sort(pairs_.begin(), pairs_.end());
            double lsum = 0.0, lsumsq = 0.0;
            for (int i = 0; i + 1 < size; ++i) {
                lsum += pairs_[static_cast<std::size_t>(i)].second;
                lsumsq += pairs_[static_cast<std::size_t>(i)].second * pairs_[static_cast<std::size_t>(i)].second;
                if (pairs_[static_cast<std::size_t>(i)].first == pairs_[static_cast<std::size_t>(i + 1)].first) continue;
                const int nl = i + 1, nr = size - nl;
                double child_score;
                if (kind_ == ResponseKind::Binary) {
                    child_score = gini(lsum, nl) + gini(sum - lsum, nr);
                } else {
                    child_score = (lsumsq - lsum * lsum / nl) +
                                  ((sumsq - lsumsq) - (sum - lsum) * (sum - lsum) / nr);
                }
                const double gain = parent_score - child_score;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = feature;
                    best.threshold = 0.5 * (pairs_[static_cast<std::size_t>(i)].first +
                                            pairs_[static_cast<std::size_t>(i + 1)].first);
                }
            }
        }
        return best;
    }

    // size * Gini impurity for a binary node with `ones` positives.
    static double gini(double ones, int size) {
        const double p1 = ones / size;
        return size * 2.0 * p1 * (1.0 - p1);
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXd& y_;
    ResponseKind kind_;
    const std::vector<int>& features_;
    int mtry_;
    int min_node_;
    Rng& rng_;
    Tree tree_;
    std::vector<int> candidates_;
    std::vector<std::pair<double, double>> pairs_;
};

// Predict sample `row`; when substitute_feature >= 0, that feature's value is
// read from substitute_row instead (OOB permutation pass).
double predict(const Tree& tree, const Eigen::MatrixXd& x, int row, int substitute_feature = -1,
               int substitute_row = -1) {
    int node = 0;
    while (tree[static_cast<std::size_t>(node)].feature >= 0) {
        const auto& nd = tree[static_cast<std::size_t>(node)];
        const int src = nd.feature == substitute_feature ? substitute_row : row;
        node = x(src, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
    return tree[static_cast<std::size_t>(node)].value;
}

double hard_class(double prob) { return prob > 0.5 ? 1.0 : 0.0; }

struct TreeResult {
    Tree tree;
    std::vector<int> oob;                 // out-of-bag sample indices
    std::vector<double> oob_predictions;  // per OOB sample
    std::vector<double> importance;       // per feature, error increase under permutation
};

TreeResult grow_one_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ResponseKind kind,
                         const std::vector<int>& features, const ForestOptions& opts,
                         std::uint64_t tree_seed, bool with_importance) {
    const int n = static_cast<int>(x.rows());
    Rng rng(tree_seed);

    std::vector<int> inbag(static_cast<std::size_t>(n));
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) {
        const int s = static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
        inbag[static_cast<std::size_t>(i)] = s;
        seen[static_cast<std::size_t>(s)] = 1;
    }

    TreeResult result;
    for (int i = 0; i < n; ++i) {
        if (!seen[static_cast<std::size_t>(i)]) result.oob.push_back(i);
    }

    TreeBuilder builder(x, y, kind, features, opts.mtry, opts.min_node_size, rng);
    result.tree = builder.build(inbag);

    result.oob_predictions.reserve(result.oob.size());
    for (int o : result.oob) result.oob_predictions.push_back(predict(result.tree, x, o));

    if (!with_importance || result.oob.empty()) return result;

    auto oob_err = [&](int substitute_feature, const std::vector<int>& perm) {
        double err = 0.0;
        for (std::size_t i = 0; i < result.oob.size(); ++i) {
            const int o = result.oob[i];
            const double pred = substitute_feature < 0
                                    ? result.oob_predictions[i]
                                    : predict(result.tree, x, o, substitute_feature, perm[i]);
            if (kind == ResponseKind::Binary) {
                err += hard_class(pred) != y[o] ? 1.0 : 0.0;
            } else {
                const double d = pred - y[o];
                err += d * d;
            }
        }
        return err / static_cast<double>(result.oob.size());
    };

    std::vector<char> used(static_cast<std::size_t>(x.cols()), 0);
    for (const auto& node : result.tree) {
        if (node.feature >= 0) used[static_cast<std::size_t>(node.feature)] = 1;
    }
    const double baseline = oob_err(-1, result.oob);
    result.importance.assign(static_cast<std::size_t>(x.cols()), 0.0);
    std::vector<int> perm;
    for (int j = 0; j < static_cast<int>(x.cols()); ++j) {
        if (!used[static_cast<std::size_t>(j)]) continue;
        perm = result.oob;
        rng.shuffle(perm);
        result.importance[static_cast<std::size_t>(j)] = oob_err(j, perm) - baseline;
    }
    return result;
}

struct ForestRun {
    std::vector<TreeResult> trees;
    double oob_error = 0.0;
    double oob_error_se = 0.0;
};

ForestRun run_forest(const Eigen::MatrixXd& x, const ResponseVariable& y,
                     const std::vector<int>& features, ForestOptions opts, std::uint64_t seed,
                     bool with_importance) {
    const int n = static_cast<int>(x.rows());
    if (opts.n_trees < 100) throw data_error("grow_forest: need at least 100 trees");
    if (opts.mtry <= 0) opts.mtry = auto_mtry(static_cast<int>(features.size()), y.kind);
    if (opts.min_node_size <= 0) opts.min_node_size = auto_min_node(y.kind);

    ForestRun run;
    run.trees.resize(static_cast<std::size_t>(opts.n_trees));
    parallel_for(static_cast<std::size_t>(opts.n_trees), [&](std::size_t t) {
        run.trees[t] = grow_one_tree(x, y.values, y.kind, features, opts,
                                     derive_seed(seed, "forest.tree", t), with_importance);
    });

    // Forest-level OOB error from aggregated per-sample predictions.
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<int> cnt(static_cast<std::size_t>(n), 0);
    for (const auto& tr : run.trees) {
        for (std::size_t i = 0; i < tr.oob.size(); ++i) {
            const int o = tr.oob[i];
            acc[static_cast<std::size_t>(o)] += y.kind == ResponseKind::Binary
                                                    ? hard_class(tr.oob_predictions[i])
                                                    : tr.oob_predictions[i];
            ++cnt[static_cast<std::size_t>(o)];
        }
    }
    double err_sum = 0.0, err_sumsq = 0.0;
    int covered = 0;
    for (int i = 0; i < n; ++i) {
        if (cnt[static_cast<std::size_t>(i)] == 0) continue;
        const double agg = acc[static_cast<std::size_t>(i)] / cnt[static_cast<std::size_t>(i)];
        double e;
        if (y.kind == ResponseKind::Binary) {
            e = hard_class(agg) != y.values[i] ? 1.0 : 0.0;
        } else {
            const double d = agg - y.values[i];
            e = d * d;
        }
        err_sum += e;
        err_sumsq += e * e;
        ++covered;
    }
    if (covered > 0) {
        run.oob_error = err_sum / covered;
        if (covered > 1) {
            const double var = (err_sumsq - err_sum * err_sum / covered) / (covered - 1);
            run.oob_error_se = std::sqrt(std::max(0.0, var) / covered);
        }
    }
    return run;
}

}  // namespace

ForestImportance grow_forest(const Eigen::MatrixXd& x, const ResponseVariable& y, int n_trees,
                             int mtry, std::uint64_t seed, int min_node_size) {
    const int p = static_cast<int>(x.cols());
    std::vector<int> features(static_cast<std::size_t>(p));
    std::iota(features.begin(), features.end(), 0);
    ForestOptions opts{n_trees, mtry, min_node_size};
    const ForestRun run = run_forest(x, y, features, opts, seed, true);

    ForestImportance imp;
    imp.n_trees = n_trees;
    imp.mtry = opts.mtry > 0 ? opts.mtry : auto_mtry(p, y.kind);
    imp.oob_error = run.oob_error;
    imp.oob_error_se = run.oob_error_se;
    imp.importances = Eigen::VectorXd::Zero(p);
    imp.importance_sds = Eigen::VectorXd::Zero(p);
    for (const auto& tr : run.trees) {
        for (int j = 0; j < p; ++j) {
            const double c = tr.importance.empty() ? 0.0 : tr.importance[static_cast<std::size_t>(j)];
            imp.importances[j] += c;
        }
    }
    imp.importances /= static_cast<double>(n_trees);
    for (const auto& tr : run.trees) {
        for (int j = 0; j < p; ++j) {
            const double c = tr.importance.empty() ? 0.0 : tr.importance[static_cast<std::size_t>(j)];
            const double d = c - imp.importances[j];
            imp.importance_sds[j] += d * d;
        }
    }
    imp.importance_sds = (imp.importance_sds / static_cast<double>(n_trees - 1)).cwiseSqrt();
    return imp;
}

void forest_oob_error(const Eigen::MatrixXd& x, const ResponseVariable& y,
                      const std::vector<int>& features, const ForestOptions& opts, std::uint64_t seed,
                      double* error, double* error_se) {
    ForestOptions local = opts;
    if (local.mtry <= 0) local.mtry = auto_mtry(static_cast<int>(features.size()), y.kind);
    const ForestRun run = run_forest(x, y, features, local, seed, false);
    *error = run.oob_error;
    if (error_se) *error_se = run.oob_error_se;
}

namespace {

// 1-D regression tree on the ordered sd sequence (rpart-style defaults:
// minsplit 20, minbucket 7, cp 0.01). Returns the minimum leaf mean.
double min_leaf_mean(const std::vector<double>& v) {
    constexpr int kMinSplit = 20, kMinBucket = 7;
    constexpr double kCp = 0.01;
    const int n = static_cast<int>(v.size());
    std::vector<double> prefix(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> prefix_sq(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 0; i < n; ++i) {
        prefix[static_cast<std::size_t>(i) + 1] = prefix[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(i)];
        prefix_sq[static_cast<std::size_t>(i) + 1] =
            prefix_sq[static_cast<std::size_t>(i)] + v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    auto sse = [&](int lo, int hi) {
        const double s = prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)];
        const double sq = prefix_sq[static_cast<std::size_t>(hi)] - prefix_sq[static_cast<std::size_t>(lo)];
        return sq - s * s / (hi - lo);
    };
    const double root_sse = sse(0, n);
    double best_leaf = std::numeric_limits<double>::infinity();
    // Explicit stack of [lo, hi) ranges.
    std::vector<std::pair<int, int>> stack{{0, n}};
    while (!stack.empty()) {
        const auto [lo, hi] = stack.back();
        stack.pop_back();
        const int size = hi - lo;
        bool split_done = false;
        if (size >= kMinSplit && sse(lo, hi) > 0.0) {
            int best_mid = -1;
            double best_gain = 0.0;
            for (int mid = lo + kMinBucket; mid + kMinBucket <= hi; ++mid) {
                const double gain = sse(lo, hi) - sse(lo, mid) - sse(mid, hi);
                if (gain > best_gain) {
                    best_gain = gain;
                    best_mid = mid;
                }
            }
            if (best_mid >= 0 && best_gain >= kCp * root_sse) {
                stack.emplace_back(lo, best_mid);
                stack.emplace_back(best_mid, hi);
                split_done = true;
            }
        }
        if (!split_done) {
            best_leaf = std::min(best_leaf, (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)]) / size);
        }
    }
    return best_leaf;
}

}  // namespace

std::vector<int> forest_threshold_step(const ForestImportance& imp) {
    const int p = static_cast<int>(imp.importances.size());
    std::vector<int> order(static_cast<std::size_t>(p));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return imp.importances[a] > imp.importances[b]; });
    std::vector<double> sds_ordered;
    sds_ordered.reserve(static_cast<std::size_t>(p));
    for (int j : order) sds_ordered.push_back(imp.importance_sds[j]);
    const double threshold = min_leaf_mean(sds_ordered);
    std::vector<int> retained;
    for (int j : order) {
        if (imp.importances[j] >= threshold) retained.push_back(j);
    }
    return retained;  // decreasing-importance order
}

std::vector<int> forest_interpret_step(const Eigen::MatrixXd& x, const ResponseVariable& y,
                                       const std::vector<int>& retained_ordered, std::uint64_t seed,
                                       const ForestOptions& opts) {
    if (retained_ordered.empty()) return {};
    const int max_models = std::min<int>(100, static_cast<int>(retained_ordered.size()));
    std::vector<double> errors(static_cast<std::size_t>(max_models));
    std::vector<double> ses(static_cast<std::size_t>(max_models));
    for (int j = 1; j <= max_models; ++j) {
        std::vector<int> subset(retained_ordered.begin(), retained_ordered.begin() + j);
        forest_oob_error(x, y, subset, opts, derive_seed(seed, "forest.interpret", static_cast<std::uint64_t>(j)),
                         &errors[static_cast<std::size_t>(j - 1)], &ses[static_cast<std::size_t>(j - 1)]);
    }
    const std::size_t argmin = static_cast<std::size_t>(
        std::min_element(errors.begin(), errors.end()) - errors.begin());
    const double cutoff = errors[argmin] + ses[argmin];
    for (std::size_t j = 0; j < errors.size(); ++j) {
        if (errors[j] <= cutoff) {
            return std::vector<int>(retained_ordered.begin(),
                                    retained_ordered.begin() + static_cast<std::ptrdiff_t>(j + 1));
        }
    }
    return retained_ordered;
}

void importance_to_csv(const ForestImportance& imp, const std::vector<std::string>& names,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out.precision(17);
    out << "name,importance,importance_sd\n";
    for (Eigen::Index j = 0; j < imp.importances.size(); ++j) {
        out << names[static_cast<std::size_t>(j)] << ',' << imp.importances[j] << ','
            << imp.importance_sds[j] << '\n';
    }
}

}  // namespace armada
