#include "armada/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "armada/parallel.hpp"
#include "armada/rng.hpp"
#include "armada/types.hpp"

namespace armada {

namespace {

constexpr double kProbClamp = 1e-5;
constexpr double kWeightFloor = 1e-5;

struct Standardized {
    Eigen::MatrixXd x;        // centered/scaled columns; constant columns become zero
    Eigen::VectorXd centers;
    Eigen::VectorXd scales;   // 1.0 for constant columns
};

// glmnet-style internal standardization (1/n variance).
Standardized standardize_for_lasso(const Eigen::MatrixXd& x) {
    const Eigen::Index n = x.rows(), p = x.cols();
    Standardized s;
    s.x.resize(n, p);
    s.centers.resize(p);
    s.scales.resize(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = x.col(j).mean();
        const double sd = std::sqrt((x.col(j).array() - m).square().sum() / static_cast<double>(n));
        s.centers[j] = m;
        s.scales[j] = sd > 0.0 ? sd : 1.0;
        s.x.col(j) = (x.col(j).array() - m) / s.scales[j];
    }
    return s;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

// Penalized weighted least squares by coordinate descent; weights are all 1
// in the Gaussian case. beta/intercept/residual are warm-started in place.
void coordinate_descent(const Eigen::MatrixXd& x, const Eigen::VectorXd& w, double lambda, double tol,
                        int max_passes, Eigen::VectorXd& beta, double& intercept,
                        Eigen::VectorXd& residual) {
    const Eigen::Index n = x.rows(), p = x.cols();
    const double nn = static_cast<double>(n);
    const double wsum = w.sum();
    Eigen::VectorXd col_wnorm(p);
    for (Eigen::Index j = 0; j < p; ++j) {
        col_wnorm[j] = (w.array() * x.col(j).array().square()).sum() / nn;
    }

    auto sweep = [&](bool active_only) {
        double max_delta = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (active_only && beta[j] == 0.0) continue;
            if (col_wnorm[j] <= 0.0) continue;
            const double old = beta[j];
            const double rho =
                (w.array() * x.col(j).array() * residual.array()).sum() / nn + col_wnorm[j] * old;
            const double updated = soft_threshold(rho, lambda) / col_wnorm[j];
            if (updated != old) {
                residual.array() -= (updated - old) * x.col(j).array();
                beta[j] = updated;
                max_delta = std::max(max_delta, std::abs(updated - old) * std::sqrt(col_wnorm[j]));
            }
        }
        const double d0 = (w.array() * residual.array()).sum() / wsum;
        if (d0 != 0.0) {
            intercept += d0;
            residual.array() -= d0;
            max_delta = std::max(max_delta, std::abs(d0));
        }
        return max_delta;
    };

    int passes = 0;
    while (passes < max_passes) {
        const double full_delta = sweep(false);
        ++passes;
        if (full_delta < tol) return;
        while (passes < max_passes) {
            const double active_delta = sweep(true);
            ++passes;
            if (active_delta < tol) break;
        }
    }
}

}  // namespace

std::vector<int> LassoFit::nonzero_at(int lambda_index, double tol) const {
    std::vector<int> idx;
    for (Eigen::Index j = 0; j < coefficients.rows(); ++j) {
        if (std::abs(coefficients(j, lambda_index)) > tol) idx.push_back(static_cast<int>(j));
    }
    return idx;
}

std::vector<double> default_lambda_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                        ResponseKind kind, const LassoOptions& opts) {
    const Standardized s = standardize_for_lasso(x);
    const Eigen::Index n = x.rows();
    // Gradient magnitude at the intercept-only fit; for the logistic loss the
    // residual there is y - mean(y) as well.
    const Eigen::VectorXd r = y.array() - y.mean();
    double lambda_max = (s.x.transpose() * r).cwiseAbs().maxCoeff() / static_cast<double>(n);
    (void)kind;
    if (lambda_max <= 0.0) lambda_max = 1.0;
    std::vector<double> lambdas(static_cast<std::size_t>(opts.n_lambda));
    const double log_max = std::log(lambda_max);
    const double log_min = std::log(lambda_max * opts.lambda_min_ratio);
    for (int i = 0; i < opts.n_lambda; ++i) {
        const double f = opts.n_lambda == 1 ? 0.0 : static_cast<double>(i) / (opts.n_lambda - 1);
        lambdas[static_cast<std::size_t>(i)] = std::exp(log_max + f * (log_min - log_max));
    }
    return lambdas;
}

LassoFit lasso_path(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, ResponseKind kind,
                    const std::vector<double>& lambdas, const LassoOptions& opts) {
    const Eigen::Index n = x.rows(), p = x.cols();
    const Standardized s = standardize_for_lasso(x);

    LassoFit fit;
    fit.lambda_path = lambdas;
    fit.coefficients = Eigen::MatrixXd::Zero(p, static_cast<Eigen::Index>(lambdas.size()));
    fit.intercepts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lambdas.size()));

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double intercept;

    auto store = [&](std::size_t li) {
        fit.coefficients.col(static_cast<Eigen::Index>(li)) = beta.array() / s.scales.array();
        fit.intercepts[static_cast<Eigen::Index>(li)] =
            intercept - (beta.array() * s.centers.array() / s.scales.array()).sum();
    };

    if (kind == ResponseKind::Continuous) {
        intercept = y.mean();
        Eigen::VectorXd residual = y.array() - intercept;
        const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
        for (std::size_t li = 0; li < lambdas.size(); ++li) {
            coordinate_descent(s.x, w, lambdas[li], opts.tol, opts.max_passes, beta, intercept, residual);
            store(li);
        }
        return fit;
    }

    // Logistic: IRLS outer loop around penalized weighted least squares.
    const double pbar = std::clamp(y.mean(), kProbClamp, 1.0 - kProbClamp);
    intercept = std::log(pbar / (1.0 - pbar));
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        double prev_obj = std::numeric_limits<double>::infinity();
        bool diverged = false;
        for (int outer = 0; outer < opts.max_irls; ++outer) {
            Eigen::VectorXd eta = (s.x * beta).array() + intercept;
            if (!eta.allFinite() || eta.cwiseAbs().maxCoeff() > 1e3) {
                diverged = true;
                break;
            }
            const Eigen::ArrayXd prob =
                (1.0 / (1.0 + (-eta.array()).exp())).max(kProbClamp).min(1.0 - kProbClamp);
            const Eigen::VectorXd w = (prob * (1.0 - prob)).max(kWeightFloor);
            const Eigen::VectorXd zwork = eta.array() + (y.array() - prob) / w.array();
            Eigen::VectorXd residual = zwork - eta;
            coordinate_descent(s.x, w, lambdas[li], opts.tol, opts.max_passes, beta, intercept, residual);

            eta = (s.x * beta).array() + intercept;
            double nll = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                nll += std::log1p(std::exp(-std::abs(eta[i]))) +
                       (eta[i] > 0 ? (1.0 - y[i]) * eta[i] : -y[i] * eta[i]);
            }
            const double obj = nll / static_cast<double>(n) + lambdas[li] * beta.cwiseAbs().sum();
            if (std::abs(prev_obj - obj) < 1e-9 * (std::abs(obj) + 1.0)) break;
            prev_obj = obj;
        }
        if (diverged) {
            fit.irls_diverged = true;
            for (std::size_t rest = li; rest < lambdas.size(); ++rest) {
                if (rest > 0) {
                    fit.coefficients.col(static_cast<Eigen::Index>(rest)) =
                        fit.coefficients.col(static_cast<Eigen::Index>(rest) - 1);
                    fit.intercepts[static_cast<Eigen::Index>(rest)] =
                        fit.intercepts[static_cast<Eigen::Index>(rest) - 1];
                }
            }
            break;
        }
        store(li);
    }
    return fit;
}

namespace {

std::vector<int> cv_fold_assignment(const ResponseVariable& y, int folds, std::uint64_t seed) {
    const Eigen::Index n = y.n();
    std::vector<int> assignment(static_cast<std::size_t>(n), 0);
    Rng rng(derive_seed(seed, "lasso.cv"));
    if (y.kind == ResponseKind::Binary) {
        // Stratified: deal each class round-robin after a shuffle.
        for (int cls = 0; cls <= 1; ++cls) {
            std::vector<std::size_t> idx;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (y.values[i] == static_cast<double>(cls)) idx.push_back(static_cast<std::size_t>(i));
            }
            rng.shuffle(idx);
            for (std::size_t i = 0; i < idx.size(); ++i) {
                assignment[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
            }
        }
    } else {
        std::vector<std::size_t> idx(static_cast<std::size_t>(n));
        std::iota(idx.begin(), idx.end(), 0);
        rng.shuffle(idx);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            assignment[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(folds));
        }
    }
    return assignment;
}

double prediction_error(ResponseKind kind, double eta, double y) {
    if (kind == ResponseKind::Continuous) {
        const double d = y - eta;
        return d * d;
    }
    const double prob = std::clamp(1.0 / (1.0 + std::exp(-eta)), kProbClamp, 1.0 - kProbClamp);
    return -2.0 * (y * std::log(prob) + (1.0 - y) * std::log(1.0 - prob));
}

}  // namespace

LassoFit lasso_cv(const Eigen::MatrixXd& x, const ResponseVariable& y, int folds, std::uint64_t seed,
                  const LassoOptions& opts) {
    const Eigen::Index n = x.rows();
    if (folds < 3) throw data_error("lasso_cv: need at least 3 folds");
    if (n < folds) throw data_error("lasso_cv: more folds than samples");

    const std::vector<double> lambdas = default_lambda_path(x, y.values, y.kind, opts);
    LassoFit fit = lasso_path(x, y.values, y.kind, lambdas, opts);

    const std::vector<int> assignment = cv_fold_assignment(y, folds, seed);
    const std::size_t n_lambda = lambdas.size();
    std::vector<std::vector<double>> fold_errors(static_cast<std::size_t>(folds));

    parallel_for(static_cast<std::size_t>(folds), [&](std::size_t f) {
        std::vector<Eigen::Index> train, test;
        for (Eigen::Index i = 0; i < n; ++i) {
            (assignment[static_cast<std::size_t>(i)] == static_cast<int>(f) ? test : train).push_back(i);
        }
        Eigen::MatrixXd xtr(static_cast<Eigen::Index>(train.size()), x.cols());
        Eigen::VectorXd ytr(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            xtr.row(static_cast<Eigen::Index>(i)) = x.row(train[i]);
            ytr[static_cast<Eigen::Index>(i)] = y.values[train[i]];
        }
        const LassoFit sub = lasso_path(xtr, ytr, y.kind, lambdas, opts);
        std::vector<double> errs(n_lambda, 0.0);
        for (std::size_t li = 0; li < n_lambda; ++li) {
            double total = 0.0;
            for (Eigen::Index i : test) {
                const double eta = sub.intercepts[static_cast<Eigen::Index>(li)] +
                                   x.row(i).dot(sub.coefficients.col(static_cast<Eigen::Index>(li)));
                total += prediction_error(y.kind, eta, y.values[i]);
            }
            errs[li] = total / static_cast<double>(test.size());
        }
        fold_errors[f] = std::move(errs);
    });

    fit.cv_mean.assign(n_lambda, 0.0);
    fit.cv_sd.assign(n_lambda, 0.0);
    for (std::size_t li = 0; li < n_lambda; ++li) {
        double mean = 0.0;
        for (int f = 0; f < folds; ++f) mean += fold_errors[static_cast<std::size_t>(f)][li];
        mean /= static_cast<double>(folds);
        double ss = 0.0;
        for (int f = 0; f < folds; ++f) {
            const double d = fold_errors[static_cast<std::size_t>(f)][li] - mean;
            ss += d * d;
        }
        fit.cv_mean[li] = mean;
        fit.cv_sd[li] = std::sqrt(ss / static_cast<double>(folds - 1));
    }
    fit.chosen_index = static_cast<int>(std::min_element(fit.cv_mean.begin(), fit.cv_mean.end()) -
                                        fit.cv_mean.begin());
    fit.chosen_lambda = lambdas[static_cast<std::size_t>(fit.chosen_index)];
    return fit;
}

std::vector<int> lasso_select(const Eigen::MatrixXd& x, const ResponseVariable& y, int folds,
                              std::uint64_t seed, const LassoOptions& opts) {
    const LassoFit fit = lasso_cv(x, y, folds, seed, opts);
    return fit.nonzero_at(fit.chosen_index);
}

std::string lasso_fit_to_json(const LassoFit& fit) {
    std::ostringstream out;
    out.precision(17);
    out << "{\"lambda_path\":[";
    for (std::size_t i = 0; i < fit.lambda_path.size(); ++i) {
        if (i) out << ',';
        out << fit.lambda_path[i];
    }
    out << "],\"chosen_lambda\":" << fit.chosen_lambda << ",\"chosen_index\":" << fit.chosen_index
        << ",\"irls_diverged\":" << (fit.irls_diverged ? "true" : "false") << ",\"cv_mean\":[";
    for (std::size_t i = 0; i < fit.cv_mean.size(); ++i) {
        if (i) out << ',';
        out << fit.cv_mean[i];
    }
    out << "],\"cv_sd\":[";
    for (std::size_t i = 0; i < fit.cv_sd.size(); ++i) {
        if (i) out << ',';
        out << fit.cv_sd[i];
    }
    out << "]}";
    return out.str();
}

}  // namespace armada
