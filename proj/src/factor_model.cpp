#include "armada/factor_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "armada/parallel.hpp"
#include "armada/types.hpp"

namespace armada {

namespace {

struct Regression {
    Eigen::MatrixXd residuals;  // n x p
    Eigen::MatrixXd effects;    // p x 2, (intercept, slope)
};

// Columnwise OLS of the cluster on (1, y).
Regression regress_on_response(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows(), p = x.cols();
    const double y_mean = y.mean();
    const Eigen::VectorXd yc = y.array() - y_mean;
    const double y_ss = yc.squaredNorm();
    Regression reg;
    reg.effects.resize(p, 2);
    reg.residuals.resize(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double x_mean = x.col(j).mean();
        const double slope = y_ss > 0.0 ? yc.dot(x.col(j)) / y_ss : 0.0;
        const double intercept = x_mean - slope * y_mean;
        reg.effects(j, 0) = intercept;
        reg.effects(j, 1) = slope;
        reg.residuals.col(j) = x.col(j).array() - intercept - slope * y.array();
    }
    return reg;
}

double observed_loglik(const Eigen::MatrixXd& resid, const Eigen::VectorXd& s_diag,
                       const Eigen::MatrixXd& loadings, const Eigen::VectorXd& psi) {
    const Eigen::Index n = resid.rows(), p = resid.cols();
    const Eigen::Index q = loadings.cols();
    double logdet = psi.array().log().sum();
    double trace = (s_diag.array() / psi.array()).sum();
    if (q > 0) {
        const Eigen::MatrixXd w = loadings.array().colwise() / psi.array();  // Psi^-1 B
        Eigen::MatrixXd mq = Eigen::MatrixXd::Identity(q, q) + loadings.transpose() * w;
        Eigen::LLT<Eigen::MatrixXd> llt(mq);
        logdet += 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
        const Eigen::MatrixXd t = resid * w;  // n x q
        const Eigen::MatrixXd wsw = t.transpose() * t / static_cast<double>(n);
        trace -= llt.solve(wsw).trace();
    }
    return -0.5 * static_cast<double>(n) *
           (static_cast<double>(p) * std::log(2.0 * std::numbers::pi) + logdet + trace);
}

}  // namespace

FactorModel fit_factor_model(const Eigen::MatrixXd& cluster, const ResponseVariable& y, int q,
                             int max_iter, double rel_tol) {
    const Eigen::Index n = cluster.rows(), p = cluster.cols();
    const int q_cap = static_cast<int>(std::min<Eigen::Index>(n - 2, p - 1));
    if (q < 0 || q > std::max(0, q_cap)) {
        throw data_error("fit_factor_model: q=" + std::to_string(q) + " outside 0.." + std::to_string(q_cap));
    }
    if (y.n() != n) throw data_error("fit_factor_model: response length mismatch");

    Regression reg = regress_on_response(cluster, y.values);
    const Eigen::MatrixXd& resid = reg.residuals;
    const Eigen::VectorXd s_diag = resid.colwise().squaredNorm() / static_cast<double>(n);
    const Eigen::VectorXd psi_floor = 1e-6 * s_diag.cwiseMax(1e-30);

    FactorModel model;
    model.q = q;
    model.response_effects = std::move(reg.effects);

    if (q == 0) {
        model.loadings.resize(p, 0);
        model.specific_variances = s_diag.cwiseMax(psi_floor);
        model.factor_scores.resize(n, 0);
        model.common_variance = 0.0;
        model.log_likelihood = observed_loglik(resid, s_diag, model.loadings, model.specific_variances);
        model.ll_trace.push_back(model.log_likelihood);
        return model;
    }

    // Principal-factor start. The top eigenpairs of the n x n Gram matrix
    // give the leading singular directions cheaply when p >> n:
    // B_k = E' u_k / sqrt(n) for the k-th unit eigenvector u_k of E E'.
    const Eigen::MatrixXd gram = resid * resid.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    Eigen::MatrixXd loadings(p, q);
    for (int k = 0; k < q; ++k) {
        const Eigen::Index col = n - 1 - k;  // eigenvalues are ascending
        loadings.col(k) = resid.transpose() * eig.eigenvectors().col(col) / std::sqrt(static_cast<double>(n));
    }
    Eigen::VectorXd psi = (s_diag - loadings.rowwise().squaredNorm()).cwiseMax(psi_floor);

    model.converged = false;
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        const double ll = observed_loglik(resid, s_diag, loadings, psi);
        model.ll_trace.push_back(ll);
        if (iter > 0 && std::abs(ll - prev_ll) < rel_tol * (std::abs(prev_ll) + 1.0)) {
            model.converged = true;
            break;
        }
        prev_ll = ll;

        const Eigen::MatrixXd w = loadings.array().colwise() / psi.array();  // Psi^-1 B
        const Eigen::MatrixXd mq = Eigen::MatrixXd::Identity(q, q) + loadings.transpose() * w;
        const Eigen::LDLT<Eigen::MatrixXd> mq_ldlt(mq);
        const Eigen::MatrixXd mq_inv = mq_ldlt.solve(Eigen::MatrixXd::Identity(q, q));
        const Eigen::MatrixXd z_hat = resid * w * mq_inv;                       // n x q
        const Eigen::MatrixXd second_moment = z_hat.transpose() * z_hat + static_cast<double>(n) * mq_inv;
        const Eigen::MatrixXd cross = resid.transpose() * z_hat;                // p x q
        loadings = second_moment.ldlt().solve(cross.transpose()).transpose();   // p x q
        psi = (s_diag - (loadings.array() * cross.array()).rowwise().sum().matrix() / static_cast<double>(n))
                  .cwiseMax(psi_floor);
    }

    model.loadings = loadings;
    model.specific_variances = psi;
    const Eigen::MatrixXd w = loadings.array().colwise() / psi.array();
    const Eigen::MatrixXd mq = Eigen::MatrixXd::Identity(q, q) + loadings.transpose() * w;
    Eigen::MatrixXd scores = mq.ldlt().solve((resid * w).transpose()).transpose();

    // Scores from the response residuals carry no response effect, so the
    // factor-driven share of the per-covariate slopes would survive the
    // correction and inflate every downstream test. Estimate that shared
    // component by GLS of the slopes on the loadings, re-fit after trimming
    // covariates whose slope residual stands out (those carry real signal
    // that must not leak into the shared component), and fold it back into
    // the scores; the per-covariate effect estimates shrink accordingly.
    const Eigen::VectorXd slopes = model.response_effects.col(1);
    Eigen::VectorXd factor_effect =
        (loadings.transpose() * w).ldlt().solve(w.transpose() * slopes);
    for (int refine = 0; refine < 2; ++refine) {
        Eigen::VectorXd slope_resid = slopes - loadings * factor_effect;
        std::vector<double> scaled(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) scaled[static_cast<std::size_t>(j)] = std::abs(slope_resid[j]) / std::sqrt(psi[j]);
        std::vector<double> tmp = scaled;
        std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 2), tmp.end());
        const double cutoff = 2.5 * 1.4826 * std::max(tmp[tmp.size() / 2], 1e-12);
        Eigen::MatrixXd bw = Eigen::MatrixXd::Zero(q, q);
        Eigen::VectorXd bs = Eigen::VectorXd::Zero(q);
        Eigen::Index kept = 0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (scaled[static_cast<std::size_t>(j)] > cutoff) continue;
            bw.noalias() += w.row(j).transpose() * loadings.row(j);
            bs.noalias() += w.row(j).transpose() * slopes[j];
            ++kept;
        }
        if (kept < std::max<Eigen::Index>(q + 1, p / 4)) break;
        factor_effect = bw.ldlt().solve(bs);
    }
    const double y_mean = y.values.mean();
    scores += (y.values.array() - y_mean).matrix() * factor_effect.transpose();
    model.factor_scores = std::move(scores);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double shared = loadings.row(j).dot(factor_effect);
        model.response_effects(j, 1) = slopes[j] - shared;
        model.response_effects(j, 0) += shared * y_mean;  // column mean is unchanged
    }
    model.log_likelihood = model.ll_trace.back();
    model.common_variance = common_variance(model);
    return model;
}

double common_variance(const FactorModel& model) {
    const double shared = model.loadings.squaredNorm();
    const double total = shared + model.specific_variances.sum();
    return total > 0.0 ? shared / total : 0.0;
}

Eigen::MatrixXd decorrelate(const Eigen::MatrixXd& cluster, const FactorModel& model) {
    if (cluster.cols() != model.loadings.rows() && model.q > 0) {
        throw data_error("decorrelate: column count does not match the fitted model");
    }
    if (model.q == 0) return cluster;
    if (cluster.rows() != model.factor_scores.rows()) {
        throw data_error("decorrelate: sample count does not match the fitted model");
    }
    return cluster - model.factor_scores * model.loadings.transpose();
}

double residual_correlation_energy(const Eigen::MatrixXd& corrected) {
    const Eigen::Index n = corrected.rows(), p = corrected.cols();
    if (p < 2) return 0.0;
    // Standardize columns; a degenerate constant column contributes nothing.
    Eigen::MatrixXd z(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double m = corrected.col(j).mean();
        const double ss = (corrected.col(j).array() - m).square().sum();
        if (ss > 0.0) {
            z.col(j) = (corrected.col(j).array() - m) / std::sqrt(ss / static_cast<double>(n - 1));
        } else {
            z.col(j).setZero();
        }
    }
    // Off-diagonal energy of the p x p correlation matrix via the n x n Gram.
    const Eigen::MatrixXd gram = z * z.transpose() / static_cast<double>(n - 1);
    const double total = gram.squaredNorm();
    const double off = total - static_cast<double>(p);
    return static_cast<double>(n) * off / (static_cast<double>(p) * static_cast<double>(p - 1));
}

int select_num_factors(const Eigen::MatrixXd& cluster, const ResponseVariable& y, int q_max) {
    const Eigen::Index n = cluster.rows(), p = cluster.cols();
    const int cap = static_cast<int>(std::min<Eigen::Index>(n - 2, p - 1));
    if (q_max > cap) throw data_error("select_num_factors: q_max exceeds " + std::to_string(cap));
    if (q_max <= 0 || p < 2) return 0;

    std::vector<double> criterion(static_cast<std::size_t>(q_max) + 1);
    parallel_for(criterion.size(), [&](std::size_t qi) {
        const FactorModel model = fit_factor_model(cluster, y, static_cast<int>(qi));
        criterion[qi] = residual_correlation_energy(decorrelate(cluster, model));
    });
    const double best = *std::min_element(criterion.begin(), criterion.end());
    for (std::size_t qi = 0; qi < criterion.size(); ++qi) {
        if (criterion[qi] <= 1.05 * best) return static_cast<int>(qi);
    }
    return q_max;
}

CorrectedDataset pretreat(const Dataset& d, const Partition& partition, int q_max) {
    if (static_cast<Eigen::Index>(partition.labels.size()) != d.p()) {
        throw data_error("pretreat: partition does not cover all covariates");
    }
    const auto clusters = partition.clusters();
    CorrectedDataset out;
    out.matrix.resize(d.n(), d.p());
    out.partition = partition;
    out.models.resize(clusters.size());
    out.response = d.response;
    out.covariate_names = d.covariate_names;

    parallel_for(clusters.size(), [&](std::size_t k) {
        const auto& members = clusters[k];
        try {
            Eigen::MatrixXd sub(d.n(), static_cast<Eigen::Index>(members.size()));
            for (std::size_t j = 0; j < members.size(); ++j) sub.col(static_cast<Eigen::Index>(j)) = d.matrix.col(members[j]);
            if (!sub.allFinite()) throw data_error("non-finite values in cluster data");
            const int cap = static_cast<int>(std::min<Eigen::Index>(d.n() - 2, static_cast<Eigen::Index>(members.size()) - 1));
            const int q_cap = std::max(0, std::min(q_max, cap));
            const int q = select_num_factors(sub, d.response, q_cap);
            FactorModel model = fit_factor_model(sub, d.response, q);
            const Eigen::MatrixXd corrected = decorrelate(sub, model);
            for (std::size_t j = 0; j < members.size(); ++j) out.matrix.col(members[j]) = corrected.col(static_cast<Eigen::Index>(j));
            out.models[k] = std::move(model);
        } catch (const std::exception& e) {
            throw data_error("cluster " + std::to_string(k + 1) + ": " + e.what());
        }
    });
    return out;
}

std::string factor_model_to_json(const FactorModel& model) {
    std::ostringstream out;
    out.precision(17);
    out << "{\"q\":" << model.q << ",\"common_variance\":" << model.common_variance
        << ",\"converged\":" << (model.converged ? "true" : "false") << ",\"loadings\":[";
    for (Eigen::Index i = 0; i < model.loadings.rows(); ++i) {
        if (i) out << ',';
        out << '[';
        for (Eigen::Index j = 0; j < model.loadings.cols(); ++j) {
            if (j) out << ',';
            out << model.loadings(i, j);
        }
        out << ']';
    }
    out << "],\"specific_variances\":[";
    for (Eigen::Index i = 0; i < model.specific_variances.size(); ++i) {
        if (i) out << ',';
        out << model.specific_variances[i];
    }
    out << "]}";
    return out.str();
}

}  // namespace armada
