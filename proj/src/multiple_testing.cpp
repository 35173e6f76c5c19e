#include "armada/multiple_testing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>

#include "armada/special.hpp"
#include "armada/types.hpp"

namespace armada {

namespace {

std::vector<std::size_t> order_ascending(const std::vector<double>& v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    return order;
}

std::vector<double> bh_adjust(const std::vector<double>& p) {
    const std::size_t m = p.size();
    const auto order = order_ascending(p);
    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t i = m; i-- > 0;) {
        const double v = std::min(1.0, static_cast<double>(m) * p[order[i]] / static_cast<double>(i + 1));
        running = std::min(running, v);
        adjusted[order[i]] = running;
    }
    return adjusted;
}

// Chebyshev basis values T_0..T_degree at u in [-1, 1].
void cheb_row(double u, int degree, double* row) {
    row[0] = 1.0;
    if (degree >= 1) row[1] = u;
    for (int d = 2; d <= degree; ++d) row[d] = 2.0 * u * row[d - 1] - row[d - 2];
}

}  // namespace

AdjustedPValues bonferroni(const PValueVector& p) {
    AdjustedPValues adj;
    adj.method = AdjustMethod::Bonferroni;
    const double m = static_cast<double>(p.values.size());
    adj.values.reserve(p.values.size());
    for (double v : p.values) adj.values.push_back(std::min(1.0, m * v));
    return adj;
}

AdjustedPValues benjamini_hochberg(const PValueVector& p) {
    AdjustedPValues adj;
    adj.method = AdjustMethod::BH;
    adj.values = bh_adjust(p.values);
    return adj;
}

std::vector<double> default_lambda_grid() {
    std::vector<double> grid;
    for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
    return grid;
}

AdjustedPValues storey_qvalue(const PValueVector& p, const std::vector<double>& lambda_grid) {
    AdjustedPValues adj;
    adj.method = AdjustMethod::QValue;
    const std::size_t m = p.values.size();

    double pi0 = 1.0;
    if (m >= 20 && !lambda_grid.empty()) {
        // pi0(lambda) = #{p > lambda} / (m (1-lambda)), smoothed by a cubic
        // polynomial and read off at the last grid point.
        std::vector<double> pi0_at(lambda_grid.size());
        for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
            const double lambda = lambda_grid[i];
            std::size_t count = 0;
            for (double v : p.values) {
                if (v > lambda) ++count;
            }
            pi0_at[i] = static_cast<double>(count) / (static_cast<double>(m) * (1.0 - lambda));
        }
        Eigen::MatrixXd design(static_cast<Eigen::Index>(lambda_grid.size()), 4);
        Eigen::VectorXd target(static_cast<Eigen::Index>(lambda_grid.size()));
        for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
            const double l = lambda_grid[i];
            design(static_cast<Eigen::Index>(i), 0) = 1.0;
            design(static_cast<Eigen::Index>(i), 1) = l;
            design(static_cast<Eigen::Index>(i), 2) = l * l;
            design(static_cast<Eigen::Index>(i), 3) = l * l * l;
            target[static_cast<Eigen::Index>(i)] = pi0_at[i];
        }
        const Eigen::VectorXd beta = design.colPivHouseholderQr().solve(target);
        const double eval = lambda_grid.back();
        pi0 = beta[0] + beta[1] * eval + beta[2] * eval * eval + beta[3] * eval * eval * eval;
        pi0 = std::min(1.0, std::max(1.0 / static_cast<double>(m), pi0));
    }
    adj.pi0_hat = pi0;

    std::vector<double> q = bh_adjust(p.values);
    for (double& v : q) v = std::min(1.0, v * pi0);
    // Final monotonization in p-order.
    const auto order = order_ascending(p.values);
    double running = 1.0;
    for (std::size_t i = q.size(); i-- > 0;) {
        running = std::min(running, q[order[i]]);
        q[order[i]] = running;
    }
    adj.values = std::move(q);
    return adj;
}

AdjustedPValues local_fdr(const PValueVector& p) {
    constexpr int kBins = 120;
    constexpr int kDegree = 7;
    const std::size_t m = p.values.size();
    if (m < 100) throw data_error("local_fdr: needs at least 100 p-values, got " + std::to_string(m));

    AdjustedPValues adj;
    adj.method = AdjustMethod::LocalFDR;

    std::vector<double> z(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double pv = std::min(1.0 - 1e-16, std::max(1e-300, p.values[i]));
        z[i] = -normal_quantile(pv);
    }
    const auto [zmin_it, zmax_it] = std::minmax_element(z.begin(), z.end());
    const double lo = *zmin_it - 1e-9, hi = *zmax_it + 1e-9;
    const double width = (hi - lo) / kBins;

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(kBins);
    for (double v : z) {
        int b = static_cast<int>((v - lo) / width);
        b = std::clamp(b, 0, kBins - 1);
        counts[b] += 1.0;
    }
    Eigen::VectorXd centers(kBins);
    for (int b = 0; b < kBins; ++b) centers[b] = lo + (b + 0.5) * width;
    auto to_u = [&](double zv) { return std::clamp(2.0 * (zv - lo) / (hi - lo) - 1.0, -1.0, 1.0); };

    Eigen::MatrixXd design(kBins, kDegree + 1);
    for (int b = 0; b < kBins; ++b) {
        double row[kDegree + 1];
        cheb_row(to_u(centers[b]), kDegree, row);
        for (int d = 0; d <= kDegree; ++d) design(b, d) = row[d];
    }

    // Poisson regression of the histogram on the polynomial basis.
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(kDegree + 1);
    beta[0] = std::log(counts.mean() + 1e-12);
    bool glm_ok = false;
    double prev_dev = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        const Eigen::VectorXd eta = design * beta;
        if (eta.maxCoeff() > 50.0) break;  // diverged
        const Eigen::VectorXd mu = eta.array().exp();
        double dev = 0.0;
        for (int b = 0; b < kBins; ++b) {
            dev += 2.0 * (counts[b] > 0 ? counts[b] * std::log(counts[b] / mu[b]) : 0.0) - 2.0 * (counts[b] - mu[b]);
        }
        if (std::abs(prev_dev - dev) < 1e-10 * (std::abs(dev) + 1.0)) {
            glm_ok = true;
            break;
        }
        prev_dev = dev;
        const Eigen::MatrixXd xtwx = design.transpose() * mu.asDiagonal() * design;
        const Eigen::VectorXd grad = design.transpose() * (counts - mu);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
        if (ldlt.info() != Eigen::Success) break;
        const Eigen::VectorXd step = ldlt.solve(grad);
        if (!step.allFinite()) break;
        beta += step;
    }

    auto eta_at = [&](double zv) {
        double row[kDegree + 1];
        cheb_row(to_u(zv), kDegree, row);
        double s = 0.0;
        for (int d = 0; d <= kDegree; ++d) s += beta[d] * row[d];
        return s;
    };

    // Empirical null by central matching: quadratic fit to the log-density in
    // a window around its mode. The window is scaled by a robust spread (MAD)
    // so heavy signal tails cannot drag the null fit.
    bool have_null = false;
    double qa = 0.0, qb = 0.0, qc = 0.0;  // quad(z) = qa + qb z + qc z^2
    if (glm_ok) {
        std::vector<double> sorted_z = z;
        std::sort(sorted_z.begin(), sorted_z.end());
        const double z_median = sorted_z[m / 2];
        std::vector<double> dev(m);
        for (std::size_t i = 0; i < m; ++i) dev[i] = std::abs(z[i] - z_median);
        std::nth_element(dev.begin(), dev.begin() + static_cast<std::ptrdiff_t>(m / 2), dev.end());
        const double spread = std::max(1.4826 * dev[m / 2], 0.25);
        int mode_bin = 0;
        for (int b = 1; b < kBins; ++b) {
            if (eta_at(centers[b]) > eta_at(centers[mode_bin])) mode_bin = b;
        }
        const double z_mode = centers[mode_bin];
        std::vector<int> central;
        for (int b = 0; b < kBins; ++b) {
            if (std::abs(centers[b] - z_mode) <= 1.5 * spread) central.push_back(b);
        }
        if (central.size() >= 5) {
            Eigen::MatrixXd quad_design(static_cast<Eigen::Index>(central.size()), 3);
            Eigen::VectorXd quad_target(static_cast<Eigen::Index>(central.size()));
            for (std::size_t i = 0; i < central.size(); ++i) {
                const double zc = centers[central[i]];
                quad_design(static_cast<Eigen::Index>(i), 0) = 1.0;
                quad_design(static_cast<Eigen::Index>(i), 1) = zc;
                quad_design(static_cast<Eigen::Index>(i), 2) = zc * zc;
                quad_target[static_cast<Eigen::Index>(i)] = eta_at(zc);
            }
            const Eigen::VectorXd coeff = quad_design.colPivHouseholderQr().solve(quad_target);
            if (coeff[2] < 0.0) {
                qa = coeff[0];
                qb = coeff[1];
                qc = coeff[2];
                have_null = true;
            }
        }
    }

    adj.values.resize(m);
    if (have_null) {
        const double sigma2 = -1.0 / (2.0 * qc);
        const double peak = qa - qb * qb / (4.0 * qc);
        const double pi0 = std::exp(peak) * std::sqrt(2.0 * std::numbers::pi * sigma2) /
                           (static_cast<double>(m) * width);
        adj.pi0_hat = std::min(1.0, std::max(1e-12, pi0));
        for (std::size_t i = 0; i < m; ++i) {
            const double log_ratio = (qa + qb * z[i] + qc * z[i] * z[i]) - eta_at(z[i]);
            adj.values[i] = std::min(1.0, std::exp(log_ratio));
        }
    } else {
        // Theoretical N(0,1) null against the raw histogram.
        adj.fallback_null = true;
        adj.pi0_hat = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            int b = static_cast<int>((z[i] - lo) / width);
            b = std::clamp(b, 0, kBins - 1);
            const double f = std::max(counts[b], 1.0) / (static_cast<double>(m) * width);
            const double f0 = std::exp(-0.5 * z[i] * z[i]) / std::sqrt(2.0 * std::numbers::pi);
            adj.values[i] = std::min(1.0, f0 / f);
        }
    }

    // Monotone in p by isotonic regression (pool adjacent violators).
    const auto order = order_ascending(p.values);
    std::vector<double> level, weight;
    level.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        level.push_back(adj.values[order[i]]);
        weight.push_back(1.0);
        while (level.size() > 1 && level[level.size() - 2] > level.back()) {
            const double w = weight[weight.size() - 2] + weight.back();
            const double v = (level[level.size() - 2] * weight[weight.size() - 2] +
                              level.back() * weight.back()) / w;
            level.pop_back();
            weight.pop_back();
            level.back() = v;
            weight.back() = w;
        }
    }
    std::size_t pos = 0;
    for (std::size_t block = 0; block < level.size(); ++block) {
        for (int rep = 0; rep < static_cast<int>(weight[block]); ++rep) {
            adj.values[order[pos++]] = std::min(1.0, level[block]);
        }
    }
    return adj;
}

AdjustedPValues factor_adjusted_selection(const Eigen::MatrixXd& cluster, const ResponseVariable& y,
                                          int q_max, const std::vector<std::string>& names) {
    const int cap = static_cast<int>(std::min<Eigen::Index>(cluster.rows() - 2, cluster.cols() - 1));
    const int q = select_num_factors(cluster, y, std::max(0, std::min(q_max, cap)));
    const FactorModel model = fit_factor_model(cluster, y, q);
    const Eigen::MatrixXd corrected = decorrelate(cluster, model);
    AdjustedPValues adj = benjamini_hochberg(raw_pvalues(corrected, y, names));
    adj.method = AdjustMethod::FactorAdjusted;
    return adj;
}

std::string adjust_method_name(AdjustMethod method) {
    switch (method) {
        case AdjustMethod::Bonferroni: return "bonferroni";
        case AdjustMethod::BH: return "bh";
        case AdjustMethod::QValue: return "qvalue";
        case AdjustMethod::LocalFDR: return "local_fdr";
        case AdjustMethod::FactorAdjusted: return "factor_adjusted";
    }
    return "unknown";
}

void adjusted_to_csv(const AdjustedPValues& adj, const std::vector<std::string>& names,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out.precision(17);
    out << "name,method,value\n";
    for (std::size_t i = 0; i < adj.values.size(); ++i) {
        out << names[i] << ',' << adjust_method_name(adj.method) << ',' << adj.values[i] << '\n';
    }
}

}  // namespace armada
