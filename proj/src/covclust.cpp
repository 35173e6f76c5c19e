#include "armada/covclust.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "armada/parallel.hpp"
#include "armada/rng.hpp"
#include "armada/types.hpp"

namespace armada {

namespace {

constexpr double kPowerTol = 1e-10;
constexpr int kPowerCap = 10000;

// Deterministic start vector for power iteration.
Eigen::VectorXd default_start(Eigen::Index n) {
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const std::uint64_t h = splitmix64(0x6a09e667f3bcc909ULL + static_cast<std::uint64_t>(i));
        u[i] = static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5;
    }
    if (u.norm() == 0.0) u.setOnes();
    return u.normalized();
}

// Leading eigenpair of G = X_J X_J' / (n-1) where J indexes columns of x.
// Returns (lambda, u). Same nonzero spectrum as the cluster correlation
// matrix; iterating on the n-side keeps the cost O(n |J|) per step.
struct GramEig {
    double lambda = 0.0;
    Eigen::VectorXd u;
};

GramEig power_iterate(const Eigen::MatrixXd& x, const std::vector<int>& members,
                      const Eigen::VectorXd* warm_start) {
    const Eigen::Index n = x.rows();
    const double denom = static_cast<double>(n - 1);
    Eigen::VectorXd u = warm_start && warm_start->size() == n ? warm_start->normalized() : default_start(n);
    Eigen::VectorXd t(n);
    // Warm-started iterations converge in a handful of steps on generic
    // spectra; a (near-)degenerate leading pair stalls the residual, so after
    // a bounded number of sweeps switch to a dense solve of the n x n Gram.
    const int direct_cap = std::min(kPowerCap, 300);
    for (int iter = 0; iter < direct_cap; ++iter) {
        t.setZero();
        for (int j : members) {
            const double w = x.col(j).dot(u);
            t.noalias() += w * x.col(j);
        }
        t /= denom;
        const double lambda = u.dot(t);
        const double resid = (t - lambda * u).norm();
        if (resid <= kPowerTol * std::max(1.0, lambda)) return {lambda, std::move(u)};
        const double norm = t.norm();
        if (norm == 0.0) return {0.0, std::move(u)};
        u = t / norm;
    }
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (int j : members) gram.selfadjointView<Eigen::Lower>().rankUpdate(x.col(j), 1.0 / denom);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
        gram.selfadjointView<Eigen::Lower>());
    if (eig.info() != Eigen::Success) {
        throw convergence_error("eigen iteration did not converge within the iteration cap");
    }
    return {eig.eigenvalues()[n - 1], eig.eigenvectors().col(n - 1)};
}

}  // namespace

Pc1Result first_principal_component(const Eigen::Ref<const Eigen::MatrixXd>& sub) {
    const Eigen::Index m = sub.cols();
    if (m < 1) throw data_error("first_principal_component: empty submatrix");
    std::vector<int> members(static_cast<std::size_t>(m));
    std::iota(members.begin(), members.end(), 0);
    Eigen::MatrixXd x = sub;
    const GramEig eig = power_iterate(x, members, nullptr);

    Eigen::VectorXd loadings = sub.transpose() * eig.u;
    const double lnorm = loadings.norm();
    Pc1Result out;
    out.eigenvalue = eig.lambda;
    if (lnorm == 0.0) {
        out.scores = Eigen::VectorXd::Zero(sub.rows());
        return out;
    }
    loadings /= lnorm;
    if (loadings[0] < 0.0) loadings = -loadings;
    out.scores = sub * loadings;
    return out;
}

double cluster_homogeneity(const Eigen::Ref<const Eigen::MatrixXd>& sub) {
    std::vector<int> members(static_cast<std::size_t>(sub.cols()));
    std::iota(members.begin(), members.end(), 0);
    Eigen::MatrixXd x = sub;
    return power_iterate(x, members, nullptr).lambda;
}

std::vector<std::vector<int>> Partition::clusters() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[static_cast<std::size_t>(labels[i] - 1)].push_back(static_cast<int>(i));
    }
    return out;
}

std::vector<int> Dendrogram::cut(int k) const {
    if (k < 1 || k > p) throw data_error("cut: k out of range 1.." + std::to_string(p));
    std::vector<int> parent(static_cast<std::size_t>(p) + merges.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
        while (parent[static_cast<std::size_t>(v)] != v) {
            parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
            v = parent[static_cast<std::size_t>(v)];
        }
        return v;
    };
    const int steps = p - k;
    for (int i = 0; i < steps; ++i) {
        const int id = p + i;
        parent[static_cast<std::size_t>(find(merges[static_cast<std::size_t>(i)].left))] = id;
        parent[static_cast<std::size_t>(find(merges[static_cast<std::size_t>(i)].right))] = id;
    }
    // Relabel so the cluster holding the smallest column index is 1, etc.
    std::vector<int> labels(static_cast<std::size_t>(p));
    std::map<int, int> relabel;
    for (int i = 0; i < p; ++i) {
        const int root = find(i);
        auto [it, inserted] = relabel.emplace(root, static_cast<int>(relabel.size()) + 1);
        labels[static_cast<std::size_t>(i)] = it->second;
    }
    return labels;
}

double Dendrogram::homogeneity_at(int k) const {
    double h = static_cast<double>(p);
    for (int i = 0; i < p - k; ++i) h -= merges[static_cast<std::size_t>(i)].loss;
    return h;
}

Dendrogram agglomerate(const StandardizedMatrix& m) {
    const int p = static_cast<int>(m.p());
    const int n = static_cast<int>(m.n());
    if (p < 1) throw data_error("agglomerate: empty matrix");
    const Eigen::MatrixXd& x = m.values;

    Dendrogram dendro;
    dendro.p = p;
    if (p == 1) return dendro;

    struct Cluster {
        std::vector<int> members;
        double homog = 1.0;
        Eigen::VectorXd u;   // n-side eigenvector, warm start for unions
        int id = 0;          // dendrogram id
        bool active = true;
    };
    std::vector<Cluster> slots(static_cast<std::size_t>(p));
    const double denom = static_cast<double>(n - 1);
    for (int i = 0; i < p; ++i) {
        auto& c = slots[static_cast<std::size_t>(i)];
        c.members = {i};
        c.homog = 1.0;
        c.u = x.col(i) / std::sqrt(denom);  // unit under the standardized norm
        c.u.normalize();
        c.id = i;
    }

    // Pairwise merge-loss table over slots. For singleton pairs the merged
    // homogeneity is 1 + |r|, so the loss is 1 - |r|.
    std::vector<double> loss(static_cast<std::size_t>(p) * static_cast<std::size_t>(p),
                             std::numeric_limits<double>::infinity());
    {
        const Eigen::MatrixXd corr = (x.transpose() * x) / denom;
        for (int i = 0; i < p; ++i) {
            for (int j = i + 1; j < p; ++j) {
                loss[static_cast<std::size_t>(i) * p + j] = 1.0 - std::min(1.0, std::abs(corr(i, j)));
            }
        }
    }
    auto pair_loss = [&](int i, int j) -> double& {
        return i < j ? loss[static_cast<std::size_t>(i) * p + j] : loss[static_cast<std::size_t>(j) * p + i];
    };
    // Lexicographic dendrogram-id tie break for equal losses.
    auto pair_key = [&](int i, int j) {
        const int a = std::min(slots[static_cast<std::size_t>(i)].id, slots[static_cast<std::size_t>(j)].id);
        const int b = std::max(slots[static_cast<std::size_t>(i)].id, slots[static_cast<std::size_t>(j)].id);
        return std::pair<int, int>(a, b);
    };

    std::vector<int> best_of(static_cast<std::size_t>(p), -1);  // row-min cache
    auto recompute_best = [&](int i) {
        int best = -1;
        for (int j = 0; j < p; ++j) {
            if (j == i || !slots[static_cast<std::size_t>(j)].active) continue;
            if (best < 0 || pair_loss(i, j) < pair_loss(i, best) ||
                (pair_loss(i, j) == pair_loss(i, best) && pair_key(i, j) < pair_key(i, best))) {
                best = j;
            }
        }
        best_of[static_cast<std::size_t>(i)] = best;
    };
    for (int i = 0; i < p; ++i) recompute_best(i);

    std::vector<int> union_members;
    for (int step = 0; step < p - 1; ++step) {
        // Global best over the row cache.
        int a = -1;
        for (int i = 0; i < p; ++i) {
            if (!slots[static_cast<std::size_t>(i)].active || best_of[static_cast<std::size_t>(i)] < 0) continue;
            const int j = best_of[static_cast<std::size_t>(i)];
            if (a < 0 || pair_loss(i, j) < pair_loss(a, best_of[static_cast<std::size_t>(a)]) ||
                (pair_loss(i, j) == pair_loss(a, best_of[static_cast<std::size_t>(a)]) &&
                 pair_key(i, j) < pair_key(a, best_of[static_cast<std::size_t>(a)]))) {
                a = i;
            }
        }
        int b = best_of[static_cast<std::size_t>(a)];
        if (slots[static_cast<std::size_t>(a)].id > slots[static_cast<std::size_t>(b)].id) std::swap(a, b);

        Cluster& ca = slots[static_cast<std::size_t>(a)];
        Cluster& cb = slots[static_cast<std::size_t>(b)];
        dendro.merges.push_back({std::min(ca.id, cb.id), std::max(ca.id, cb.id), pair_loss(a, b)});

        union_members.clear();
        std::merge(ca.members.begin(), ca.members.end(), cb.members.begin(), cb.members.end(),
                   std::back_inserter(union_members));
        const Eigen::VectorXd& warm = ca.homog >= cb.homog ? ca.u : cb.u;
        const GramEig eig = power_iterate(x, union_members, &warm);

        ca.members = union_members;
        ca.homog = eig.lambda;
        ca.u = eig.u;
        ca.id = p + step;
        cb.active = false;
        cb.members.clear();
        cb.u.resize(0);

        if (step == p - 2) break;

        // Refresh losses against the merged cluster; unions are warm-started
        // from the larger side's eigenvector.
        std::vector<int> actives;
        actives.reserve(static_cast<std::size_t>(p));
        for (int j = 0; j < p; ++j) {
            if (j != a && slots[static_cast<std::size_t>(j)].active) actives.push_back(j);
        }
        std::vector<double> new_losses(actives.size());
        parallel_for(actives.size(), [&](std::size_t t) {
            const int j = actives[t];
            const Cluster& cj = slots[static_cast<std::size_t>(j)];
            std::vector<int> uni;
            uni.reserve(ca.members.size() + cj.members.size());
            std::merge(ca.members.begin(), ca.members.end(), cj.members.begin(), cj.members.end(),
                       std::back_inserter(uni));
            const Eigen::VectorXd& ws = ca.homog >= cj.homog ? ca.u : cj.u;
            const double lam = power_iterate(x, uni, &ws).lambda;
            new_losses[t] = ca.homog + cj.homog - lam;
        });
        for (std::size_t t = 0; t < actives.size(); ++t) pair_loss(a, actives[t]) = new_losses[t];

        recompute_best(a);
        for (int j : actives) {
            const int bj = best_of[static_cast<std::size_t>(j)];
            if (bj == a || bj == b) {
                recompute_best(j);
            } else if (pair_loss(j, a) < pair_loss(j, bj) ||
                       (pair_loss(j, a) == pair_loss(j, bj) && pair_key(j, a) < pair_key(j, bj))) {
                best_of[static_cast<std::size_t>(j)] = a;
            }
        }
    }
    return dendro;
}

Partition partition_from_dendrogram(const Dendrogram& dendro, int k) {
    Partition part;
    part.k = k;
    part.labels = dendro.cut(k);
    part.merge_heights.reserve(dendro.merges.size());
    for (const auto& merge : dendro.merges) part.merge_heights.push_back(merge.loss);
    part.homogeneity = dendro.homogeneity_at(k);
    return part;
}

Partition hierarchical_cluster(const StandardizedMatrix& m, int k) {
    if (k < 1 || k > m.p()) {
        throw data_error("hierarchical_cluster: k out of range 1.." + std::to_string(m.p()));
    }
    return partition_from_dendrogram(agglomerate(m), k);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size() || a.empty()) throw data_error("adjusted_rand_index: size mismatch");
    std::map<std::pair<int, int>, long long> joint;
    std::map<int, long long> ma, mb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ++joint[{a[i], b[i]}];
        ++ma[a[i]];
        ++mb[b[i]];
    }
    auto choose2 = [](long long v) { return 0.5 * static_cast<double>(v) * static_cast<double>(v - 1); };
    double sum_joint = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (const auto& [key, v] : joint) sum_joint += choose2(v);
    for (const auto& [key, v] : ma) sum_a += choose2(v);
    for (const auto& [key, v] : mb) sum_b += choose2(v);
    const double total = choose2(static_cast<long long>(a.size()));
    const double expected = sum_a * sum_b / total;
    const double max_index = 0.5 * (sum_a + sum_b);
    if (max_index == expected) return 1.0;  // both partitions trivial
    return (sum_joint - expected) / (max_index - expected);
}

StabilityCurve stability_select_k(const StandardizedMatrix& m, int b, int k_max, std::uint64_t seed) {
    const int p = static_cast<int>(m.p());
    const int n = static_cast<int>(m.n());
    if (b < 2) throw data_error("stability_select_k: need at least 2 bootstrap replicates");
    if (k_max < 2 || k_max > p - 1) throw data_error("stability_select_k: k_max out of range 2..p-1");

    const Dendrogram original = agglomerate(m);
    std::vector<std::vector<int>> original_cuts;
    for (int k = 2; k <= k_max; ++k) original_cuts.push_back(original.cut(k));

    std::vector<std::vector<double>> ari(static_cast<std::size_t>(b));
    parallel_for(static_cast<std::size_t>(b), [&](std::size_t r) {
        Rng rng(derive_seed(seed, "covclust.stability", r));
        StandardizedMatrix boot;
        for (int attempt = 0;; ++attempt) {
            Eigen::MatrixXd resampled(n, p);
            for (int i = 0; i < n; ++i) {
                resampled.row(i) = m.values.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n))));
            }
            try {
                boot = standardize(resampled);
                break;
            } catch (const data_error&) {
                if (attempt >= 10) throw;  // degenerate resample, redraw
            }
        }
        const Dendrogram hier = agglomerate(boot);
        std::vector<double> row;
        row.reserve(static_cast<std::size_t>(k_max - 1));
        for (int k = 2; k <= k_max; ++k) {
            row.push_back(adjusted_rand_index(original_cuts[static_cast<std::size_t>(k - 2)], hier.cut(k)));
        }
        ari[r] = std::move(row);
    });

    StabilityCurve curve;
    for (int k = 2; k <= k_max; ++k) curve.k_values.push_back(k);
    curve.mean_stability.assign(static_cast<std::size_t>(k_max - 1), 0.0);
    for (int r = 0; r < b; ++r) {
        for (std::size_t i = 0; i < curve.mean_stability.size(); ++i) {
            curve.mean_stability[i] += ari[static_cast<std::size_t>(r)][i];
        }
    }
    for (auto& v : curve.mean_stability) v /= static_cast<double>(b);
    std::size_t best = 0;
    for (std::size_t i = 1; i < curve.mean_stability.size(); ++i) {
        if (curve.mean_stability[i] > curve.mean_stability[best]) best = i;
    }
    curve.chosen_k = curve.k_values[best];
    return curve;
}

void partition_to_csv(const Partition& part, const std::vector<std::string>& names, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << "covariate_name,cluster_label\n";
    for (std::size_t i = 0; i < part.labels.size(); ++i) {
        out << names[i] << ',' << part.labels[i] << '\n';
    }
}

std::string dendrogram_to_json(const Dendrogram& dendro) {
    std::ostringstream out;
    out.precision(17);
    out << "{\"p\":" << dendro.p << ",\"merges\":[";
    for (std::size_t i = 0; i < dendro.merges.size(); ++i) {
        const auto& merge = dendro.merges[i];
        if (i) out << ',';
        out << "{\"left\":" << merge.left << ",\"right\":" << merge.right << ",\"height\":" << merge.loss << "}";
    }
    out << "]}";
    return out.str();
}

}  // namespace armada
