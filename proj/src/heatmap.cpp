#include "armada/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "armada/svg.hpp"
#include "armada/types.hpp"

namespace armada {

HclustResult hierarchical_linkage(const Eigen::MatrixXd& dist, Linkage linkage) {
    const int m = static_cast<int>(dist.rows());
    if (m < 1 || dist.cols() != m) throw data_error("hierarchical_linkage: bad distance matrix");

    struct Cluster {
        int id;
        std::vector<int> leaves;  // ordered
        bool active = true;
    };
    std::vector<Cluster> slots(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) slots[static_cast<std::size_t>(i)] = {i, {i}, true};

    Eigen::MatrixXd d = dist;
    HclustResult result;
    if (m == 1) {
        result.leaf_order = {0};
        return result;
    }

    for (int step = 0; step < m - 1; ++step) {
        int best_a = -1, best_b = -1;
        for (int i = 0; i < m; ++i) {
            if (!slots[static_cast<std::size_t>(i)].active) continue;
            for (int j = i + 1; j < m; ++j) {
                if (!slots[static_cast<std::size_t>(j)].active) continue;
                if (best_a < 0 || d(i, j) < d(best_a, best_b) ||
                    (d(i, j) == d(best_a, best_b) &&
                     std::pair(slots[static_cast<std::size_t>(i)].id, slots[static_cast<std::size_t>(j)].id) <
                         std::pair(slots[static_cast<std::size_t>(best_a)].id, slots[static_cast<std::size_t>(best_b)].id))) {
                    best_a = i;
                    best_b = j;
                }
            }
        }
        Cluster& ca = slots[static_cast<std::size_t>(best_a)];
        Cluster& cb = slots[static_cast<std::size_t>(best_b)];
        result.merges.push_back({std::min(ca.id, cb.id), std::max(ca.id, cb.id), d(best_a, best_b)});

        // Child containing the smallest original index goes left.
        const int min_a = *std::min_element(ca.leaves.begin(), ca.leaves.end());
        const int min_b = *std::min_element(cb.leaves.begin(), cb.leaves.end());
        std::vector<int> ordered;
        if (min_a <= min_b) {
            ordered = ca.leaves;
            ordered.insert(ordered.end(), cb.leaves.begin(), cb.leaves.end());
        } else {
            ordered = cb.leaves;
            ordered.insert(ordered.end(), ca.leaves.begin(), ca.leaves.end());
        }

        for (int j = 0; j < m; ++j) {
            if (j == best_a || j == best_b || !slots[static_cast<std::size_t>(j)].active) continue;
            double merged;
            switch (linkage) {
                case Linkage::Complete: merged = std::max(d(best_a, j), d(best_b, j)); break;
                case Linkage::Single: merged = std::min(d(best_a, j), d(best_b, j)); break;
                case Linkage::Average: {
                    const double na = static_cast<double>(ca.leaves.size());
                    const double nb = static_cast<double>(cb.leaves.size());
                    merged = (na * d(best_a, j) + nb * d(best_b, j)) / (na + nb);
                    break;
                }
            }
            d(best_a, j) = merged;
            d(j, best_a) = merged;
        }
        ca.leaves = std::move(ordered);
        ca.id = m + step;
        cb.active = false;
    }
    for (const auto& slot : slots) {
        if (slot.active) result.leaf_order = slot.leaves;
    }
    return result;
}

HeatmapSpec cocluster_heatmap(const Dataset& d, const std::vector<int>& selected,
                              const std::vector<std::string>& sample_labels,
                              const std::string& svg_path, Linkage linkage) {
    if (selected.empty()) throw data_error("cocluster_heatmap: empty selection");
    const Eigen::Index n = d.n();
    const int m = static_cast<int>(selected.size());

    HeatmapSpec spec;
    spec.values.resize(m, n);
    spec.row_labels.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const Eigen::VectorXd col = d.matrix.col(selected[static_cast<std::size_t>(i)]);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd > 0.0) {
            spec.values.row(i) = ((col.array() - mean) / sd).transpose();
        } else {
            spec.values.row(i).setZero();
        }
        spec.row_labels.push_back(d.covariate_names[static_cast<std::size_t>(selected[static_cast<std::size_t>(i)])]);
    }
    spec.col_labels = sample_labels.empty() ? d.sample_ids : sample_labels;
    if (static_cast<Eigen::Index>(spec.col_labels.size()) != n) {
        throw data_error("cocluster_heatmap: label count does not match sample count");
    }

    auto euclidean = [](const Eigen::MatrixXd& rows) {
        const Eigen::Index k = rows.rows();
        Eigen::MatrixXd dist(k, k);
        for (Eigen::Index i = 0; i < k; ++i) {
            dist(i, i) = 0.0;
            for (Eigen::Index j = i + 1; j < k; ++j) {
                const double v = (rows.row(i) - rows.row(j)).norm();
                dist(i, j) = v;
                dist(j, i) = v;
            }
        }
        return dist;
    };
    spec.row_dendrogram = hierarchical_linkage(euclidean(spec.values), linkage);
    spec.col_dendrogram = hierarchical_linkage(euclidean(spec.values.transpose()), linkage);

    heatmap_to_svg(spec, svg_path);
    return spec;
}

namespace {

// Distance-proportional dendrogram segments, rendered into [0, depth].
struct DendroGeometry {
    std::vector<double> position;  // per node id, in leaf-index units
    std::vector<double> height;    // per node id
};

DendroGeometry dendro_geometry(const HclustResult& tree, int m) {
    DendroGeometry g;
    g.position.assign(static_cast<std::size_t>(m) + tree.merges.size(), 0.0);
    g.height.assign(static_cast<std::size_t>(m) + tree.merges.size(), 0.0);
    std::vector<int> leaf_slot(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) leaf_slot[static_cast<std::size_t>(tree.leaf_order[static_cast<std::size_t>(i)])] = i;
    for (int i = 0; i < m; ++i) g.position[static_cast<std::size_t>(i)] = leaf_slot[static_cast<std::size_t>(i)] + 0.5;
    for (std::size_t s = 0; s < tree.merges.size(); ++s) {
        const auto& merge = tree.merges[s];
        const std::size_t id = static_cast<std::size_t>(m) + s;
        g.position[id] = 0.5 * (g.position[static_cast<std::size_t>(merge.left)] +
                                g.position[static_cast<std::size_t>(merge.right)]);
        g.height[id] = merge.height;
    }
    return g;
}

}  // namespace

void heatmap_to_svg(const HeatmapSpec& spec, const std::string& path) {
    const int m = static_cast<int>(spec.values.rows());
    const int n = static_cast<int>(spec.values.cols());
    const double cell = std::clamp(700.0 / std::max(m, n), 3.0, 18.0);
    const double dendro = 60.0, label_w = 70.0, label_h = 58.0, pad = 10.0;
    const double grid_w = cell * n, grid_h = cell * m;
    const double x0 = pad + dendro, y0 = pad + dendro;
    SvgCanvas canvas(x0 + grid_w + label_w + pad, y0 + grid_h + label_h + pad);

    for (int i = 0; i < m; ++i) {
        const int row = spec.row_dendrogram.leaf_order[static_cast<std::size_t>(i)];
        for (int j = 0; j < n; ++j) {
            const int col = spec.col_dendrogram.leaf_order[static_cast<std::size_t>(j)];
            canvas.rect(x0 + j * cell, y0 + i * cell, cell, cell,
                        diverging_color(spec.values(row, col), spec.color_limit));
        }
    }

    const bool label_rows = m <= 60, label_cols = n <= 60;
    if (label_rows) {
        for (int i = 0; i < m; ++i) {
            const int row = spec.row_dendrogram.leaf_order[static_cast<std::size_t>(i)];
            canvas.text(x0 + grid_w + 4, y0 + (i + 0.7) * cell,
                        spec.row_labels[static_cast<std::size_t>(row)], std::min(cell * 0.8, 10.0));
        }
    }
    if (label_cols) {
        for (int j = 0; j < n; ++j) {
            const int col = spec.col_dendrogram.leaf_order[static_cast<std::size_t>(j)];
            canvas.text(x0 + (j + 0.7) * cell, y0 + grid_h + 6,
                        spec.col_labels[static_cast<std::size_t>(col)], std::min(cell * 0.8, 10.0),
                        "end", -60.0);
        }
    }

    // Dendrograms: columns above the grid, rows to the left.
    auto draw = [&](const HclustResult& tree, int count, bool columns) {
        if (count < 2 || tree.merges.empty()) return;
        const DendroGeometry g = dendro_geometry(tree, count);
        double max_h = 0.0;
        for (const auto& merge : tree.merges) max_h = std::max(max_h, merge.height);
        if (max_h <= 0.0) max_h = 1.0;
        auto depth = [&](double h) { return dendro * (h / max_h); };
        for (std::size_t s = 0; s < tree.merges.size(); ++s) {
            const auto& merge = tree.merges[s];
            const double pl = g.position[static_cast<std::size_t>(merge.left)];
            const double pr = g.position[static_cast<std::size_t>(merge.right)];
            const double hl = g.height[static_cast<std::size_t>(merge.left)];
            const double hr = g.height[static_cast<std::size_t>(merge.right)];
            const double h = tree.merges[s].height;
            if (columns) {
                canvas.line(x0 + pl * cell, y0 - depth(hl), x0 + pl * cell, y0 - depth(h), "#444");
                canvas.line(x0 + pr * cell, y0 - depth(hr), x0 + pr * cell, y0 - depth(h), "#444");
                canvas.line(x0 + pl * cell, y0 - depth(h), x0 + pr * cell, y0 - depth(h), "#444");
            } else {
                canvas.line(x0 - depth(hl), y0 + pl * cell, x0 - depth(h), y0 + pl * cell, "#444");
                canvas.line(x0 - depth(hr), y0 + pr * cell, x0 - depth(h), y0 + pr * cell, "#444");
                canvas.line(x0 - depth(h), y0 + pl * cell, x0 - depth(h), y0 + pr * cell, "#444");
            }
        }
    };
    draw(spec.col_dendrogram, n, true);
    draw(spec.row_dendrogram, m, false);

    canvas.save(path);
}

}  // namespace armada
