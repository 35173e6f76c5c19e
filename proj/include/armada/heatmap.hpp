#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "armada/dataset.hpp"

namespace armada {

enum class Linkage { Complete, Average, Single };

struct HclustResult {
    struct Merge {
        int left = 0, right = 0;  // child ids; leaves 0..m-1, merge i creates m+i
        double height = 0.0;
    };
    std::vector<Merge> merges;
    std::vector<int> leaf_order;  // permutation of 0..m-1
};

// Agglomerative clustering on a precomputed distance matrix. Leaf order puts
// the child containing the smallest original index on the left.
HclustResult hierarchical_linkage(const Eigen::MatrixXd& dist, Linkage linkage);

struct HeatmapSpec {
    Eigen::MatrixXd values;               // selected covariates (rows) x samples, each row mean 0 sd 1
    std::vector<std::string> row_labels;  // covariate names
    std::vector<std::string> col_labels;  // sample labels
    HclustResult row_dendrogram;
    HclustResult col_dendrogram;
    double color_limit = 3.0;             // diverging scale clipped at +-3 sd
};

// Co-clustering of samples and the selected covariates, plus the SVG render.
HeatmapSpec cocluster_heatmap(const Dataset& d, const std::vector<int>& selected,
                              const std::vector<std::string>& sample_labels,
                              const std::string& svg_path, Linkage linkage = Linkage::Complete);

void heatmap_to_svg(const HeatmapSpec& spec, const std::string& path);

}  // namespace armada
