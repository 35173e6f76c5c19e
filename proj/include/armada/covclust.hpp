#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "armada/dataset.hpp"

namespace armada {

struct Partition {
    std::vector<int> labels;           // p entries in 1..K
    int k = 0;
    std::vector<double> merge_heights; // homogeneity losses, one per agglomeration step
    double homogeneity = 0.0;          // total criterion at K clusters

    std::vector<std::vector<int>> clusters() const;  // member column indices, by label
};

struct StabilityCurve {
    std::vector<int> k_values;
    std::vector<double> mean_stability;  // adjusted Rand index, averaged over replicates
    int chosen_k = 0;
};

struct Pc1Result {
    Eigen::VectorXd scores;  // n projections on the leading eigenvector
    double eigenvalue = 0.0; // of the cluster correlation matrix
};

// Full agglomeration record. Leaves carry ids 0..p-1; the cluster created by
// merge i carries id p+i.
struct Dendrogram {
    struct Merge {
        int left = 0, right = 0;  // child ids, left < right
        double loss = 0.0;        // total-homogeneity loss of this merge
    };
    int p = 0;
    std::vector<Merge> merges;  // p-1 entries

    std::vector<int> cut(int k) const;  // labels 1..k, relabeled by first column index
    double homogeneity_at(int k) const; // p minus the losses spent reaching k clusters
};

// Leading eigenpair of the correlation matrix of a standardized submatrix.
// Scores are the sample projections, sign fixed so the first column's loading
// is >= 0. Throws convergence_error if power iteration exhausts its cap.
Pc1Result first_principal_component(const Eigen::Ref<const Eigen::MatrixXd>& sub);

// Sum of squared correlations between the cluster's columns and its first
// principal component; equals the leading eigenvalue.
double cluster_homogeneity(const Eigen::Ref<const Eigen::MatrixXd>& sub);

Dendrogram agglomerate(const StandardizedMatrix& m);

Partition hierarchical_cluster(const StandardizedMatrix& m, int k);
Partition partition_from_dendrogram(const Dendrogram& dendro, int k);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

StabilityCurve stability_select_k(const StandardizedMatrix& m, int b, int k_max, std::uint64_t seed);

void partition_to_csv(const Partition& part, const std::vector<std::string>& names, const std::string& path);
std::string dendrogram_to_json(const Dendrogram& dendro);

}  // namespace armada
