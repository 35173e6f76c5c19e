#include <filesystem>
#include <fstream>

#include "armada/heatmap.hpp"
#include "armada/rng.hpp"
#include "armada/simbench.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace armada;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Dataset block_dataset(std::uint64_t seed) {
    // Two sample groups x two covariate groups, strong block means.
    Rng rng(seed);
    Dataset d;
    const int n = 6, p = 6;
    d.matrix.resize(n, p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            const bool hot = (i < 3) == (j < 3);
            d.matrix(i, j) = (hot ? 4.0 : -4.0) + 0.1 * rng.normal();
        }
    }
    for (int j = 0; j < p; ++j) d.covariate_names.push_back("g" + std::to_string(j + 1));
    for (int i = 0; i < n; ++i) d.sample_ids.push_back("s" + std::to_string(i + 1));
    d.response.kind = ResponseKind::Binary;
    d.response.values.resize(n);
    for (int i = 0; i < n; ++i) d.response.values[i] = i < 3 ? 1.0 : 0.0;
    return d;
}

bool contiguous(const std::vector<int>& order, int lo, int hi) {
    // Leaves lo..hi-1 occupy consecutive positions.
    std::vector<int> pos;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] >= lo && order[i] < hi) pos.push_back(static_cast<int>(i));
    }
    for (std::size_t i = 1; i < pos.size(); ++i) {
        if (pos[i] != pos[i - 1] + 1) return false;
    }
    return !pos.empty();
}

}  // namespace

TEST_SUITE_BEGIN("heatmap");

TEST_CASE("identical samples merge first and sit adjacent") {
    Rng rng(91);
    Dataset d;
    const int n = 5, p = 4;
    d.matrix = oracle::random_matrix(n, p, rng);
    d.matrix.row(3) = d.matrix.row(1);  // duplicate sample
    for (int j = 0; j < p; ++j) d.covariate_names.push_back("v" + std::to_string(j));
    for (int i = 0; i < n; ++i) d.sample_ids.push_back("s" + std::to_string(i));
    d.response.kind = ResponseKind::Binary;
    d.response.values.resize(n);
    d.response.values << 0, 1, 0, 1, 0;

    const fs::path svg = fs::temp_directory_path() / "armada_t_heat1.svg";
    const HeatmapSpec spec = cocluster_heatmap(d, {0, 1, 2, 3}, {}, svg.string());
    const auto& order = spec.col_dendrogram.leaf_order;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (order[i] == 1) {
            const bool adjacent = (i > 0 && order[i - 1] == 3) || (i + 1 < order.size() && order[i + 1] == 3);
            CHECK(adjacent);
        }
    }
    CHECK(spec.col_dendrogram.merges.front().left == 1);
    CHECK(spec.col_dendrogram.merges.front().right == 3);
    fs::remove(svg);
}

TEST_CASE("block toy matrix produces a 2x2 block leaf order") {
    const Dataset d = block_dataset(92);
    const fs::path svg = fs::temp_directory_path() / "armada_t_heat2.svg";
    const HeatmapSpec spec = cocluster_heatmap(d, {0, 1, 2, 3, 4, 5}, {}, svg.string());
    CHECK(contiguous(spec.row_dendrogram.leaf_order, 0, 3));
    CHECK(contiguous(spec.row_dendrogram.leaf_order, 3, 6));
    CHECK(contiguous(spec.col_dendrogram.leaf_order, 0, 3));
    CHECK(contiguous(spec.col_dendrogram.leaf_order, 3, 6));
    // Every covariate row is standardized.
    for (int i = 0; i < 6; ++i) {
        CHECK(spec.values.row(i).mean() == doctest::Approx(0.0).epsilon(1e-9));
    }
    fs::remove(svg);
}

TEST_CASE("single selected covariate degenerates gracefully") {
    const Dataset d = block_dataset(93);
    const fs::path svg = fs::temp_directory_path() / "armada_t_heat3.svg";
    const HeatmapSpec spec = cocluster_heatmap(d, {2}, {}, svg.string());
    CHECK(spec.row_dendrogram.leaf_order == std::vector<int>{0});
    CHECK(spec.row_dendrogram.merges.empty());
    CHECK(fs::exists(svg));
    fs::remove(svg);
}

TEST_CASE("empty selection is rejected") {
    const Dataset d = block_dataset(94);
    CHECK_THROWS_AS(cocluster_heatmap(d, {}, {}, "/tmp/armada_t_none.svg"), data_error);
}

TEST_CASE("svg regeneration is byte-identical") {
    const Dataset d = block_dataset(95);
    const fs::path s1 = fs::temp_directory_path() / "armada_t_heat_a.svg";
    const fs::path s2 = fs::temp_directory_path() / "armada_t_heat_b.svg";
    cocluster_heatmap(d, {0, 1, 2, 3, 4, 5}, {}, s1.string());
    cocluster_heatmap(d, {0, 1, 2, 3, 4, 5}, {}, s2.string());
    CHECK(slurp(s1) == slurp(s2));
    CHECK(slurp(s1).find("<svg") == 0);
    fs::remove(s1);
    fs::remove(s2);
}

TEST_CASE("class-0 samples cluster together on strong-signal data") {
    int contiguous_runs = 0;
    const int trials = 10;
    for (int t = 0; t < trials; ++t) {
        SimDesign design = SimDesign::main_classification();
        design.n = 30;
        design.n_clusters = 2;
        design.p_per_cluster = 50;
        design.q_per_cluster = {2, 2};
        SimulatedData sim = simulate_design(design, 9000 + static_cast<std::uint64_t>(t));
        // Select the strongest group (first 10 covariates of each cluster).
        std::vector<int> selected;
        for (int k = 0; k < 2; ++k) {
            for (int j = 0; j < 10; ++j) selected.push_back(50 * k + j);
        }
        const fs::path svg = fs::temp_directory_path() / ("armada_t_heat_mc" + std::to_string(t) + ".svg");
        const HeatmapSpec spec = cocluster_heatmap(sim.dataset, selected, {}, svg.string());
        // Class 0 = samples 15..29.
        if (contiguous(spec.col_dendrogram.leaf_order, 15, 30)) ++contiguous_runs;
        fs::remove(svg);
    }
    CHECK(contiguous_runs >= 8);  // >= 80% of seeds
}

TEST_CASE("linkage variants are accepted") {
    const Dataset d = block_dataset(96);
    const fs::path svg = fs::temp_directory_path() / "armada_t_heat_link.svg";
    for (Linkage linkage : {Linkage::Complete, Linkage::Average, Linkage::Single}) {
        const HeatmapSpec spec = cocluster_heatmap(d, {0, 1, 2, 3, 4, 5}, {}, svg.string(), linkage);
        CHECK(contiguous(spec.row_dendrogram.leaf_order, 0, 3));
    }
    fs::remove(svg);
}

TEST_SUITE_END();
