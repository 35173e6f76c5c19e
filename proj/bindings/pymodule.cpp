#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "armada/assoc_tests.hpp"
#include "armada/covclust.hpp"
#include "armada/dataset.hpp"
#include "armada/factor_model.hpp"
#include "armada/forest.hpp"
#include "armada/heatmap.hpp"
#include "armada/lasso.hpp"
#include "armada/multiple_testing.hpp"
#include "armada/parallel.hpp"
#include "armada/scoring.hpp"
#include "armada/simbench.hpp"

namespace py = pybind11;
using namespace armada;

namespace {

ResponseVariable make_response(const Eigen::VectorXd& values, const std::string& kind) {
    ResponseVariable y;
    y.kind = kind == "binary" ? ResponseKind::Binary : ResponseKind::Continuous;
    y.values = values;
    return y;
}

Dataset make_dataset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& kind,
                     std::vector<std::string> names) {
    Dataset d;
    d.matrix = x;
    d.response = make_response(y, kind);
    if (names.empty()) {
        for (Eigen::Index j = 1; j <= x.cols(); ++j) names.push_back("V" + std::to_string(j));
    }
    d.covariate_names = std::move(names);
    for (Eigen::Index i = 1; i <= x.rows(); ++i) d.sample_ids.push_back("S" + std::to_string(i));
    return d;
}

MethodBank bank_from_names(const std::vector<std::string>& names) {
    if (names.empty()) return MethodBank::default_bank();
    MethodBank bank;
    for (const auto& name : names) {
        MethodSpec spec;
        spec.kind = method_kind_from_name(name);
        bank.methods.push_back(spec);
    }
    return bank;
}

}  // namespace

PYBIND11_MODULE(_armada, m) {
    m.doc() = "Covariate selection under dependence: clustering, factor "
              "decorrelation, aggregated selection scores.";

    py::register_exception<data_error>(m, "DataError");

    m.def("set_max_jobs", &set_max_jobs, py::arg("jobs"));

    m.def(
        "standardize",
        [](const Eigen::MatrixXd& x) {
            const StandardizedMatrix s = standardize(x);
            return py::make_tuple(s.values, s.column_means, s.column_sds);
        },
        py::arg("matrix"), "Column standardization; returns (values, means, sds).");

    m.def(
        "first_principal_component",
        [](const Eigen::MatrixXd& sub) {
            const Pc1Result r = first_principal_component(sub);
            return py::make_tuple(r.scores, r.eigenvalue);
        },
        py::arg("submatrix"));

    m.def("cluster_homogeneity",
          [](const Eigen::MatrixXd& sub) { return cluster_homogeneity(sub); }, py::arg("submatrix"));

    m.def(
        "hierarchical_cluster",
        [](const Eigen::MatrixXd& x, int k) {
            const Partition part = hierarchical_cluster(standardize(x), k);
            return py::make_tuple(part.labels, part.homogeneity, part.merge_heights);
        },
        py::arg("matrix"), py::arg("k"),
        "Covariate clustering; returns (labels, total_homogeneity, merge_heights).");

    m.def(
        "stability_select_k",
        [](const Eigen::MatrixXd& x, int b, int k_max, std::uint64_t seed) {
            const StabilityCurve curve = stability_select_k(standardize(x), b, k_max, seed);
            return py::make_tuple(curve.k_values, curve.mean_stability, curve.chosen_k);
        },
        py::arg("matrix"), py::arg("b"), py::arg("k_max"), py::arg("seed"));

    m.def("adjusted_rand_index", &adjusted_rand_index, py::arg("a"), py::arg("b"));

    m.def(
        "fit_factor_model",
        [](const Eigen::MatrixXd& cluster, const Eigen::VectorXd& y, const std::string& kind, int q) {
            const FactorModel model = fit_factor_model(cluster, make_response(y, kind), q);
            py::dict out;
            out["q"] = model.q;
            out["loadings"] = model.loadings;
            out["specific_variances"] = model.specific_variances;
            out["factor_scores"] = model.factor_scores;
            out["common_variance"] = model.common_variance;
            out["converged"] = model.converged;
            out["log_likelihood"] = model.log_likelihood;
            return out;
        },
        py::arg("cluster"), py::arg("y"), py::arg("kind"), py::arg("q"));

    m.def(
        "select_num_factors",
        [](const Eigen::MatrixXd& cluster, const Eigen::VectorXd& y, const std::string& kind, int q_max) {
            return select_num_factors(cluster, make_response(y, kind), q_max);
        },
        py::arg("cluster"), py::arg("y"), py::arg("kind"), py::arg("q_max"));

    m.def(
        "pretreat",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& kind,
           const std::vector<int>& labels, int q_max) {
            Partition part;
            part.labels = labels;
            part.k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end());
            const Dataset d = make_dataset(x, y, kind, {});
            return pretreat(d, part, q_max).matrix;
        },
        py::arg("matrix"), py::arg("y"), py::arg("kind"), py::arg("labels"), py::arg("q_max") = 15,
        "Per-cluster factor correction; returns the corrected matrix.");

    m.def("wilcoxon_rank_sum", &wilcoxon_rank_sum, py::arg("x"), py::arg("y01"));
    m.def("pearson_cor_test", &pearson_cor_test, py::arg("x"), py::arg("y"));

    m.def(
        "adjust_pvalues",
        [](const std::vector<double>& p, const std::string& method) {
            PValueVector pv;
            pv.values = p;
            if (method == "bonferroni") return bonferroni(pv).values;
            if (method == "bh") return benjamini_hochberg(pv).values;
            if (method == "qvalue") return storey_qvalue(pv).values;
            if (method == "local_fdr") return local_fdr(pv).values;
            throw data_error("unknown adjustment: " + method);
        },
        py::arg("pvalues"), py::arg("method"));

    m.def(
        "lasso_select",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& kind, int folds,
           std::uint64_t seed) { return lasso_select(x, make_response(y, kind), folds, seed); },
        py::arg("x"), py::arg("y"), py::arg("kind"), py::arg("folds") = 10, py::arg("seed") = 0);

    m.def(
        "forest_importance",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& kind, int n_trees,
           int mtry, std::uint64_t seed) {
            const ForestImportance imp = grow_forest(x, make_response(y, kind), n_trees, mtry, seed);
            return py::make_tuple(imp.importances, imp.importance_sds, imp.oob_error);
        },
        py::arg("x"), py::arg("y"), py::arg("kind"), py::arg("n_trees") = 500, py::arg("mtry") = 0,
        py::arg("seed") = 0);

    m.def(
        "armada_scores",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const std::string& kind,
           std::optional<int> k, std::uint64_t seed, const std::vector<std::string>& bank,
           std::vector<std::string> names, int q_max) {
            PipelineOptions opts;
            opts.q_max = q_max;
            const Dataset d = make_dataset(x, y, kind, std::move(names));
            const ScoreVector s = armada_scores(d, k, bank_from_names(bank), seed, opts);
            py::dict out;
            out["scores"] = s.scores;
            out["method_names"] = s.method_names;
            out["chosen_k"] = s.chosen_k;
            std::vector<std::vector<int>> flags;
            for (const auto& row : s.per_method) flags.emplace_back(row.begin(), row.end());
            out["per_method"] = flags;
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("kind"), py::arg("k") = std::nullopt, py::arg("seed") = 0,
        py::arg("bank") = std::vector<std::string>{}, py::arg("names") = std::vector<std::string>{},
        py::arg("q_max") = 15,
        "Run the full pipeline; returns scores, per-method flags and the cluster count used.");

    m.def(
        "simulate_design",
        [](const std::string& design, std::uint64_t seed) {
            const SimulatedData sim = simulate_design(SimDesign::from_name(design), seed);
            std::vector<int> truth(sim.truth.begin(), sim.truth.end());
            return py::make_tuple(sim.dataset.matrix, sim.dataset.response.values, truth);
        },
        py::arg("design"), py::arg("seed") = 0, "Returns (X, y, truth) for main|mixture|regression.");

    m.def(
        "simulate_cluster",
        [](int p_k, int q_k, double comvar, int n, std::uint64_t seed) {
            return simulate_cluster(p_k, q_k, comvar, n, seed);
        },
        py::arg("p_k"), py::arg("q_k"), py::arg("comvar"), py::arg("n"), py::arg("seed") = 0);
}
