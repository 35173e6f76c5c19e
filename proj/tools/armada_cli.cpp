#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "armada/assoc_tests.hpp"
#include "armada/covclust.hpp"
#include "armada/dataset.hpp"
#include "armada/factor_model.hpp"
#include "armada/heatmap.hpp"
#include "armada/parallel.hpp"
#include "armada/scoring.hpp"
#include "armada/simbench.hpp"
#include "armada/svg.hpp"
#include "armada/types.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct CommonOptions {
    std::uint64_t seed = 0;
    std::string clusters = "auto";
    int threshold = 1;
    int runs = 100;
    int jobs = 0;
    std::string out_dir = "armada_out";
    std::string config_path;

    int q_max = 15;
    int stability_b = 20;
    int k_max = 10;
    int folds = 10;
    int n_trees = 500;
    int mtry = 0;
    double alpha = 0.05;
    std::vector<std::string> bank_names;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--seed", opt.seed, "Master RNG seed (all randomness derives from it)");
    cmd->add_option("--clusters", opt.clusters, "Cluster count K, or 'auto' for bootstrap stability selection");
    cmd->add_option("--threshold", opt.threshold, "Score threshold for selection");
    cmd->add_option("--jobs", opt.jobs, "Worker thread cap (results are identical for any value)");
    cmd->add_option("--out", opt.out_dir, "Output directory");
    cmd->add_option("--config", opt.config_path, "JSON config file; explicit flags override it");
    cmd->add_option("--q-max", opt.q_max, "Factor count scan upper bound");
    cmd->add_option("--folds", opt.folds, "Lasso CV folds");
    cmd->add_option("--trees", opt.n_trees, "Trees per forest");
    cmd->add_option("--mtry", opt.mtry, "Forest mtry (0 = default rule)");
    cmd->add_option("--alpha", opt.alpha, "Selection cut for adjusted p-values");
    cmd->add_option("--stability-b", opt.stability_b, "Bootstrap hierarchies for K selection");
    cmd->add_option("--k-max", opt.k_max, "Largest K scanned by stability selection");
    cmd->add_option("--bank", opt.bank_names, "Method bank (method names, in order)")->delimiter(',');
}

void apply_config_file(const CLI::App* cmd, CommonOptions& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw armada::data_error("cannot open config: " + opt.config_path);
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw armada::data_error("bad config JSON: " + std::string(e.what()));
    }
    auto wants = [&](const char* flag, const char* key) {
        return cfg.contains(key) && cmd->count(flag) == 0;
    };
    if (wants("--seed", "seed")) opt.seed = cfg["seed"].get<std::uint64_t>();
    if (cfg.contains("clusters") && cmd->count("--clusters") == 0) {
        opt.clusters = cfg["clusters"].is_number() ? std::to_string(cfg["clusters"].get<int>())
                                                   : cfg["clusters"].get<std::string>();
    }
    if (wants("--threshold", "threshold")) opt.threshold = cfg["threshold"].get<int>();
    if (wants("--q-max", "q_max")) opt.q_max = cfg["q_max"].get<int>();
    if (wants("--folds", "folds")) opt.folds = cfg["folds"].get<int>();
    if (wants("--trees", "n_trees")) opt.n_trees = cfg["n_trees"].get<int>();
    if (wants("--mtry", "mtry")) opt.mtry = cfg["mtry"].get<int>();
    if (wants("--alpha", "alpha")) opt.alpha = cfg["alpha"].get<double>();
    if (wants("--stability-b", "stability_b")) opt.stability_b = cfg["stability_b"].get<int>();
    if (wants("--k-max", "k_max")) opt.k_max = cfg["k_max"].get<int>();
    if (cfg.contains("bank") && cmd->count("--bank") == 0) {
        opt.bank_names = cfg["bank"].get<std::vector<std::string>>();
    }
}

armada::MethodBank build_bank(const CommonOptions& opt) {
    armada::MethodBank bank;
    std::vector<std::string> names = opt.bank_names;
    if (names.empty()) {
        for (const auto& spec : armada::MethodBank::default_bank().methods) {
            names.push_back(armada::method_kind_name(spec.kind));
        }
    }
    for (const auto& name : names) {
        armada::MethodSpec spec;
        spec.kind = armada::method_kind_from_name(name);
        spec.alpha = opt.alpha;
        spec.folds = opt.folds;
        spec.n_trees = opt.n_trees;
        spec.mtry = opt.mtry;
        spec.q_max = opt.q_max;
        bank.methods.push_back(spec);
    }
    return bank;
}

std::optional<int> parse_clusters(const std::string& s) {
    if (s == "auto") return std::nullopt;
    try {
        return std::stoi(s);
    } catch (...) {
        throw armada::data_error("bad --clusters value: " + s + " (expected an integer or 'auto')");
    }
}

json resolved_config(const CommonOptions& opt, const armada::MethodBank& bank) {
    json cfg;
    cfg["seed"] = opt.seed;
    cfg["clusters"] = opt.clusters;
    cfg["threshold"] = opt.threshold;
    cfg["q_max"] = opt.q_max;
    cfg["folds"] = opt.folds;
    cfg["n_trees"] = opt.n_trees;
    cfg["mtry"] = opt.mtry;
    cfg["alpha"] = opt.alpha;
    cfg["stability_b"] = opt.stability_b;
    cfg["k_max"] = opt.k_max;
    json names = json::array();
    for (const auto& spec : bank.methods) names.push_back(armada::method_kind_name(spec.kind));
    cfg["bank"] = names;
    return cfg;
}

// Collects output paths and writes the closing manifest.
class OutputDir {
  public:
    explicit OutputDir(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    std::string file(const std::string& name) {
        files_.push_back(name);
        return (dir_ / name).string();
    }

    void write_manifest(const std::string& command, const json& config, const json& extra = {}) {
        json manifest;
        manifest["command"] = command;
        manifest["config"] = config;
        if (!extra.is_null() && !extra.empty()) manifest["details"] = extra;
        files_.push_back("manifest.json");
        std::sort(files_.begin(), files_.end());
        manifest["files"] = files_;
        std::ofstream out(dir_ / "manifest.json", std::ios::binary);
        out << manifest.dump(2) << '\n';
    }

    const fs::path& dir() const { return dir_; }

  private:
    fs::path dir_;
    std::vector<std::string> files_;
};

armada::Dataset load_dataset(const std::string& path, const std::string& response,
                             const std::string& kind, bool no_id_column) {
    armada::ResponseKind rk;
    if (kind == "binary") {
        rk = armada::ResponseKind::Binary;
    } else if (kind == "continuous") {
        rk = armada::ResponseKind::Continuous;
    } else {
        throw armada::data_error("bad --kind value: " + kind + " (expected binary|continuous)");
    }
    armada::CsvOptions opts;
    opts.first_column_is_id = !no_id_column;
    return armada::load_csv(path, response, rk, opts);
}

std::string format_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

int run_simulate(const CommonOptions& opt, const std::string& design_name) {
    const armada::SimDesign design = armada::SimDesign::from_name(design_name);
    const armada::SimulatedData sim = armada::simulate_design(design, opt.seed);
    OutputDir out(opt.out_dir);
    armada::save_csv(sim.dataset, out.file("dataset.csv"), "y");
    {
        std::ofstream truth(out.dir() / "truth.csv", std::ios::binary);
        out.file("truth.csv");
        truth << "name,influential,group\n";
        for (int j = 0; j < design.p(); ++j) {
            truth << sim.dataset.covariate_names[static_cast<std::size_t>(j)] << ','
                  << static_cast<int>(sim.truth[static_cast<std::size_t>(j)]) << ','
                  << design.group_names()[static_cast<std::size_t>(design.group_of(j))] << '\n';
        }
    }
    json extra;
    extra["design"] = design.name();
    extra["n"] = design.n;
    extra["p"] = design.p();
    out.write_manifest("simulate", resolved_config(opt, build_bank(opt)), extra);
    return 0;
}

int run_select(const CommonOptions& opt, const std::string& data, const std::string& response,
               const std::string& kind, bool no_id_column, double prefilter_alpha,
               bool export_corrected) {
    armada::Dataset d = load_dataset(data, response, kind, no_id_column);
    const armada::MethodBank bank = build_bank(opt);
    OutputDir out(opt.out_dir);

    json extra;
    if (prefilter_alpha > 0.0) {
        // Optional univariate pre-filter on the raw data.
        const armada::PValueVector pv = armada::raw_pvalues(d.matrix, d.response, d.covariate_names);
        std::vector<int> keep;
        for (std::size_t j = 0; j < pv.values.size(); ++j) {
            if (pv.values[j] < prefilter_alpha) keep.push_back(static_cast<int>(j));
        }
        if (keep.size() < 2) throw armada::data_error("prefilter keeps fewer than 2 covariates");
        armada::Dataset filtered;
        filtered.matrix.resize(d.n(), static_cast<Eigen::Index>(keep.size()));
        for (std::size_t j = 0; j < keep.size(); ++j) {
            filtered.matrix.col(static_cast<Eigen::Index>(j)) = d.matrix.col(keep[j]);
            filtered.covariate_names.push_back(d.covariate_names[static_cast<std::size_t>(keep[j])]);
        }
        filtered.response = d.response;
        filtered.sample_ids = d.sample_ids;
        extra["prefilter_kept"] = keep.size();
        d = std::move(filtered);
    }

    armada::PipelineOptions popts;
    popts.q_max = opt.q_max;
    popts.stability_b = opt.stability_b;
    popts.k_max = opt.k_max;
    const armada::PipelineResult result =
        armada::armada_pipeline(d, parse_clusters(opt.clusters), bank, opt.seed, popts);

    armada::scores_to_tsv(result.scores, out.file("scores.tsv"));
    armada::partition_to_csv(result.partition, d.covariate_names, out.file("partition.csv"));
    {
        std::ofstream dendro(out.dir() / "dendrogram.json", std::ios::binary);
        out.file("dendrogram.json");
        const armada::Dendrogram tree = armada::agglomerate(armada::standardize(d));
        dendro << armada::dendrogram_to_json(tree) << '\n';
    }
    armada::pvalues_to_csv(armada::raw_pvalues(result.corrected), out.file("pvalues.csv"));
    {
        std::ofstream models(out.dir() / "factor_models.json", std::ios::binary);
        out.file("factor_models.json");
        models << "[";
        for (std::size_t k = 0; k < result.corrected.models.size(); ++k) {
            if (k) models << ",";
            models << armada::factor_model_to_json(result.corrected.models[k]);
        }
        models << "]\n";
    }
    {
        std::ofstream sel(out.dir() / "selected.csv", std::ios::binary);
        out.file("selected.csv");
        sel << "rank,name,score\n";
        int rank_pos = 0;
        for (int j : armada::rank(result.scores)) {
            if (result.scores.scores[static_cast<std::size_t>(j)] < opt.threshold) break;
            sel << ++rank_pos << ',' << result.scores.covariate_names[static_cast<std::size_t>(j)] << ','
                << result.scores.scores[static_cast<std::size_t>(j)] << '\n';
        }
    }
    if (result.stability) {
        std::ofstream stab(out.dir() / "stability.csv", std::ios::binary);
        out.file("stability.csv");
        stab << "k,mean_stability\n";
        stab.precision(17);
        for (std::size_t i = 0; i < result.stability->k_values.size(); ++i) {
            stab << result.stability->k_values[i] << ',' << result.stability->mean_stability[i] << '\n';
        }
    }
    if (export_corrected) {
        armada::Dataset corrected_ds;
        corrected_ds.matrix = result.corrected.matrix;
        corrected_ds.covariate_names = d.covariate_names;
        corrected_ds.response = d.response;
        corrected_ds.sample_ids = d.sample_ids;
        armada::save_csv(corrected_ds, out.file("corrected.csv"), response);
    }
    extra["chosen_k"] = result.scores.chosen_k;
    extra["n"] = d.n();
    extra["p"] = d.p();
    out.write_manifest("select", resolved_config(opt, bank), extra);
    return 0;
}

int run_benchmark_cmd(const CommonOptions& opt, const std::string& design_name, bool pretreat_compare) {
    const armada::SimDesign design = armada::SimDesign::from_name(design_name);
    const armada::MethodBank bank = build_bank(opt);
    OutputDir out(opt.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    const armada::BenchmarkReport report =
        armada::run_benchmark(design, opt.runs, opt.seed, bank, opt.q_max, opt.threshold);
    armada::rates_to_tsv(report, out.file("rates.tsv"));
    armada::roc_to_csv(report, out.file("roc.csv"));
    {
        std::ofstream tpfp(out.dir() / "tp_fp.csv", std::ios::binary);
        out.file("tp_fp.csv");
        tpfp << "run,method,tp,fp\n";
        for (std::size_t m = 0; m < report.method_names.size(); ++m) {
            for (int r = 0; r < report.n_runs; ++r) {
                tpfp << r + 1 << ',' << report.method_names[m] << ','
                     << report.tp[m][static_cast<std::size_t>(r)] << ','
                     << report.fp[m][static_cast<std::size_t>(r)] << '\n';
            }
        }
    }
    {
        std::ofstream means(out.dir() / "mean_scores.csv", std::ios::binary);
        out.file("mean_scores.csv");
        means.precision(17);
        means << "covariate,group,mean_score\n";
        for (int j = 0; j < design.p(); ++j) {
            means << j + 1 << ',' << design.group_names()[static_cast<std::size_t>(design.group_of(j))]
                  << ',' << report.mean_scores[static_cast<std::size_t>(j)] << '\n';
        }
    }
    {
        std::vector<std::pair<double, double>> curve;
        for (int j = 0; j < design.p(); ++j) {
            curve.emplace_back(j + 1, report.mean_scores[static_cast<std::size_t>(j)]);
        }
        armada::save_curves_svg(out.file("mean_scores.svg"), "Mean score per covariate", "covariate",
                                "mean score", {"ARMADA"}, {curve});
    }
    armada::save_boxplot_svg(out.file("score_boxplot.svg"), "Scores by effect group",
                             report.rates[0].groups, report.scores_by_group);
    {
        std::vector<std::vector<std::pair<double, double>>> curves;
        for (const auto& roc : report.mean_roc) {
            std::vector<std::pair<double, double>> c;
            for (std::size_t g = 0; g < roc.fpr.size(); ++g) c.emplace_back(roc.fpr[g], roc.tpr[g]);
            curves.push_back(std::move(c));
        }
        armada::save_curves_svg(out.file("roc.svg"), "Mean ROC curves", "1 - specificity",
                                "sensitivity", report.method_names, curves);
    }

    if (pretreat_compare) {
        const armada::PretreatComparison cmp =
            armada::compare_pretreatments(design, opt.runs, opt.seed, opt.q_max);
        armada::tp_fp_to_csv(cmp, out.file("pretreat_tp_fp.csv"));
        const std::vector<std::string> labels = {"1: nothing", "2: global", "3: clustered"};
        auto to_double = [](const std::vector<int>& v) {
            return std::vector<double>(v.begin(), v.end());
        };
        armada::save_boxplot_svg(out.file("pretreat_tp.svg"), "True positives by pretreatment", labels,
                                 {to_double(cmp.tp[0]), to_double(cmp.tp[1]), to_double(cmp.tp[2])});
        armada::save_boxplot_svg(out.file("pretreat_fp.svg"), "False positives by pretreatment", labels,
                                 {to_double(cmp.fp[0]), to_double(cmp.fp[1]), to_double(cmp.fp[2])});
    }

    // Wall-clock timings; the one output that cannot be run-to-run identical.
    {
        json times;
        times["total_seconds"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        json per_method;
        for (std::size_t m = 0; m < report.method_names.size(); ++m) {
            per_method[report.method_names[m]] = report.mean_runtime_seconds[m];
        }
        times["mean_seconds_per_run"] = per_method;
        std::ofstream rt(out.dir() / "runtimes.json", std::ios::binary);
        out.file("runtimes.json");
        rt << times.dump(2) << '\n';
    }

    json extra;
    extra["design"] = design.name();
    extra["runs"] = report.n_runs;
    extra["noise_score_zero_fraction"] = report.noise_score_zero_fraction;
    out.write_manifest("benchmark", resolved_config(opt, bank), extra);
    return 0;
}

int run_bootstrap(const CommonOptions& opt, const std::string& data, const std::string& response,
                  const std::string& kind, bool no_id_column, int b) {
    const armada::Dataset d = load_dataset(data, response, kind, no_id_column);
    const armada::MethodBank bank = build_bank(opt);
    const std::optional<int> k = parse_clusters(opt.clusters);
    OutputDir out(opt.out_dir);

    armada::PipelineOptions popts;
    popts.q_max = opt.q_max;
    popts.stability_b = opt.stability_b;
    popts.k_max = opt.k_max;
    const armada::ScoreVector original = armada::armada_scores(d, k, bank, opt.seed, popts);
    const armada::BootstrapScores boot = armada::bootstrap_scores(d, b, bank, opt.seed, k);

    {
        std::ofstream csv(out.dir() / "bootstrap_scores.csv", std::ios::binary);
        out.file("bootstrap_scores.csv");
        csv.precision(17);
        csv << "name,original_score,bootstrap_mean,bootstrap_median\n";
        for (std::size_t j = 0; j < boot.mean_scores.size(); ++j) {
            csv << d.covariate_names[j] << ',' << original.scores[j] << ',' << boot.mean_scores[j] << ','
                << boot.median_scores[j] << '\n';
        }
    }
    json extra;
    extra["replicates"] = b;
    extra["chosen_k"] = original.chosen_k;
    out.write_manifest("bootstrap", resolved_config(opt, bank), extra);
    return 0;
}

int run_heatmap(const CommonOptions& opt, const std::string& data, const std::string& response,
                const std::string& kind, bool no_id_column, const std::string& scores_path,
                int min_score, const std::string& linkage_name) {
    const armada::Dataset d = load_dataset(data, response, kind, no_id_column);
    OutputDir out(opt.out_dir);

    // Scores TSV: name <tab> score [...]; selection by score >= min_score.
    std::ifstream in(scores_path);
    if (!in) throw armada::data_error("cannot open scores file: " + scores_path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<int> selected;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto tab1 = line.find('\t');
        if (tab1 == std::string::npos) throw armada::data_error("bad scores line: " + line);
        auto tab2 = line.find('\t', tab1 + 1);
        if (tab2 == std::string::npos) tab2 = line.size();
        const std::string name = line.substr(0, tab1);
        const int score = std::stoi(line.substr(tab1 + 1, tab2 - tab1 - 1));
        if (row >= d.covariate_names.size() || d.covariate_names[row] != name) {
            throw armada::data_error("scores file does not match dataset at row " + std::to_string(row + 1));
        }
        if (score >= min_score) selected.push_back(static_cast<int>(row));
        ++row;
    }

    armada::Linkage linkage;
    if (linkage_name == "complete") {
        linkage = armada::Linkage::Complete;
    } else if (linkage_name == "average") {
        linkage = armada::Linkage::Average;
    } else if (linkage_name == "single") {
        linkage = armada::Linkage::Single;
    } else {
        throw armada::data_error("bad --linkage value: " + linkage_name);
    }

    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(d.n()));
    for (Eigen::Index i = 0; i < d.n(); ++i) labels.push_back(format_label(d.response.values[i]));
    armada::cocluster_heatmap(d, selected, labels, out.file("heatmap.svg"), linkage);

    json extra;
    extra["selected"] = selected.size();
    extra["min_score"] = min_score;
    extra["linkage"] = linkage_name;
    out.write_manifest("heatmap", resolved_config(opt, build_bank(opt)), extra);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ARMADA: aggregated covariate selection under dependence"};
    app.require_subcommand(1);

    CommonOptions opt;
    std::string design_name = "main";
    std::string data, response = "y", kind = "binary";
    bool no_id_column = false;
    bool pretreat_compare = false;
    bool export_corrected = false;
    double prefilter_alpha = 0.0;
    int bootstrap_b = 100;
    std::string scores_path;
    int min_score = 1;
    std::string linkage_name = "complete";

    CLI::App* simulate = app.add_subcommand("simulate", "Write one simulated design to CSV");
    simulate->add_option("--design", design_name, "main|mixture|regression");
    add_common_flags(simulate, opt);

    CLI::App* select_cmd = app.add_subcommand("select", "Score and rank the covariates of a dataset");
    select_cmd->add_option("--data", data, "Input CSV")->required();
    select_cmd->add_option("--response", response, "Response column name");
    select_cmd->add_option("--kind", kind, "binary|continuous");
    select_cmd->add_flag("--no-id-column", no_id_column, "First CSV column is data, not sample ids");
    select_cmd->add_option("--prefilter-wilcoxon", prefilter_alpha,
                           "Drop covariates with raw test p >= this before the pipeline (0 = off)");
    select_cmd->add_flag("--export-corrected", export_corrected, "Also write the corrected matrix");
    add_common_flags(select_cmd, opt);

    CLI::App* benchmark = app.add_subcommand("benchmark", "Run a simulation benchmark");
    benchmark->add_option("--design", design_name, "main|mixture|regression");
    benchmark->add_option("--runs", opt.runs, "Simulation runs");
    benchmark->add_flag("--pretreat-compare", pretreat_compare,
                        "Also compare the three pretreatment procedures");
    add_common_flags(benchmark, opt);

    CLI::App* bootstrap = app.add_subcommand("bootstrap", "Bootstrap stability of the scores");
    bootstrap->add_option("--data", data, "Input CSV")->required();
    bootstrap->add_option("--response", response, "Response column name");
    bootstrap->add_option("--kind", kind, "binary|continuous");
    bootstrap->add_flag("--no-id-column", no_id_column, "First CSV column is data, not sample ids");
    bootstrap->add_option("--b", bootstrap_b, "Bootstrap replicates");
    add_common_flags(bootstrap, opt);

    CLI::App* heatmap = app.add_subcommand("heatmap", "Co-clustered heatmap of selected covariates");
    heatmap->add_option("--data", data, "Input CSV")->required();
    heatmap->add_option("--response", response, "Response column name");
    heatmap->add_option("--kind", kind, "binary|continuous");
    heatmap->add_flag("--no-id-column", no_id_column, "First CSV column is data, not sample ids");
    heatmap->add_option("--scores", scores_path, "scores.tsv from `select`")->required();
    heatmap->add_option("--min-score", min_score, "Keep covariates with score >= this");
    heatmap->add_option("--linkage", linkage_name, "complete|average|single");
    add_common_flags(heatmap, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        CLI::App* cmd = app.get_subcommands().front();
        apply_config_file(cmd, opt);
        if (opt.jobs > 0) armada::set_max_jobs(opt.jobs);

        if (cmd == simulate) return run_simulate(opt, design_name);
        if (cmd == select_cmd) {
            return run_select(opt, data, response, kind, no_id_column, prefilter_alpha, export_corrected);
        }
        if (cmd == benchmark) return run_benchmark_cmd(opt, design_name, pretreat_compare);
        if (cmd == bootstrap) return run_bootstrap(opt, data, response, kind, no_id_column, bootstrap_b);
        if (cmd == heatmap) {
            return run_heatmap(opt, data, response, kind, no_id_column, scores_path, min_score, linkage_name);
        }
        return 1;
    } catch (const armada::data_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
