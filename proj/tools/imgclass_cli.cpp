// Command-line front end for the block-feature Bayesian image classifier.
//
//   imgclass extract <image-dir> --out descriptors.csv [--grid 4x4 ...]
//   imgclass train <descriptors.csv> --out model.json [--classifier fan ...]
//   imgclass evaluate <model.json> <descriptors.csv> --out report [--set test]
//   imgclass sweep <descriptors.csv> --k-list 5,8,10,15 --out sweep.csv

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "imgclass/pipeline.hpp"

namespace {

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated int list");
    return out;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated float list");
    return out;
}

struct FlagState {
    std::string config_path;
    std::string grid;
    int levels = -1;
    int k_sup = -1;
    int k = -1;
    std::string classifier;
    double threshold_mult = -1.0;
    int root = -1;
    double train_frac = -1.0;
    long long seed = -1;
};

// Config file first, then explicit flags on top.
imgclass::PipelineConfig resolve_config(const FlagState& f) {
    imgclass::PipelineConfig cfg;
    if (!f.config_path.empty()) {
        imgclass::apply_config(cfg, imgclass::read_config_file(f.config_path));
    }
    if (!f.grid.empty()) {
        imgclass::apply_config(cfg, {{"grid", f.grid}});
    }
    if (f.levels >= 0) cfg.levels = f.levels;
    if (f.k_sup >= 0) cfg.k_sup = f.k_sup;
    if (f.k >= 0) cfg.k_clusters = f.k;
    if (!f.classifier.empty()) {
        cfg.classifier = imgclass::structure_kind_from_string(f.classifier);
    }
    if (f.threshold_mult >= 0.0) cfg.threshold_multiplier = f.threshold_mult;
    if (f.root >= 0) cfg.root_override = f.root;
    if (f.train_frac >= 0.0) cfg.train_fraction = f.train_frac;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    cfg.validate();
    return cfg;
}

void add_common_flags(CLI::App* cmd, FlagState& f) {
    cmd->add_option("--config", f.config_path, "key=value config file");
    cmd->add_option("--grid", f.grid, "block grid, ROWSxCOLS (default 4x4)");
    cmd->add_option("--levels", f.levels, "GLCM quantization levels");
    cmd->add_option("--k-sup", f.k_sup, "max GMM components for BIC");
    cmd->add_option("--k", f.k, "number of k-means clusters");
    cmd->add_option("--classifier", f.classifier, "nb, tan or fan");
    cmd->add_option("--threshold-mult", f.threshold_mult,
                    "FAN pruning threshold as a multiple of the average CMI");
    cmd->add_option("--root", f.root, "TAN root attribute override");
    cmd->add_option("--train-frac", f.train_frac, "training fraction of the split");
    cmd->add_option("--seed", f.seed, "seed for all randomness");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Block-feature Bayesian-network image classifier"};
    app.require_subcommand(1);

    FlagState flags;
    std::string in_dir, in_csv, in_model, out_path;
    std::string subset = "test";
    std::string k_list = "5,8,10,15";
    std::string mult_list = "1.0";
    std::string classifier_list = "nb,tan,fan";

    auto* extract = app.add_subcommand("extract", "Extract block descriptors to CSV");
    extract->add_option("image-dir", in_dir, "directory of class subdirectories of PGM files")
        ->required();
    extract->add_option("--out", out_path, "output CSV path")->required();
    add_common_flags(extract, flags);

    auto* train = app.add_subcommand("train", "Train a classifier from a descriptor table");
    train->add_option("descriptors", in_csv, "descriptor CSV from extract")->required();
    train->add_option("--out", out_path, "output model JSON path")->required();
    add_common_flags(train, flags);

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a model on a descriptor table");
    evaluate->add_option("model", in_model, "model JSON from train")->required();
    evaluate->add_option("descriptors", in_csv, "descriptor CSV")->required();
    evaluate->add_option("--out", out_path, "report path prefix (.txt/.csv appended)")
        ->required();
    evaluate->add_option("--set", subset, "train, test or all (default test)");

    auto* sweep = app.add_subcommand("sweep", "Sweep cluster counts and FAN thresholds");
    sweep->add_option("descriptors", in_csv, "descriptor CSV from extract")->required();
    sweep->add_option("--out", out_path, "output CSV path")->required();
    sweep->add_option("--k-list", k_list, "cluster counts, comma separated");
    sweep->add_option("--mult-list", mult_list, "FAN threshold multipliers");
    sweep->add_option("--classifiers", classifier_list, "subset of nb,tan,fan");
    add_common_flags(sweep, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (extract->parsed()) {
            const auto cfg = resolve_config(flags);
            const auto table = imgclass::cmd_extract(cfg, in_dir, out_path);
            std::cout << "wrote " << table.rows.size() << " rows to " << out_path << "\n";
        } else if (train->parsed()) {
            const auto cfg = resolve_config(flags);
            const auto table = imgclass::read_descriptor_csv(in_csv);
            const auto model = imgclass::cmd_train(cfg, table, out_path);
            std::cout << "trained " << imgclass::to_string(model.structure.kind)
                      << " model (" << model.train_paths.size() << " train / "
                      << model.test_paths.size() << " test) -> " << out_path << "\n";
        } else if (evaluate->parsed()) {
            const auto model = imgclass::read_model_json(in_model);
            const auto table = imgclass::read_descriptor_csv(in_csv);
            imgclass::EvalSubset which;
            if (subset == "train") which = imgclass::EvalSubset::Train;
            else if (subset == "test") which = imgclass::EvalSubset::Test;
            else if (subset == "all") which = imgclass::EvalSubset::All;
            else throw std::runtime_error("--set must be train, test or all");
            const auto report = imgclass::cmd_evaluate(model, table, which, out_path);
            std::cout << "pcc=" << report.pcc
                      << " mean=" << report.mean_classification << "\n";
        } else if (sweep->parsed()) {
            const auto cfg = resolve_config(flags);
            const auto table = imgclass::read_descriptor_csv(in_csv);
            std::vector<imgclass::StructureKind> kinds;
            std::stringstream ss(classifier_list);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                if (!tok.empty()) kinds.push_back(imgclass::structure_kind_from_string(tok));
            }
            const auto cells =
                imgclass::cmd_sweep(cfg, table, parse_int_list(k_list),
                                    parse_double_list(mult_list), kinds, out_path);
            std::cout << "wrote " << cells.size() << " sweep rows to " << out_path << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
