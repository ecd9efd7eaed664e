#include "imgclass/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace imgclass {

FeatureConfig PipelineConfig::feature_config() const {
    FeatureConfig fc;
    fc.levels = levels;
    fc.offset_dr = offset_dr;
    fc.offset_dc = offset_dc;
    fc.k_sup = k_sup;
    fc.seed = seed;
    fc.tol = tol;
    fc.max_iter = max_iter;
    fc.grid = grid;
    return fc;
}

void PipelineConfig::validate() const {
    if (grid.rows < 1 || grid.cols < 1) throw std::invalid_argument("grid must be positive");
    if (levels < 2) throw std::invalid_argument("levels must be >= 2");
    if (k_sup < 1) throw std::invalid_argument("k_sup must be >= 1");
    if (k_clusters < 2) throw std::invalid_argument("k must be >= 2");
    if (threshold_multiplier < 0.0) throw std::invalid_argument("threshold_mult must be >= 0");
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw std::invalid_argument("train_frac must be in (0,1)");
    }
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

namespace {

std::pair<int, int> parse_grid(const std::string& s) {
    const auto x = s.find_first_of("xX");
    if (x == std::string::npos) {
        throw std::invalid_argument("grid must look like ROWSxCOLS, got '" + s + "'");
    }
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

std::pair<int, int> parse_offset(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("offset must look like DR,DC, got '" + s + "'");
    }
    return {std::stoi(s.substr(0, comma)), std::stoi(s.substr(comma + 1))};
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

std::map<std::string, std::string> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + path);
    }
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": expected key=value");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_config(PipelineConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "grid") {
            auto [r, c] = parse_grid(value);
            cfg.grid = {r, c};
        } else if (key == "levels") {
            cfg.levels = std::stoi(value);
        } else if (key == "offset") {
            auto [dr, dc] = parse_offset(value);
            cfg.offset_dr = dr;
            cfg.offset_dc = dc;
        } else if (key == "k_sup") {
            cfg.k_sup = std::stoi(value);
        } else if (key == "k") {
            cfg.k_clusters = std::stoi(value);
        } else if (key == "classifier") {
            cfg.classifier = structure_kind_from_string(value);
        } else if (key == "threshold_mult") {
            cfg.threshold_multiplier = std::stod(value);
        } else if (key == "root") {
            cfg.root_override = std::stoi(value);
        } else if (key == "train_frac") {
            cfg.train_fraction = std::stod(value);
        } else if (key == "seed") {
            cfg.seed = std::stoull(value);
        } else if (key == "tol") {
            cfg.tol = std::stod(value);
        } else if (key == "max_iter") {
            cfg.max_iter = std::stoi(value);
        } else {
            throw std::runtime_error("unknown config key: " + key);
        }
    }
}

std::vector<std::string> DescriptorTable::sorted_unique_classes() const {
    std::set<std::string> names(class_names.begin(), class_names.end());
    return {names.begin(), names.end()};
}

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Run fn(i) for i in [0, count) across worker threads; each index writes
// only its own output slot, so results are deterministic.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const unsigned workers =
        std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next++; i < count; i = next++) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace

DescriptorTable cmd_extract(const PipelineConfig& cfg, const std::string& image_dir,
                            const std::string& out_csv) {
    cfg.validate();
    if (!fs::is_directory(image_dir)) {
        throw std::runtime_error("not a directory: " + image_dir);
    }

    // class subdirectories, lexicographic; files likewise
    std::vector<std::pair<std::string, std::string>> entries; // (class, path)
    std::vector<std::string> class_dirs;
    for (const auto& e : fs::directory_iterator(image_dir)) {
        if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    for (const auto& cls : class_dirs) {
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(fs::path(image_dir) / cls)) {
            if (e.is_regular_file() && e.path().extension() == ".pgm") {
                files.push_back(e.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        for (auto& f : files) entries.emplace_back(cls, std::move(f));
    }
    if (entries.empty()) {
        throw std::runtime_error("no images found under " + image_dir);
    }

    const FeatureConfig fc = cfg.feature_config();
    DescriptorTable table;
    table.descriptor_width = cfg.grid.rows * cfg.grid.cols * descriptor_length(cfg.k_sup);
    table.paths.resize(entries.size());
    table.class_names.resize(entries.size());
    table.rows.resize(entries.size());

    parallel_for(entries.size(), [&](std::size_t i) {
        const auto& [cls, path] = entries[i];
        GrayImage img;
        try {
            img = load_pgm(path);
        } catch (const std::exception& e) {
            throw std::runtime_error("failed to decode " + path + ": " + e.what());
        }
        std::vector<double> row;
        row.reserve(table.descriptor_width);
        for (const GrayImage& block : partition_blocks(img, cfg.grid)) {
            const auto d = block_descriptor(block, fc);
            row.insert(row.end(), d.begin(), d.end());
        }
        table.paths[i] = path;
        table.class_names[i] = cls;
        table.rows[i] = std::move(row);
    });

    if (!out_csv.empty()) write_descriptor_csv(table, out_csv);
    return table;
}

void write_descriptor_csv(const DescriptorTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    out << "path,class";
    for (int j = 0; j < table.descriptor_width; ++j) out << ",d" << j;
    out << "\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        out << table.paths[i] << "," << table.class_names[i];
        for (double v : table.rows[i]) out << "," << format_double(v);
        out << "\n";
    }
}

DescriptorTable read_descriptor_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open descriptor table " + path);
    }
    DescriptorTable table;
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error(path + ": empty descriptor table");
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        table.paths.push_back(field);
        std::getline(ss, field, ',');
        table.class_names.push_back(field);
        std::vector<double> row;
        while (std::getline(ss, field, ',')) row.push_back(std::stod(field));
        if (table.descriptor_width == 0) {
            table.descriptor_width = static_cast<int>(row.size());
        } else if (static_cast<int>(row.size()) != table.descriptor_width) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": inconsistent row width");
        }
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty()) {
        throw std::runtime_error(path + ": no data rows");
    }
    return table;
}

namespace {

// Slice an image row into its per-block descriptors.
std::vector<std::span<const double>> row_blocks(const std::vector<double>& row,
                                                int block_len) {
    std::vector<std::span<const double>> out;
    for (std::size_t off = 0; off + block_len <= row.size(); off += block_len) {
        out.emplace_back(row.data() + off, static_cast<std::size_t>(block_len));
    }
    return out;
}

std::vector<int> class_ids_for(const DescriptorTable& table,
                               const std::vector<std::string>& class_names) {
    std::vector<int> ids;
    ids.reserve(table.rows.size());
    for (const auto& name : table.class_names) {
        const auto it = std::find(class_names.begin(), class_names.end(), name);
        if (it == class_names.end()) {
            throw std::runtime_error("class '" + name + "' not known to the model");
        }
        ids.push_back(static_cast<int>(it - class_names.begin()));
    }
    return ids;
}

DiscreteDataset build_dataset(const DescriptorTable& table,
                              const std::vector<std::size_t>& rows,
                              const std::vector<int>& class_ids, const Codebook& cb,
                              int block_len, int class_count) {
    DiscreteDataset ds;
    ds.class_count = class_count;
    for (std::size_t r : rows) {
        std::vector<int> values;
        for (auto block : row_blocks(table.rows[r], block_len)) {
            values.push_back(assign_label(block, cb) - 1); // to 0-based
        }
        if (ds.n_attrs == 0) {
            ds.n_attrs = static_cast<int>(values.size());
            ds.cardinalities.assign(ds.n_attrs, cb.k);
        }
        ds.instances.push_back(std::move(values));
        ds.classes.push_back(class_ids[r]);
    }
    return ds;
}

std::pair<NetworkStructure, ConditionalProbabilityTable>
learn_classifier(const DiscreteDataset& train, StructureKind kind,
                 double threshold_multiplier, std::optional<int> root_override) {
    NetworkStructure s;
    switch (kind) {
        case StructureKind::NaiveBayes:
            s = construct_nb(train);
            break;
        case StructureKind::Tan:
            s = construct_tan(train, root_override).first;
            break;
        case StructureKind::Fan:
            s = construct_fan(train, threshold_multiplier).first;
            break;
    }
    ConditionalProbabilityTable cpt = fit_parameters(train, s);
    return {std::move(s), std::move(cpt)};
}

} // namespace

Model cmd_train(const PipelineConfig& cfg, const DescriptorTable& table,
                const std::string& model_out) {
    cfg.validate();
    Model model;
    model.config = cfg;
    model.class_names = table.sorted_unique_classes();
    const std::vector<int> class_ids = class_ids_for(table, model.class_names);

    const auto [train_rows, test_rows] =
        stratified_split(class_ids, cfg.train_fraction, cfg.seed);
    for (std::size_t r : train_rows) model.train_paths.push_back(table.paths[r]);
    for (std::size_t r : test_rows) model.test_paths.push_back(table.paths[r]);

    const int block_len = descriptor_length(cfg.k_sup);
    std::vector<std::vector<double>> train_blocks;
    for (std::size_t r : train_rows) {
        for (auto block : row_blocks(table.rows[r], block_len)) {
            train_blocks.emplace_back(block.begin(), block.end());
        }
    }
    model.codebook = kmeans_fit(train_blocks, cfg.k_clusters, cfg.seed);

    const DiscreteDataset train =
        build_dataset(table, train_rows, class_ids, model.codebook, block_len,
                      static_cast<int>(model.class_names.size()));
    std::tie(model.structure, model.cpt) = learn_classifier(
        train, cfg.classifier, cfg.threshold_multiplier, cfg.root_override);

    if (!model_out.empty()) write_model_json(model, model_out);
    return model;
}

namespace {

ordered_json config_to_json(const PipelineConfig& cfg) {
    ordered_json j;
    j["grid_rows"] = cfg.grid.rows;
    j["grid_cols"] = cfg.grid.cols;
    j["levels"] = cfg.levels;
    j["offset_dr"] = cfg.offset_dr;
    j["offset_dc"] = cfg.offset_dc;
    j["k_sup"] = cfg.k_sup;
    j["k"] = cfg.k_clusters;
    j["classifier"] = to_string(cfg.classifier);
    j["threshold_mult"] = cfg.threshold_multiplier;
    if (cfg.root_override) j["root"] = *cfg.root_override;
    j["train_frac"] = cfg.train_fraction;
    j["seed"] = cfg.seed;
    j["tol"] = cfg.tol;
    j["max_iter"] = cfg.max_iter;
    return j;
}

PipelineConfig config_from_json(const ordered_json& j) {
    PipelineConfig cfg;
    cfg.grid = {j.at("grid_rows").get<int>(), j.at("grid_cols").get<int>()};
    cfg.levels = j.at("levels").get<int>();
    cfg.offset_dr = j.at("offset_dr").get<int>();
    cfg.offset_dc = j.at("offset_dc").get<int>();
    cfg.k_sup = j.at("k_sup").get<int>();
    cfg.k_clusters = j.at("k").get<int>();
    cfg.classifier = structure_kind_from_string(j.at("classifier").get<std::string>());
    cfg.threshold_multiplier = j.at("threshold_mult").get<double>();
    if (j.contains("root")) cfg.root_override = j.at("root").get<int>();
    cfg.train_fraction = j.at("train_frac").get<double>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.tol = j.at("tol").get<double>();
    cfg.max_iter = j.at("max_iter").get<int>();
    return cfg;
}

} // namespace

void write_model_json(const Model& model, const std::string& path) {
    ordered_json j;
    j["format"] = "imgclass-model-v1";
    j["config"] = config_to_json(model.config);
    j["class_names"] = model.class_names;
    j["structure"]["kind"] = to_string(model.structure.kind);
    j["structure"]["attr_parent"] = model.structure.attr_parent;
    j["structure"]["root"] = model.structure.root;
    j["cardinalities"] = model.cpt.cardinalities;
    j["class_prior"] = model.cpt.class_prior;
    j["tables"] = model.cpt.tables;
    j["codebook"]["k"] = model.codebook.k;
    j["codebook"]["centroids"] = model.codebook.centroids;
    j["codebook"]["feature_means"] = model.codebook.feature_means;
    j["codebook"]["feature_stds"] = model.codebook.feature_stds;
    j["split"]["train"] = model.train_paths;
    j["split"]["test"] = model.test_paths;

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write model file " + path);
    }
    out << j.dump(2) << "\n";
}

Model read_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open model file " + path);
    }
    ordered_json j = ordered_json::parse(in);
    if (j.value("format", "") != "imgclass-model-v1") {
        throw std::runtime_error(path + ": not an imgclass model file");
    }
    Model model;
    model.config = config_from_json(j.at("config"));
    model.class_names = j.at("class_names").get<std::vector<std::string>>();
    model.structure.kind =
        structure_kind_from_string(j.at("structure").at("kind").get<std::string>());
    model.structure.attr_parent = j.at("structure").at("attr_parent").get<std::vector<int>>();
    model.structure.root = j.at("structure").at("root").get<int>();
    model.cpt.cardinalities = j.at("cardinalities").get<std::vector<int>>();
    model.cpt.class_prior = j.at("class_prior").get<std::vector<double>>();
    model.cpt.tables = j.at("tables").get<std::vector<std::vector<double>>>();
    model.codebook.k = j.at("codebook").at("k").get<int>();
    model.codebook.centroids =
        j.at("codebook").at("centroids").get<std::vector<std::vector<double>>>();
    model.codebook.feature_means =
        j.at("codebook").at("feature_means").get<std::vector<double>>();
    model.codebook.feature_stds =
        j.at("codebook").at("feature_stds").get<std::vector<double>>();
    model.train_paths = j.at("split").at("train").get<std::vector<std::string>>();
    model.test_paths = j.at("split").at("test").get<std::vector<std::string>>();
    return model;
}

EvalReport cmd_evaluate(const Model& model, const DescriptorTable& table,
                        EvalSubset subset, const std::string& report_prefix) {
    const int block_len = descriptor_length(model.config.k_sup);
    if (table.descriptor_width !=
        model.config.grid.rows * model.config.grid.cols * block_len) {
        throw std::runtime_error("descriptor table width " +
                                 std::to_string(table.descriptor_width) +
                                 " does not match model configuration");
    }
    const std::vector<int> class_ids = class_ids_for(table, model.class_names);

    std::vector<std::size_t> rows;
    if (subset == EvalSubset::All) {
        rows.resize(table.rows.size());
        std::iota(rows.begin(), rows.end(), 0);
    } else {
        const auto& wanted =
            subset == EvalSubset::Train ? model.train_paths : model.test_paths;
        const std::set<std::string> want(wanted.begin(), wanted.end());
        for (std::size_t i = 0; i < table.paths.size(); ++i) {
            if (want.count(table.paths[i])) rows.push_back(i);
        }
        if (rows.empty()) {
            throw std::runtime_error("no table rows match the model's split manifest");
        }
    }

    const DiscreteDataset ds =
        build_dataset(table, rows, class_ids, model.codebook, block_len,
                      static_cast<int>(model.class_names.size()));
    EvalReport report = evaluate(model.cpt, model.structure, ds);
    report.split_seed = model.config.seed;
    report.k_clusters = model.config.k_clusters;
    report.classifier = model.structure.kind;
    report.threshold_multiplier = model.config.threshold_multiplier;

    if (!report_prefix.empty()) {
        const char* subset_name = subset == EvalSubset::Train   ? "training set"
                                  : subset == EvalSubset::Test ? "test set"
                                                               : "all";
        std::ofstream txt(report_prefix + ".txt", std::ios::binary);
        txt << "classifier=" << to_string(model.structure.kind)
            << " k=" << model.config.k_clusters << "\n";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-20s %-13s ", "classifier", "set");
        txt << buf;
        for (const auto& name : model.class_names) {
            std::snprintf(buf, sizeof(buf), "%-10s", name.c_str());
            txt << buf;
        }
        txt << "mean\n";
        std::snprintf(buf, sizeof(buf), "%-20s %-13s ",
                      to_string(model.structure.kind).c_str(), subset_name);
        txt << buf;
        for (double a : report.per_class_accuracy) {
            std::snprintf(buf, sizeof(buf), "%-10.2f", a);
            txt << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.2f\n", report.mean_classification);
        txt << buf;

        std::ofstream csv(report_prefix + ".csv", std::ios::binary);
        csv << "classifier,set,k,threshold_mult";
        for (const auto& name : model.class_names) csv << "," << name;
        csv << ",mean_classification,pcc\n";
        csv << to_string(model.structure.kind) << "," << subset_name << ","
            << model.config.k_clusters << ","
            << format_double(model.config.threshold_multiplier);
        for (double a : report.per_class_accuracy) csv << "," << format_double(a);
        csv << "," << format_double(report.mean_classification) << ","
            << format_double(report.pcc) << "\n";
    }
    return report;
}

std::vector<SweepCell> cmd_sweep(const PipelineConfig& cfg, const DescriptorTable& table,
                                 const std::vector<int>& k_values,
                                 const std::vector<double>& multipliers,
                                 const std::vector<StructureKind>& classifiers,
                                 const std::string& out_csv) {
    cfg.validate();
    if (k_values.empty()) {
        throw std::invalid_argument("sweep: k list must be non-empty");
    }
    const std::vector<std::string> class_names = table.sorted_unique_classes();
    const std::vector<int> class_ids = class_ids_for(table, class_names);
    const auto [train_rows, test_rows] =
        stratified_split(class_ids, cfg.train_fraction, cfg.seed);

    const int block_len = descriptor_length(cfg.k_sup);
    std::vector<std::vector<double>> train_blocks;
    for (std::size_t r : train_rows) {
        for (auto block : row_blocks(table.rows[r], block_len)) {
            train_blocks.emplace_back(block.begin(), block.end());
        }
    }

    std::vector<SweepCell> cells;
    for (int k : k_values) {
        const Codebook cb = kmeans_fit(train_blocks, k, cfg.seed);
        const DiscreteDataset train = build_dataset(
            table, train_rows, class_ids, cb, block_len,
            static_cast<int>(class_names.size()));
        const DiscreteDataset test = build_dataset(
            table, test_rows, class_ids, cb, block_len,
            static_cast<int>(class_names.size()));

        for (StructureKind kind : classifiers) {
            const std::vector<double> mults =
                kind == StructureKind::Fan ? multipliers : std::vector<double>{0.0};
            for (double mult : mults) {
                auto [s, cpt] = learn_classifier(train, kind, mult, cfg.root_override);
                SweepCell cell;
                cell.k_clusters = k;
                cell.classifier = kind;
                cell.threshold_multiplier = mult;
                cell.train_report = evaluate(cpt, s, train);
                cell.test_report = evaluate(cpt, s, test);
                cells.push_back(std::move(cell));
            }
        }
    }

    if (!out_csv.empty()) {
        std::ofstream csv(out_csv, std::ios::binary);
        if (!csv) {
            throw std::runtime_error("cannot write " + out_csv);
        }
        csv << "k,classifier,threshold_mult,train_mean,test_mean,train_pcc,test_pcc\n";
        for (const auto& c : cells) {
            csv << c.k_clusters << "," << to_string(c.classifier) << ","
                << format_double(c.threshold_multiplier) << ","
                << format_double(c.train_report.mean_classification) << ","
                << format_double(c.test_report.mean_classification) << ","
                << format_double(c.train_report.pcc) << ","
                << format_double(c.test_report.pcc) << "\n";
        }
    }
    return cells;
}

} // namespace imgclass
