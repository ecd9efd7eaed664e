#ifndef IMGCLASS_PIPELINE_HPP
#define IMGCLASS_PIPELINE_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imgclass/bayesnet.hpp"
#include "imgclass/clustering.hpp"
#include "imgclass/eval.hpp"
#include "imgclass/features.hpp"

namespace imgclass {

struct PipelineConfig {
    BlockGrid grid{4, 4};
    int levels = 8;
    int offset_dr = 0;
    int offset_dc = 1;
    int k_sup = 3;
    int k_clusters = 8;
    StructureKind classifier = StructureKind::Fan;
    double threshold_multiplier = 1.0;
    std::optional<int> root_override;
    double train_fraction = 0.8;
    std::uint64_t seed = 42;
    double tol = 1e-6;
    int max_iter = 200;

    FeatureConfig feature_config() const;
    void validate() const;
};

/// Flat key=value config file; '#' starts a comment. Unknown keys are an
/// error. Returns only the keys present so flag overrides can win.
std::map<std::string, std::string> read_config_file(const std::string& path);
void apply_config(PipelineConfig& cfg, const std::map<std::string, std::string>& kv);

/// One descriptor-table row per image: path, class name, flattened block
/// descriptors (grid.rows*grid.cols blocks of length 2*k_sup+4 each).
struct DescriptorTable {
    std::vector<std::string> paths;
    std::vector<std::string> class_names; // per row
    std::vector<std::vector<double>> rows; // concatenated block descriptors
    int descriptor_width = 0;              // values per row

    std::vector<std::string> sorted_unique_classes() const;
};

/// Walk class subdirectories of `image_dir` (lexicographic order), decode
/// every .pgm, extract block descriptors, and write the table as CSV.
DescriptorTable cmd_extract(const PipelineConfig& cfg, const std::string& image_dir,
                            const std::string& out_csv);

DescriptorTable read_descriptor_csv(const std::string& path);
void write_descriptor_csv(const DescriptorTable& table, const std::string& path);

/// Fully trained classifier plus everything needed to label fresh images.
struct Model {
    PipelineConfig config;
    std::vector<std::string> class_names; // index = class id
    Codebook codebook;
    NetworkStructure structure;
    ConditionalProbabilityTable cpt;
    std::vector<std::string> train_paths;
    std::vector<std::string> test_paths;
};

/// Split, fit the codebook on the training rows only, build label vectors,
/// learn the configured structure, fit Laplace CPTs, and serialize.
Model cmd_train(const PipelineConfig& cfg, const DescriptorTable& table,
                const std::string& model_out);

Model read_model_json(const std::string& path);
void write_model_json(const Model& model, const std::string& path);

enum class EvalSubset { Train, Test, All };

/// Evaluate the model on the selected rows of a descriptor table, writing a
/// text table and a CSV next to `report_prefix`.
EvalReport cmd_evaluate(const Model& model, const DescriptorTable& table,
                        EvalSubset subset, const std::string& report_prefix);

struct SweepCell {
    int k_clusters = 0;
    StructureKind classifier = StructureKind::NaiveBayes;
    double threshold_multiplier = 0.0;
    EvalReport train_report;
    EvalReport test_report;
};

/// Rerun clustering + structure + parameters + evaluation for every k (and
/// every multiplier, for FAN) with the same seed and split; write one CSV row
/// per cell.
std::vector<SweepCell> cmd_sweep(const PipelineConfig& cfg, const DescriptorTable& table,
                                 const std::vector<int>& k_values,
                                 const std::vector<double>& multipliers,
                                 const std::vector<StructureKind>& classifiers,
                                 const std::string& out_csv);

} // namespace imgclass

#endif
