#ifndef IMGCLASS_EVAL_HPP
#define IMGCLASS_EVAL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "imgclass/bayesnet.hpp"

namespace imgclass {

struct EvalReport {
    std::vector<double> per_class_accuracy; // length k
    double mean_classification = 0.0;       // unweighted mean over classes
    double pcc = 0.0;                       // trace(confusion) / total
    std::vector<std::vector<long>> confusion; // [true][predicted]
    std::uint64_t split_seed = 0;
    int k_clusters = 0;
    StructureKind classifier = StructureKind::NaiveBayes;
    double threshold_multiplier = 0.0;
};

/// Per-class seeded shuffle, then a floor(train_fraction * count) cut with at
/// least one instance kept on each side. Returns (train indices, test
/// indices) into `classes`.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& classes, double train_fraction,
                 std::uint64_t seed);

/// Classify every instance by MAP and fill the confusion matrix and derived
/// statistics.
EvalReport evaluate(const ConditionalProbabilityTable& cpt, const NetworkStructure& s,
                    const DiscreteDataset& test);

/// Table 3/4-style aligned text rendering of train/test report pairs.
std::string format_report_table(const std::vector<std::string>& row_labels,
                                const std::vector<std::pair<EvalReport, EvalReport>>& rows,
                                const std::vector<std::string>& class_names);

} // namespace imgclass

#endif
