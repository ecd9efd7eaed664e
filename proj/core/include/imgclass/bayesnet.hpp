#ifndef IMGCLASS_BAYESNET_HPP
#define IMGCLASS_BAYESNET_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imgclass/features.hpp"

namespace imgclass {

/// Discrete training data. Attribute and class values are 0-based here;
/// the 1-based cluster labels of LabelVector are shifted on ingestion.
struct DiscreteDataset {
    int n_attrs = 0;
    std::vector<int> cardinalities; // v_i per attribute
    int class_count = 0;
    std::vector<std::vector<int>> instances; // attribute values, 0-based
    std::vector<int> classes;                // class per instance, 0-based

    std::size_t size() const { return instances.size(); }
};

enum class StructureKind { NaiveBayes, Tan, Fan };

std::string to_string(StructureKind kind);
StructureKind structure_kind_from_string(const std::string& s);

/// Parent sets over attributes. The class is an implicit parent of every
/// attribute; attr_parent[i] is the single attribute parent or -1.
struct NetworkStructure {
    StructureKind kind = StructureKind::NaiveBayes;
    std::vector<int> attr_parent; // -1 = class only
    int root = -1;                // -1 for NB

    int edge_count() const;
};

/// Pairwise conditional mutual information and per-attribute mutual
/// information with the class, all natural-log, clamped at 0.
struct MutualInfoMatrix {
    int n = 0;
    std::vector<double> cmi;      // n x n, symmetric, zero diagonal
    std::vector<double> mi_class; // length n
    double i_avg = 0.0;           // mean off-diagonal CMI

    double at(int i, int j) const {
        return cmi[static_cast<std::size_t>(i) * n + j];
    }
};

/// Laplace-smoothed parameters. tables[i] is flattened:
///   no attribute parent: index [a * k + c], shape v_i x k
///   parent j:            index [(a * v_j + b) * k + c], shape v_i x v_j x k
struct ConditionalProbabilityTable {
    std::vector<int> cardinalities;          // v_i per attribute
    std::vector<double> class_prior;         // length k
    std::vector<std::vector<double>> tables; // one per attribute
};

double conditional_mutual_information(const DiscreteDataset& ds, int i, int j);
double mutual_information_with_class(const DiscreteDataset& ds, int i);
MutualInfoMatrix mutual_info_matrix(const DiscreteDataset& ds);

NetworkStructure construct_nb(const DiscreteDataset& ds);

/// Kruskal maximum-weight spanning tree over CMI weights, ties broken by
/// ascending (min(i,j), max(i,j)); edges directed outward from the root
/// (default attribute 0).
std::pair<NetworkStructure, MutualInfoMatrix>
construct_tan(const DiscreteDataset& ds, std::optional<int> root_override = std::nullopt);

/// TAN rooted at argmax_i I(A_i;C), then directed edges with CMI strictly
/// below threshold_multiplier * I_avg removed. Multiplier 1 is the average-CMI
/// threshold; 0 keeps the whole tree; large values reduce to NB.
std::pair<NetworkStructure, MutualInfoMatrix>
construct_fan(const DiscreteDataset& ds, double threshold_multiplier);

ConditionalProbabilityTable fit_parameters(const DiscreteDataset& ds,
                                           const NetworkStructure& s);

/// Normalized class posterior computed in log space. x holds 0-based values.
std::vector<double> posterior(const ConditionalProbabilityTable& cpt,
                              const NetworkStructure& s, const std::vector<int>& x);

/// MAP class (0-based), ties toward the lowest index.
int classify_map(const ConditionalProbabilityTable& cpt, const NetworkStructure& s,
                 const std::vector<int>& x);

} // namespace imgclass

#endif
