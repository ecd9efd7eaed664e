#ifndef IMGCLASS_CLUSTERING_HPP
#define IMGCLASS_CLUSTERING_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "imgclass/features.hpp"
#include "imgclass/image.hpp"

namespace imgclass {

/// k-means codebook over z-score-normalized descriptor space. feature_means
/// and feature_stds are the training-corpus statistics and must be reused
/// verbatim when labeling new images.
struct Codebook {
    int k = 0;
    std::vector<std::vector<double>> centroids; // in normalized space
    std::vector<double> feature_means;
    std::vector<double> feature_stds; // floored at 1e-12
    std::vector<double> objective_trace; // within-cluster SSE per Lloyd iteration
};

/// One discrete instance: a 1-based cluster label per block position.
struct LabelVector {
    std::vector<int> labels; // each in [1, k]
    int class_id = -1;       // optional; -1 when unknown
};

Codebook kmeans_fit(const std::vector<std::vector<double>>& descriptors, int k,
                    std::uint64_t seed, int max_iter = 100);

/// 1-based index of the nearest centroid (Euclidean in normalized space),
/// ties toward the lower index.
int assign_label(std::span<const double> descriptor, const Codebook& cb);

/// Partition, extract descriptors, assign labels in block row-major order.
LabelVector label_image(const GrayImage& img, const Codebook& cb, const FeatureConfig& cfg);

} // namespace imgclass

#endif
