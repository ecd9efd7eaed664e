#include "imgclass/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace imgclass {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

std::vector<std::vector<double>> kmeanspp_init(
    const std::vector<std::vector<double>>& points, int k, std::mt19937_64& rng) {
    const std::size_t n = points.size();
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    std::uniform_int_distribution<std::size_t> uniform(0, n - 1);
    centers.push_back(points[uniform(rng)]);

    std::vector<double> dist2(n);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centers) best = std::min(best, sq_dist(points[i], c));
            dist2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            centers.push_back(points[uniform(rng)]);
            continue;
        }
        std::uniform_real_distribution<double> pick(0.0, total);
        double target = pick(rng);
        std::size_t chosen = n - 1;
        for (std::size_t i = 0; i < n; ++i) {
            target -= dist2[i];
            if (target <= 0.0) {
                chosen = i;
                break;
            }
        }
        centers.push_back(points[chosen]);
    }
    return centers;
}

} // namespace

Codebook kmeans_fit(const std::vector<std::vector<double>>& descriptors, int k,
                    std::uint64_t seed, int max_iter) {
    if (k < 2) {
        throw std::invalid_argument("kmeans_fit: k must be >= 2");
    }
    const std::size_t n = descriptors.size();
    if (n < static_cast<std::size_t>(k)) {
        throw InsufficientDataError("kmeans_fit: " + std::to_string(n) +
                                    " descriptors for k=" + std::to_string(k));
    }
    const std::size_t dim = descriptors.front().size();

    Codebook cb;
    cb.k = k;
    cb.feature_means.assign(dim, 0.0);
    cb.feature_stds.assign(dim, 0.0);
    for (const auto& d : descriptors) {
        for (std::size_t j = 0; j < dim; ++j) cb.feature_means[j] += d[j];
    }
    for (double& m : cb.feature_means) m /= static_cast<double>(n);
    for (const auto& d : descriptors) {
        for (std::size_t j = 0; j < dim; ++j) {
            const double x = d[j] - cb.feature_means[j];
            cb.feature_stds[j] += x * x;
        }
    }
    for (double& s : cb.feature_stds) {
        s = std::max(std::sqrt(s / static_cast<double>(n)), 1e-12);
    }

    std::vector<std::vector<double>> points(n, std::vector<double>(dim));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < dim; ++j) {
            points[i][j] = (descriptors[i][j] - cb.feature_means[j]) / cb.feature_stds[j];
        }
    }

    std::mt19937_64 rng(seed);
    cb.centroids = kmeanspp_init(points, k, rng);

    std::vector<int> assign(n, -1);
    std::vector<int> prev_assign;
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment step, ties toward the lower index
        double sse = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(points[i], cb.centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = sq_dist(points[i], cb.centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assign[i] = best;
            sse += best_d;
        }
        cb.objective_trace.push_back(sse);
        if (assign == prev_assign) break;
        prev_assign = assign;

        // update step
        std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
        std::vector<long> counts(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += points[i][j];
            ++counts[assign[i]];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) {
                // reseed to the point farthest from its assigned centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    const double d = sq_dist(points[i], cb.centroids[assign[i]]);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                cb.centroids[c] = points[far];
            } else {
                for (std::size_t j = 0; j < dim; ++j) {
                    cb.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
                }
            }
        }
    }
    return cb;
}

int assign_label(std::span<const double> descriptor, const Codebook& cb) {
    if (descriptor.size() != cb.feature_means.size()) {
        throw std::invalid_argument("assign_label: descriptor length " +
                                    std::to_string(descriptor.size()) +
                                    " does not match codebook dimension " +
                                    std::to_string(cb.feature_means.size()));
    }
    std::vector<double> z(descriptor.size());
    for (std::size_t j = 0; j < z.size(); ++j) {
        z[j] = (descriptor[j] - cb.feature_means[j]) / cb.feature_stds[j];
    }
    int best = 0;
    double best_d = sq_dist(z, cb.centroids[0]);
    for (int c = 1; c < cb.k; ++c) {
        const double d = sq_dist(z, cb.centroids[c]);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best + 1; // labels are 1-based
}

LabelVector label_image(const GrayImage& img, const Codebook& cb,
                        const FeatureConfig& cfg) {
    LabelVector lv;
    for (const GrayImage& block : partition_blocks(img, cfg.grid)) {
        lv.labels.push_back(assign_label(block_descriptor(block, cfg), cb));
    }
    return lv;
}

} // namespace imgclass
