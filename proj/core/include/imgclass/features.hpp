#ifndef IMGCLASS_FEATURES_HPP
#define IMGCLASS_FEATURES_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "imgclass/image.hpp"

namespace imgclass {

class InsufficientDataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateBlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normalized, symmetric gray-level co-occurrence matrix.
struct GlcmMatrix {
    int levels = 0;
    std::vector<double> p; // levels x levels, row-major, sums to 1

    double at(int i, int j) const {
        return p[static_cast<std::size_t>(i) * levels + j];
    }
    double& at(int i, int j) {
        return p[static_cast<std::size_t>(i) * levels + j];
    }
};

struct HaralickFeatures {
    double energy = 0.0;
    double entropy = 0.0;
    double contrast = 0.0;
    double homogeneity = 0.0;
};

/// Univariate Gaussian mixture fitted by EM. Components are kept in the
/// order produced by the fit; callers needing a canonical order sort by mean.
struct GmmParams {
    std::vector<double> weights;
    std::vector<double> means;
    std::vector<double> variances;
    double log_likelihood = 0.0;
    std::vector<double> log_likelihood_trace; // one entry per EM iteration

    int component_count() const { return static_cast<int>(weights.size()); }
};

struct BicResult {
    int chosen_k = 0;
    GmmParams params;
    std::vector<double> bic_values; // index K-1
    std::vector<int> free_params;   // 3K-1 for univariate mixtures
    std::size_t n = 0;
};

struct FeatureConfig {
    int levels = 8;           // GLCM quantization levels
    int offset_dr = 0;        // GLCM offset, row delta
    int offset_dc = 1;        // GLCM offset, column delta
    int k_sup = 3;            // max GMM components for BIC selection
    std::uint64_t seed = 42;
    double tol = 1e-6;
    int max_iter = 200;
    BlockGrid grid{4, 4};
};

/// Co-occurrence counts at (dr,dc) and its negation, quantized to `levels`
/// bins by floor(i*levels/(maxval+1)), normalized to sum 1.
GlcmMatrix glcm(const GrayImage& block, int levels, int dr, int dc);

/// Uniform matrix (all entries 1/L^2); substituted for blocks too small to
/// contain any pixel pair at the configured offset.
GlcmMatrix uniform_glcm(int levels);

/// Energy, entropy (natural log, 0*log0 := 0), contrast, homogeneity.
HaralickFeatures haralick(const GlcmMatrix& m);

/// Univariate EM with seeded k-means++ initialization, uniform starting
/// weights and pooled variance. Variances are floored at
/// 1e-6*(sample range)^2 + 1e-12 so components cannot collapse.
GmmParams em_fit_gmm(std::span<const double> samples, int k, std::uint64_t seed,
                     double tol = 1e-6, int max_iter = 200);

/// Fit K = 1..min(k_sup, n) and keep the K minimizing
/// -2*loglik + (3K-1)*ln n, ties broken toward smaller K.
BicResult bic_select(std::span<const double> samples, int k_sup, std::uint64_t seed,
                     double tol = 1e-6, int max_iter = 200);

/// Fixed-layout descriptor: [weights padded to k_sup, means padded to k_sup,
/// energy, entropy, contrast, homogeneity], GMM components sorted by
/// ascending mean. Length is descriptor_length(k_sup).
std::vector<double> block_descriptor(const GrayImage& block, const FeatureConfig& cfg);

inline int descriptor_length(int k_sup) { return 2 * k_sup + 4; }

} // namespace imgclass

#endif
