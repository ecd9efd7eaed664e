#include "imgclass/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace imgclass {

GlcmMatrix glcm(const GrayImage& block, int levels, int dr, int dc) {
    if (levels < 2) {
        throw std::invalid_argument("glcm: levels must be >= 2");
    }
    GlcmMatrix m;
    m.levels = levels;
    m.p.assign(static_cast<std::size_t>(levels) * levels, 0.0);

    auto quantize = [&](std::uint16_t v) {
        int q = static_cast<int>(static_cast<long>(v) * levels / (block.maxval + 1));
        return std::min(q, levels - 1);
    };

    long pairs = 0;
    for (int r = 0; r < block.height; ++r) {
        for (int c = 0; c < block.width; ++c) {
            const int r2 = r + dr;
            const int c2 = c + dc;
            if (r2 < 0 || r2 >= block.height || c2 < 0 || c2 >= block.width) continue;
            const int a = quantize(block.at(r, c));
            const int b = quantize(block.at(r2, c2));
            // symmetric accumulation: count the pair and its reverse
            m.at(a, b) += 1.0;
            m.at(b, a) += 1.0;
            pairs += 2;
        }
    }
    if (pairs == 0) {
        throw DegenerateBlockError("glcm: block " + std::to_string(block.height) + "x" +
                                   std::to_string(block.width) +
                                   " has no pixel pair at offset (" + std::to_string(dr) +
                                   "," + std::to_string(dc) + ")");
    }
    for (double& v : m.p) v /= static_cast<double>(pairs);
    return m;
}

GlcmMatrix uniform_glcm(int levels) {
    GlcmMatrix m;
    m.levels = levels;
    m.p.assign(static_cast<std::size_t>(levels) * levels,
               1.0 / (static_cast<double>(levels) * levels));
    return m;
}

HaralickFeatures haralick(const GlcmMatrix& m) {
    HaralickFeatures f;
    for (int i = 0; i < m.levels; ++i) {
        for (int j = 0; j < m.levels; ++j) {
            const double p = m.at(i, j);
            const double d2 = static_cast<double>(i - j) * (i - j);
            f.energy += p * p;
            if (p > 0.0) f.entropy -= p * std::log(p);
            f.contrast += d2 * p;
            f.homogeneity += p / (1.0 + d2);
        }
    }
    return f;
}

namespace {

double variance_floor(std::span<const double> samples) {
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    const double range = *hi - *lo;
    return 1e-6 * range * range + 1e-12;
}

// Seeded k-means++ choice of k initial means.
std::vector<double> init_means(std::span<const double> samples, int k,
                               std::mt19937_64& rng) {
    const std::size_t n = samples.size();
    std::vector<double> means;
    means.reserve(k);
    std::uniform_int_distribution<std::size_t> uniform(0, n - 1);
    means.push_back(samples[uniform(rng)]);

    std::vector<double> dist2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (double mu : means) {
                const double d = samples[i] - mu;
                best = std::min(best, d * d);
            }
            dist2[i] = best;
            total += best;
        }
        if (total <= 0.0) {
            means.push_back(samples[uniform(rng)]);
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
        means.push_back(samples[chosen]);
    }
    return means;
}

double log_normal_pdf(double x, double mu, double var) {
    const double d = x - mu;
    return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

} // namespace

GmmParams em_fit_gmm(std::span<const double> samples, int k, std::uint64_t seed,
                     double tol, int max_iter) {
    if (k < 1) {
        throw std::invalid_argument("em_fit_gmm: k must be >= 1");
    }
    const std::size_t n = samples.size();
    if (n < static_cast<std::size_t>(k)) {
        throw InsufficientDataError("em_fit_gmm: " + std::to_string(n) +
                                    " samples for k=" + std::to_string(k));
    }

    const double floor = variance_floor(samples);
    const double mean =
        std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);
    double pooled = 0.0;
    for (double x : samples) pooled += (x - mean) * (x - mean);
    pooled = std::max(pooled / static_cast<double>(n), floor);

    std::mt19937_64 rng(seed);
    GmmParams g;
    g.means = init_means(samples, k, rng);
    g.weights.assign(k, 1.0 / k);
    g.variances.assign(k, pooled);

    std::vector<double> resp(static_cast<std::size_t>(n) * k);
    std::vector<double> log_terms(k);
    double prev_ll = -std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        // E-step with log-sum-exp per sample
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double max_term = -std::numeric_limits<double>::infinity();
            for (int c = 0; c < k; ++c) {
                log_terms[c] = std::log(g.weights[c]) +
                               log_normal_pdf(samples[i], g.means[c], g.variances[c]);
                max_term = std::max(max_term, log_terms[c]);
            }
            double sum = 0.0;
            for (int c = 0; c < k; ++c) sum += std::exp(log_terms[c] - max_term);
            const double log_px = max_term + std::log(sum);
            ll += log_px;
            for (int c = 0; c < k; ++c) {
                resp[i * k + c] = std::exp(log_terms[c] - log_px);
            }
        }
        g.log_likelihood = ll;
        g.log_likelihood_trace.push_back(ll);

        if (ll - prev_ll < tol && iter > 0) break;
        prev_ll = ll;

        // M-step
        for (int c = 0; c < k; ++c) {
            double nc = 0.0, sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nc += resp[i * k + c];
                sum += resp[i * k + c] * samples[i];
            }
            if (nc <= 0.0) {
                // dead component: park it on the floor, weight stays ~0
                g.weights[c] = 1e-300;
                g.variances[c] = floor;
                continue;
            }
            g.weights[c] = nc / static_cast<double>(n);
            g.means[c] = sum / nc;
            double var = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = samples[i] - g.means[c];
                var += resp[i * k + c] * d * d;
            }
            g.variances[c] = std::max(var / nc, floor);
        }
        // renormalize weights after any flooring
        const double wsum = std::accumulate(g.weights.begin(), g.weights.end(), 0.0);
        for (double& w : g.weights) w /= wsum;
    }
    return g;
}

BicResult bic_select(std::span<const double> samples, int k_sup, std::uint64_t seed,
                     double tol, int max_iter) {
    if (samples.empty()) {
        throw InsufficientDataError("bic_select: empty sample set");
    }
    if (k_sup < 1) {
        throw std::invalid_argument("bic_select: k_sup must be >= 1");
    }
    const std::size_t n = samples.size();
    const int k_max = static_cast<int>(std::min<std::size_t>(k_sup, n));

    BicResult result;
    result.n = n;
    double best_bic = std::numeric_limits<double>::max();
    for (int k = 1; k <= k_max; ++k) {
        GmmParams fit = em_fit_gmm(samples, k, seed, tol, max_iter);
        const int v = 3 * k - 1;
        const double bic =
            -2.0 * fit.log_likelihood + v * std::log(static_cast<double>(n));
        result.bic_values.push_back(bic);
        result.free_params.push_back(v);
        if (bic < best_bic) {
            best_bic = bic;
            result.chosen_k = k;
            result.params = std::move(fit);
        }
    }
    return result;
}

std::vector<double> block_descriptor(const GrayImage& block, const FeatureConfig& cfg) {
    if (block.pixels.empty()) {
        throw std::invalid_argument("block_descriptor: empty block");
    }
    std::vector<double> samples(block.pixels.begin(), block.pixels.end());
    BicResult bic = bic_select(samples, cfg.k_sup, cfg.seed, cfg.tol, cfg.max_iter);

    // canonical component order: ascending mean
    std::vector<int> order(bic.chosen_k);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return bic.params.means[a] < bic.params.means[b];
    });

    GlcmMatrix m;
    try {
        m = glcm(block, cfg.levels, cfg.offset_dr, cfg.offset_dc);
    } catch (const DegenerateBlockError&) {
        m = uniform_glcm(cfg.levels);
    }
    const HaralickFeatures h = haralick(m);

    std::vector<double> d;
    d.reserve(descriptor_length(cfg.k_sup));
    for (int i = 0; i < cfg.k_sup; ++i) {
        d.push_back(i < bic.chosen_k ? bic.params.weights[order[i]] : 0.0);
    }
    for (int i = 0; i < cfg.k_sup; ++i) {
        d.push_back(i < bic.chosen_k ? bic.params.means[order[i]] : 0.0);
    }
    d.push_back(h.energy);
    d.push_back(h.entropy);
    d.push_back(h.contrast);
    d.push_back(h.homogeneity);
    return d;
}

} // namespace imgclass
