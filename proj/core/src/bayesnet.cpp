#include "imgclass/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace imgclass {

std::string to_string(StructureKind kind) {
    switch (kind) {
        case StructureKind::NaiveBayes: return "nb";
        case StructureKind::Tan: return "tan";
        case StructureKind::Fan: return "fan";
    }
    return "nb";
}

StructureKind structure_kind_from_string(const std::string& s) {
    if (s == "nb") return StructureKind::NaiveBayes;
    if (s == "tan") return StructureKind::Tan;
    if (s == "fan") return StructureKind::Fan;
    throw std::invalid_argument("unknown classifier kind: " + s +
                                " (expected nb, tan or fan)");
}

int NetworkStructure::edge_count() const {
    int count = 0;
    for (int p : attr_parent) {
        if (p >= 0) ++count;
    }
    return count;
}

namespace {

void check_attr(const DiscreteDataset& ds, int i) {
    if (i < 0 || i >= ds.n_attrs) {
        throw std::out_of_range("attribute index " + std::to_string(i) +
                                " out of range for n=" + std::to_string(ds.n_attrs));
    }
}

} // namespace

double conditional_mutual_information(const DiscreteDataset& ds, int i, int j) {
    check_attr(ds, i);
    check_attr(ds, j);
    if (i == j) {
        throw std::invalid_argument("conditional_mutual_information: i == j");
    }
    if (ds.instances.empty()) {
        throw InsufficientDataError("conditional_mutual_information: empty dataset");
    }
    // canonical pair order so cmi(i,j) and cmi(j,i) accumulate identically
    const int a = std::min(i, j);
    const int b = std::max(i, j);
    const int va = ds.cardinalities[a];
    const int vb = ds.cardinalities[b];
    const int k = ds.class_count;

    std::vector<long> n_xyz(static_cast<std::size_t>(va) * vb * k, 0);
    std::vector<long> n_xz(static_cast<std::size_t>(va) * k, 0);
    std::vector<long> n_yz(static_cast<std::size_t>(vb) * k, 0);
    std::vector<long> n_z(k, 0);
    const long total = static_cast<long>(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const int x = ds.instances[r][a];
        const int y = ds.instances[r][b];
        const int z = ds.classes[r];
        ++n_xyz[(static_cast<std::size_t>(x) * vb + y) * k + z];
        ++n_xz[static_cast<std::size_t>(x) * k + z];
        ++n_yz[static_cast<std::size_t>(y) * k + z];
        ++n_z[z];
    }

    double cmi = 0.0;
    for (int x = 0; x < va; ++x) {
        for (int y = 0; y < vb; ++y) {
            for (int z = 0; z < k; ++z) {
                const long nxyz = n_xyz[(static_cast<std::size_t>(x) * vb + y) * k + z];
                if (nxyz == 0) continue;
                const double p = static_cast<double>(nxyz) / total;
                const double ratio =
                    static_cast<double>(nxyz) * n_z[z] /
                    (static_cast<double>(n_xz[static_cast<std::size_t>(x) * k + z]) *
                     n_yz[static_cast<std::size_t>(y) * k + z]);
                cmi += p * std::log(ratio);
            }
        }
    }
    return std::max(cmi, 0.0);
}

double mutual_information_with_class(const DiscreteDataset& ds, int i) {
    check_attr(ds, i);
    if (ds.instances.empty()) {
        throw InsufficientDataError("mutual_information_with_class: empty dataset");
    }
    const int vi = ds.cardinalities[i];
    const int k = ds.class_count;
    std::vector<long> n_xz(static_cast<std::size_t>(vi) * k, 0);
    std::vector<long> n_x(vi, 0);
    std::vector<long> n_z(k, 0);
    const long total = static_cast<long>(ds.size());
    for (std::size_t r = 0; r < ds.size(); ++r) {
        const int x = ds.instances[r][i];
        const int z = ds.classes[r];
        ++n_xz[static_cast<std::size_t>(x) * k + z];
        ++n_x[x];
        ++n_z[z];
    }
    double mi = 0.0;
    for (int x = 0; x < vi; ++x) {
        for (int z = 0; z < k; ++z) {
            const long nxz = n_xz[static_cast<std::size_t>(x) * k + z];
            if (nxz == 0) continue;
            const double p = static_cast<double>(nxz) / total;
            const double ratio = static_cast<double>(nxz) * total /
                                 (static_cast<double>(n_x[x]) * n_z[z]);
            mi += p * std::log(ratio);
        }
    }
    return std::max(mi, 0.0);
}

MutualInfoMatrix mutual_info_matrix(const DiscreteDataset& ds) {
    MutualInfoMatrix m;
    m.n = ds.n_attrs;
    m.cmi.assign(static_cast<std::size_t>(m.n) * m.n, 0.0);
    m.mi_class.resize(m.n);
    double sum = 0.0;
    for (int i = 0; i < m.n; ++i) {
        m.mi_class[i] = mutual_information_with_class(ds, i);
        for (int j = i + 1; j < m.n; ++j) {
            const double v = conditional_mutual_information(ds, i, j);
            m.cmi[static_cast<std::size_t>(i) * m.n + j] = v;
            m.cmi[static_cast<std::size_t>(j) * m.n + i] = v;
            sum += 2.0 * v;
        }
    }
    m.i_avg = m.n > 1 ? sum / (static_cast<double>(m.n) * (m.n - 1)) : 0.0;
    return m;
}

NetworkStructure construct_nb(const DiscreteDataset& ds) {
    NetworkStructure s;
    s.kind = StructureKind::NaiveBayes;
    s.attr_parent.assign(ds.n_attrs, -1);
    return s;
}

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    bool unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent[b] = a;
        return true;
    }
};

// Maximum-weight spanning tree, Kruskal with deterministic tie-break on
// ascending (min(i,j), max(i,j)). Returns undirected edges.
std::vector<std::pair<int, int>> max_spanning_tree(const MutualInfoMatrix& m) {
    struct Edge {
        int i, j;
        double w;
    };
    std::vector<Edge> edges;
    for (int i = 0; i < m.n; ++i) {
        for (int j = i + 1; j < m.n; ++j) {
            edges.push_back({i, j, m.at(i, j)});
        }
    }
    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        if (a.w != b.w) return a.w > b.w;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });
    UnionFind uf(m.n);
    std::vector<std::pair<int, int>> tree;
    for (const Edge& e : edges) {
        if (uf.unite(e.i, e.j)) {
            tree.emplace_back(e.i, e.j);
            if (static_cast<int>(tree.size()) == m.n - 1) break;
        }
    }
    return tree;
}

// Direct tree edges outward from the root; parent[i] = attribute parent of i.
std::vector<int> orient_from_root(int n, const std::vector<std::pair<int, int>>& tree,
                                  int root) {
    std::vector<std::vector<int>> adj(n);
    for (auto [i, j] : tree) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<int> parent(n, -1);
    std::vector<int> stack{root};
    std::vector<bool> seen(n, false);
    seen[root] = true;
    while (!stack.empty()) {
        const int u = stack.back();
        stack.pop_back();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = true;
                parent[v] = u;
                stack.push_back(v);
            }
        }
    }
    return parent;
}

void require_pairable(const DiscreteDataset& ds) {
    if (ds.n_attrs < 2) {
        throw std::invalid_argument(
            "augmented structures need n >= 2 attributes; use construct_nb");
    }
}

} // namespace

std::pair<NetworkStructure, MutualInfoMatrix>
construct_tan(const DiscreteDataset& ds, std::optional<int> root_override) {
    require_pairable(ds);
    MutualInfoMatrix m = mutual_info_matrix(ds);
    const int root = root_override.value_or(0);
    check_attr(ds, root);

    NetworkStructure s;
    s.kind = StructureKind::Tan;
    s.root = root;
    s.attr_parent = orient_from_root(ds.n_attrs, max_spanning_tree(m), root);
    return {std::move(s), std::move(m)};
}

std::pair<NetworkStructure, MutualInfoMatrix>
construct_fan(const DiscreteDataset& ds, double threshold_multiplier) {
    require_pairable(ds);
    if (threshold_multiplier < 0.0) {
        throw std::invalid_argument("threshold_multiplier must be >= 0");
    }
    MutualInfoMatrix m = mutual_info_matrix(ds);

    // root: maximum mutual information with the class, ties to the lowest index
    int root = 0;
    for (int i = 1; i < m.n; ++i) {
        if (m.mi_class[i] > m.mi_class[root]) root = i;
    }

    NetworkStructure s;
    s.kind = StructureKind::Fan;
    s.root = root;
    s.attr_parent = orient_from_root(ds.n_attrs, max_spanning_tree(m), root);

    const double threshold = threshold_multiplier * m.i_avg;
    for (int i = 0; i < ds.n_attrs; ++i) {
        if (s.attr_parent[i] >= 0 && m.at(s.attr_parent[i], i) < threshold) {
            s.attr_parent[i] = -1;
        }
    }
    return {std::move(s), std::move(m)};
}

ConditionalProbabilityTable fit_parameters(const DiscreteDataset& ds,
                                           const NetworkStructure& s) {
    if (static_cast<int>(s.attr_parent.size()) != ds.n_attrs) {
        throw std::invalid_argument("structure attribute count does not match dataset");
    }
    const int k = ds.class_count;
    const long total = static_cast<long>(ds.size());

    ConditionalProbabilityTable cpt;
    cpt.cardinalities = ds.cardinalities;

    std::vector<long> n_c(k, 0);
    for (int c : ds.classes) ++n_c[c];
    cpt.class_prior.resize(k);
    for (int c = 0; c < k; ++c) {
        cpt.class_prior[c] = static_cast<double>(n_c[c] + 1) / (total + k);
    }

    cpt.tables.resize(ds.n_attrs);
    for (int i = 0; i < ds.n_attrs; ++i) {
        const int vi = ds.cardinalities[i];
        const int j = s.attr_parent[i];
        if (j < 0) {
            // P(a_i | c) = (N(c,a_i) + 1) / (N(c) + v_i)
            std::vector<long> n_ca(static_cast<std::size_t>(vi) * k, 0);
            for (std::size_t r = 0; r < ds.size(); ++r) {
                ++n_ca[static_cast<std::size_t>(ds.instances[r][i]) * k + ds.classes[r]];
            }
            std::vector<double> table(static_cast<std::size_t>(vi) * k);
            for (int a = 0; a < vi; ++a) {
                for (int c = 0; c < k; ++c) {
                    table[static_cast<std::size_t>(a) * k + c] =
                        static_cast<double>(n_ca[static_cast<std::size_t>(a) * k + c] + 1) /
                        (n_c[c] + vi);
                }
            }
            cpt.tables[i] = std::move(table);
        } else {
            // P(a_i | a_j, c) = (N(c,a_i,a_j) + 1) / (N(c,a_j) + v_i)
            const int vj = ds.cardinalities[j];
            std::vector<long> n_cab(static_cast<std::size_t>(vi) * vj * k, 0);
            std::vector<long> n_cb(static_cast<std::size_t>(vj) * k, 0);
            for (std::size_t r = 0; r < ds.size(); ++r) {
                const int a = ds.instances[r][i];
                const int b = ds.instances[r][j];
                const int c = ds.classes[r];
                ++n_cab[(static_cast<std::size_t>(a) * vj + b) * k + c];
                ++n_cb[static_cast<std::size_t>(b) * k + c];
            }
            std::vector<double> table(static_cast<std::size_t>(vi) * vj * k);
            for (int a = 0; a < vi; ++a) {
                for (int b = 0; b < vj; ++b) {
                    for (int c = 0; c < k; ++c) {
                        table[(static_cast<std::size_t>(a) * vj + b) * k + c] =
                            static_cast<double>(
                                n_cab[(static_cast<std::size_t>(a) * vj + b) * k + c] + 1) /
                            (n_cb[static_cast<std::size_t>(b) * k + c] + vi);
                    }
                }
            }
            cpt.tables[i] = std::move(table);
        }
    }
    return cpt;
}

std::vector<double> posterior(const ConditionalProbabilityTable& cpt,
                              const NetworkStructure& s, const std::vector<int>& x) {
    const int n = static_cast<int>(s.attr_parent.size());
    const int k = static_cast<int>(cpt.class_prior.size());
    if (static_cast<int>(x.size()) != n) {
        throw std::invalid_argument("posterior: instance length " +
                                    std::to_string(x.size()) + " != " +
                                    std::to_string(n) + " attributes");
    }

    std::vector<double> log_score(k);
    for (int c = 0; c < k; ++c) log_score[c] = std::log(cpt.class_prior[c]);
    for (int i = 0; i < n; ++i) {
        const int a = x[i];
        const int vi = cpt.cardinalities[i];
        if (a < 0 || a >= vi) {
            throw std::domain_error("posterior: attribute " + std::to_string(i) +
                                    " value " + std::to_string(a) + " out of range");
        }
        const int j = s.attr_parent[i];
        if (j < 0) {
            for (int c = 0; c < k; ++c) {
                log_score[c] += std::log(cpt.tables[i][static_cast<std::size_t>(a) * k + c]);
            }
        } else {
            const int b = x[j];
            const int vj = cpt.cardinalities[j];
            if (b < 0 || b >= vj) {
                throw std::domain_error("posterior: parent attribute " + std::to_string(j) +
                                        " value " + std::to_string(b) + " out of range");
            }
            for (int c = 0; c < k; ++c) {
                log_score[c] +=
                    std::log(cpt.tables[i][(static_cast<std::size_t>(a) * vj + b) * k + c]);
            }
        }
    }

    const double max_score = *std::max_element(log_score.begin(), log_score.end());
    std::vector<double> post(k);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
        post[c] = std::exp(log_score[c] - max_score);
        sum += post[c];
    }
    for (double& p : post) p /= sum;
    return post;
}

int classify_map(const ConditionalProbabilityTable& cpt, const NetworkStructure& s,
                 const std::vector<int>& x) {
    const std::vector<double> post = posterior(cpt, s, x);
    int best = 0;
    for (int c = 1; c < static_cast<int>(post.size()); ++c) {
        if (post[c] > post[best]) best = c;
    }
    return best;
}

} // namespace imgclass
