#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "imgclass/bayesnet.hpp"
#include "support/oracles.hpp"

using namespace imgclass;
using namespace imgclass::testing;

namespace {

DiscreteDataset dataset_from(int n_attrs, std::vector<int> cards, int classes,
                             std::vector<std::pair<std::vector<int>, int>> rows) {
    DiscreteDataset ds;
    ds.n_attrs = n_attrs;
    ds.cardinalities = std::move(cards);
    ds.class_count = classes;
    for (auto& [values, cls] : rows) {
        ds.instances.push_back(std::move(values));
        ds.classes.push_back(cls);
    }
    return ds;
}

} // namespace

TEST_CASE("cmi is zero for conditionally independent attributes") {
    // per class, A0 and A1 take every value combination equally often
    std::vector<std::pair<std::vector<int>, int>> rows;
    for (int z = 0; z < 2; ++z) {
        for (int x = 0; x < 2; ++x) {
            for (int y = 0; y < 2; ++y) {
                rows.push_back({{x, y}, z});
            }
        }
    }
    const auto ds = dataset_from(2, {2, 2}, 2, rows);
    CHECK(conditional_mutual_information(ds, 0, 1) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cmi of a copied binary attribute is ln 2") {
    std::vector<std::pair<std::vector<int>, int>> rows;
    for (int z = 0; z < 2; ++z) {
        for (int x = 0; x < 2; ++x) {
            rows.push_back({{x, x}, z});
            rows.push_back({{x, x}, z});
        }
    }
    const auto ds = dataset_from(2, {2, 2}, 2, rows);
    CHECK(conditional_mutual_information(ds, 0, 1) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("cmi matches the brute-force oracle on random datasets") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ds = random_dataset(rng);
        for (int i = 0; i < ds.n_attrs; ++i) {
            for (int j = i + 1; j < ds.n_attrs; ++j) {
                const double expected = std::max(oracle_cmi(ds, i, j), 0.0);
                CHECK(conditional_mutual_information(ds, i, j) ==
                      doctest::Approx(expected).epsilon(1e-12));
                // symmetry is exact
                CHECK(conditional_mutual_information(ds, i, j) ==
                      conditional_mutual_information(ds, j, i));
            }
        }
    }
}

TEST_CASE("cmi rejects bad arguments") {
    std::mt19937_64 rng(2);
    const auto ds = random_dataset(rng);
    CHECK_THROWS_AS(conditional_mutual_information(ds, 0, 0), std::invalid_argument);
    DiscreteDataset empty = ds;
    empty.instances.clear();
    empty.classes.clear();
    CHECK_THROWS_AS(conditional_mutual_information(empty, 0, 1), InsufficientDataError);
}

TEST_CASE("mi with class is zero for a constant attribute") {
    const auto ds = dataset_from(1, {2}, 2, {{{0}, 0}, {{0}, 1}, {{0}, 0}, {{0}, 1}});
    CHECK(mutual_information_with_class(ds, 0) == doctest::Approx(0.0));
}

TEST_CASE("mi of an attribute equal to the class is ln k") {
    std::vector<std::pair<std::vector<int>, int>> rows;
    for (int z = 0; z < 3; ++z) {
        rows.push_back({{z}, z});
        rows.push_back({{z}, z});
    }
    const auto ds = dataset_from(1, {3}, 3, rows);
    CHECK(mutual_information_with_class(ds, 0) == doctest::Approx(std::log(3.0)));
}

TEST_CASE("mi matches the brute-force oracle on random datasets") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const auto ds = random_dataset(rng);
        for (int i = 0; i < ds.n_attrs; ++i) {
            const double expected = std::max(oracle_mi_class(ds, i), 0.0);
            CHECK(mutual_information_with_class(ds, i) ==
                  doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("nb structure has no attribute edges") {
    std::mt19937_64 rng(4);
    const auto ds = random_dataset(rng, 16, 3, 3, 30);
    const NetworkStructure s = construct_nb(ds);
    CHECK(s.kind == StructureKind::NaiveBayes);
    CHECK(s.attr_parent.size() == static_cast<std::size_t>(ds.n_attrs));
    CHECK(s.edge_count() == 0);
}

TEST_CASE("tan with two attributes links them regardless of weight") {
    const auto ds = dataset_from(2, {2, 2}, 2,
                                 {{{0, 1}, 0}, {{1, 0}, 1}, {{0, 0}, 0}, {{1, 1}, 1}});
    const auto [s, m] = construct_tan(ds);
    CHECK(s.kind == StructureKind::Tan);
    CHECK(s.root == 0);
    CHECK(s.attr_parent[0] == -1);
    CHECK(s.attr_parent[1] == 0);
}

TEST_CASE("tan spanning tree weight matches exhaustive enumeration") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto ds = random_dataset(rng, 6, 3, 3, 50);
        const auto [s, m] = construct_tan(ds);
        CHECK(s.edge_count() == ds.n_attrs - 1);

        double weight = 0.0;
        for (int i = 0; i < ds.n_attrs; ++i) {
            if (s.attr_parent[i] >= 0) weight += m.at(s.attr_parent[i], i);
        }
        std::vector<std::vector<double>> w(ds.n_attrs, std::vector<double>(ds.n_attrs));
        for (int i = 0; i < ds.n_attrs; ++i) {
            for (int j = 0; j < ds.n_attrs; ++j) w[i][j] = m.at(i, j);
        }
        CHECK(weight == doctest::Approx(oracle_max_spanning_tree_weight(w)).epsilon(1e-9));
    }
}

TEST_CASE("tan recovers a generated dependency chain") {
    // A0 drives A1 drives A2 within each class; A3 independent
    std::mt19937_64 rng(6);
    DiscreteDataset ds;
    ds.n_attrs = 4;
    ds.cardinalities = {2, 2, 2, 2};
    ds.class_count = 2;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < 400; ++r) {
        const int z = static_cast<int>(rng() % 2);
        const int a0 = static_cast<int>(rng() % 2);
        const int a1 = u(rng) < 0.9 ? a0 : 1 - a0;
        const int a2 = u(rng) < 0.9 ? a1 : 1 - a1;
        const int a3 = static_cast<int>(rng() % 2);
        ds.instances.push_back({a0, a1, a2, a3});
        ds.classes.push_back(z);
    }
    const auto [s, m] = construct_tan(ds);
    std::set<std::pair<int, int>> edges;
    for (int i = 0; i < 4; ++i) {
        if (s.attr_parent[i] >= 0) {
            edges.insert({std::min(i, s.attr_parent[i]), std::max(i, s.attr_parent[i])});
        }
    }
    CHECK(edges.count({0, 1}) == 1);
    CHECK(edges.count({1, 2}) == 1);
}

TEST_CASE("tan honors a root override and rejects n < 2") {
    std::mt19937_64 rng(7);
    const auto ds = random_dataset(rng, 5, 3, 3, 40);
    const auto [s, m] = construct_tan(ds, 2);
    CHECK(s.root == 2);
    CHECK(s.attr_parent[2] == -1);

    DiscreteDataset tiny = dataset_from(1, {2}, 2, {{{0}, 0}, {{1}, 1}});
    CHECK_THROWS(construct_tan(tiny));
}

TEST_CASE("fan multiplier limits: tree at 0, nb at infinity") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ds = random_dataset(rng, 6, 3, 3, 40);
        const auto [tree, m_tree] = construct_fan(ds, 0.0);
        CHECK(tree.edge_count() == ds.n_attrs - 1);

        const auto [bare, m_bare] = construct_fan(ds, 1e18);
        CHECK(bare.edge_count() == 0);

        // FAN(0) equals the TAN re-rooted at A_root
        int a_root = 0;
        for (int i = 1; i < ds.n_attrs; ++i) {
            if (m_tree.mi_class[i] > m_tree.mi_class[a_root]) a_root = i;
        }
        const auto [tan, m_tan] = construct_tan(ds, a_root);
        CHECK(tree.attr_parent == tan.attr_parent);
        CHECK(tree.root == a_root);
    }
}

TEST_CASE("fan at multiplier 1 keeps exactly the tree edges at or above i_avg") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ds = random_dataset(rng, 6, 3, 3, 40);
        const auto [fan, m] = construct_fan(ds, 1.0);
        const auto [full, m2] = construct_fan(ds, 0.0);
        for (int i = 0; i < ds.n_attrs; ++i) {
            if (full.attr_parent[i] < 0) continue;
            const double w = m.at(full.attr_parent[i], i);
            if (w >= m.i_avg) {
                CHECK(fan.attr_parent[i] == full.attr_parent[i]);
            } else {
                CHECK(fan.attr_parent[i] == -1);
            }
        }
    }
}

TEST_CASE("laplace class prior on a balanced 100-instance 5-class dataset") {
    DiscreteDataset ds;
    ds.n_attrs = 1;
    ds.cardinalities = {5};
    ds.class_count = 5;
    for (int c = 0; c < 5; ++c) {
        for (int i = 0; i < 20; ++i) {
            ds.instances.push_back({i % 5});
            ds.classes.push_back(c);
        }
    }
    const auto cpt = fit_parameters(ds, construct_nb(ds));
    for (int c = 0; c < 5; ++c) {
        CHECK(cpt.class_prior[c] == doctest::Approx(0.2)); // (20+1)/(100+5)
    }
}

TEST_CASE("laplace on an empty dataset gives uniform tables") {
    DiscreteDataset ds;
    ds.n_attrs = 2;
    ds.cardinalities = {5, 5};
    ds.class_count = 5;
    const auto cpt = fit_parameters(ds, construct_nb(ds));
    for (int c = 0; c < 5; ++c) {
        CHECK(cpt.class_prior[c] == doctest::Approx(0.2));
        for (int a = 0; a < 5; ++a) {
            CHECK(cpt.tables[0][a * 5 + c] == doctest::Approx(0.2));
        }
    }
}

TEST_CASE("laplace single-instance spot value") {
    DiscreteDataset ds;
    ds.n_attrs = 1;
    ds.cardinalities = {5};
    ds.class_count = 2;
    ds.instances.push_back({0});
    ds.classes.push_back(0);
    const auto cpt = fit_parameters(ds, construct_nb(ds));
    CHECK(cpt.tables[0][0 * 2 + 0] == doctest::Approx(2.0 / 6.0)); // (1+1)/(1+5)
}

TEST_CASE("cpt slices sum to one and are strictly positive") {
    std::mt19937_64 rng(10);
    for (int trial = 0; trial < 20; ++trial) {
        const auto ds = random_dataset(rng, 5, 3, 3, 40);
        for (auto kind : {0, 1, 2}) {
            NetworkStructure s;
            if (kind == 0) s = construct_nb(ds);
            else if (kind == 1) s = construct_tan(ds).first;
            else s = construct_fan(ds, 1.0).first;
            const auto cpt = fit_parameters(ds, s);

            double prior_sum = 0.0;
            for (double p : cpt.class_prior) {
                CHECK(p > 0.0);
                prior_sum += p;
            }
            CHECK(prior_sum == doctest::Approx(1.0).epsilon(1e-12));

            const int k = ds.class_count;
            for (int i = 0; i < ds.n_attrs; ++i) {
                const int vi = ds.cardinalities[i];
                const int j = s.attr_parent[i];
                const int parent_card = j < 0 ? 1 : ds.cardinalities[j];
                for (int b = 0; b < parent_card; ++b) {
                    for (int c = 0; c < k; ++c) {
                        double slice = 0.0;
                        for (int a = 0; a < vi; ++a) {
                            const double p =
                                j < 0 ? cpt.tables[i][static_cast<std::size_t>(a) * k + c]
                                      : cpt.tables[i][(static_cast<std::size_t>(a) *
                                                           parent_card + b) * k + c];
                            CHECK(p > 0.0);
                            slice += p;
                        }
                        CHECK(slice == doctest::Approx(1.0).epsilon(1e-12));
                    }
                }
            }
        }
    }
}

TEST_CASE("posterior equals joint-enumeration Bayes rule on small instances") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const auto ds = random_dataset(rng, 3, 3, 3, 40);
        for (auto kind : {0, 1, 2}) {
            NetworkStructure s;
            if (kind == 0) s = construct_nb(ds);
            else if (kind == 1) s = construct_tan(ds).first;
            else s = construct_fan(ds, 1.0).first;
            const auto cpt = fit_parameters(ds, s);

            std::vector<int> x;
            for (int i = 0; i < ds.n_attrs; ++i) {
                x.push_back(static_cast<int>(rng() % ds.cardinalities[i]));
            }
            const auto got = posterior(cpt, s, x);
            const auto expected = oracle_posterior(cpt, s, x);
            double sum = 0.0;
            for (int c = 0; c < ds.class_count; ++c) {
                CHECK(got[c] == doctest::Approx(expected[c]).epsilon(1e-12));
                sum += got[c];
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("posterior with uniform tables is uniform") {
    NetworkStructure s = {StructureKind::NaiveBayes, {-1, -1}, -1};
    ConditionalProbabilityTable cpt;
    cpt.cardinalities = {2, 2};
    cpt.class_prior = {0.5, 0.5};
    cpt.tables = {{0.5, 0.5, 0.5, 0.5}, {0.5, 0.5, 0.5, 0.5}};
    const auto p = posterior(cpt, s, {0, 1});
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("posterior rejects out-of-range values") {
    NetworkStructure s = {StructureKind::NaiveBayes, {-1}, -1};
    ConditionalProbabilityTable cpt;
    cpt.cardinalities = {2};
    cpt.class_prior = {0.5, 0.5};
    cpt.tables = {{0.5, 0.5, 0.5, 0.5}};
    CHECK_THROWS_AS(posterior(cpt, s, {2}), std::domain_error);
    CHECK_THROWS_AS(posterior(cpt, s, {0, 0}), std::invalid_argument);
}

TEST_CASE("classify_map picks the argmax and breaks ties low") {
    // craft an NB model whose posterior for x={0} is exactly tied
    NetworkStructure s = {StructureKind::NaiveBayes, {-1}, -1};
    ConditionalProbabilityTable cpt;
    cpt.cardinalities = {2};
    cpt.class_prior = {0.5, 0.5};
    cpt.tables = {{0.5, 0.5, 0.5, 0.5}};
    CHECK(classify_map(cpt, s, {0}) == 0);

    cpt.class_prior = {0.2, 0.7, 0.1};
    cpt.tables = {{1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3}};
    CHECK(classify_map(cpt, s, {1}) == 1);
}

TEST_CASE("structure and parameters are deterministic") {
    std::mt19937_64 rng(12);
    const auto ds = random_dataset(rng, 6, 3, 3, 40);
    const auto [s1, m1] = construct_fan(ds, 1.0);
    const auto [s2, m2] = construct_fan(ds, 1.0);
    CHECK(s1.attr_parent == s2.attr_parent);
    CHECK(s1.root == s2.root);
    const auto c1 = fit_parameters(ds, s1);
    const auto c2 = fit_parameters(ds, s2);
    CHECK(c1.class_prior == c2.class_prior);
    CHECK(c1.tables == c2.tables);
}
