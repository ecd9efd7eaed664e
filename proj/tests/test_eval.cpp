#include <doctest.h>

#include <numeric>
#include <random>

#include "imgclass/eval.hpp"
#include "support/oracles.hpp"

using namespace imgclass;
using namespace imgclass::testing;

TEST_CASE("stratified split halves a balanced corpus") {
    std::vector<int> classes;
    for (int c = 0; c < 3; ++c) {
        classes.insert(classes.end(), 10, c);
    }
    const auto [train, test] = stratified_split(classes, 0.5, 1);
    CHECK(train.size() == 15);
    CHECK(test.size() == 15);
    std::vector<int> train_per_class(3, 0);
    for (auto i : train) ++train_per_class[classes[i]];
    for (int c = 0; c < 3; ++c) CHECK(train_per_class[c] == 5);
}

TEST_CASE("stratified split is deterministic and covers both sides") {
    std::vector<int> classes{0, 0, 0, 1, 1, 1, 1, 2, 2};
    const auto a = stratified_split(classes, 0.7, 42);
    const auto b = stratified_split(classes, 0.7, 42);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);

    std::vector<bool> in_train(classes.size(), false);
    for (auto i : a.first) in_train[i] = true;
    std::vector<int> train_count(3, 0), test_count(3, 0);
    for (std::size_t i = 0; i < classes.size(); ++i) {
        ++(in_train[i] ? train_count : test_count)[classes[i]];
    }
    for (int c = 0; c < 3; ++c) {
        CHECK(train_count[c] >= 1);
        CHECK(test_count[c] >= 1);
    }
}

TEST_CASE("stratified split floors at fraction 0.9 with a minimum test size") {
    std::vector<int> classes(10, 0);
    classes.insert(classes.end(), 10, 1);
    const auto [train, test] = stratified_split(classes, 0.9, 3);
    CHECK(train.size() == 18);
    CHECK(test.size() == 2);
}

TEST_CASE("stratified split rejects singleton classes and bad fractions") {
    std::vector<int> classes{0, 0, 1};
    CHECK_THROWS_AS(stratified_split(classes, 0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(stratified_split(std::vector<int>{0, 0, 1, 1}, 1.0, 0),
                    std::invalid_argument);
}

namespace {

// model that always predicts class 0: prior mass concentrated there
std::pair<NetworkStructure, ConditionalProbabilityTable> degenerate_model(int k) {
    NetworkStructure s;
    s.kind = StructureKind::NaiveBayes;
    s.attr_parent = {-1};
    ConditionalProbabilityTable cpt;
    cpt.cardinalities = {2};
    cpt.class_prior.assign(k, 0.01 / (k - 1));
    cpt.class_prior[0] = 0.99;
    cpt.tables = {std::vector<double>(2 * k, 0.5)};
    return {s, cpt};
}

} // namespace

TEST_CASE("evaluate a degenerate always-class-0 model on a balanced set") {
    const auto [s, cpt] = degenerate_model(5);
    DiscreteDataset test;
    test.n_attrs = 1;
    test.cardinalities = {2};
    test.class_count = 5;
    for (int c = 0; c < 5; ++c) {
        for (int i = 0; i < 4; ++i) {
            test.instances.push_back({i % 2});
            test.classes.push_back(c);
        }
    }
    const EvalReport r = evaluate(cpt, s, test);
    CHECK(r.pcc == doctest::Approx(0.2));
    CHECK(r.per_class_accuracy[0] == doctest::Approx(1.0));
    for (int c = 1; c < 5; ++c) CHECK(r.per_class_accuracy[c] == doctest::Approx(0.0));
    CHECK(r.mean_classification == doctest::Approx(0.2));
}

TEST_CASE("evaluate invariants on random models") {
    std::mt19937_64 rng(44);
    for (int trial = 0; trial < 10; ++trial) {
        const auto ds = random_dataset(rng, 4, 3, 3, 40);
        const auto s = construct_nb(ds);
        const auto cpt = fit_parameters(ds, s);
        const EvalReport r = evaluate(cpt, s, ds);

        CHECK(r.pcc >= 0.0);
        CHECK(r.pcc <= 1.0);
        long total = 0, diag = 0;
        for (int a = 0; a < ds.class_count; ++a) {
            long row = 0;
            for (int b = 0; b < ds.class_count; ++b) {
                CHECK(r.confusion[a][b] >= 0);
                row += r.confusion[a][b];
                total += r.confusion[a][b];
            }
            diag += r.confusion[a][a];
        }
        CHECK(total == static_cast<long>(ds.size()));
        CHECK(r.pcc == doctest::Approx(static_cast<double>(diag) / total));

        // pure function of model and data
        const EvalReport again = evaluate(cpt, s, ds);
        CHECK(again.confusion == r.confusion);
    }
}

TEST_CASE("perfect predictions give a diagonal confusion matrix") {
    // attribute equal to the class makes NB perfect on its own training data
    DiscreteDataset ds;
    ds.n_attrs = 1;
    ds.cardinalities = {3};
    ds.class_count = 3;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < 5; ++i) {
            ds.instances.push_back({c});
            ds.classes.push_back(c);
        }
    }
    const auto s = construct_nb(ds);
    const auto cpt = fit_parameters(ds, s);
    const EvalReport r = evaluate(cpt, s, ds);
    CHECK(r.pcc == doctest::Approx(1.0));
    for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
            CHECK(r.confusion[a][b] == (a == b ? 5 : 0));
        }
    }
}

TEST_CASE("evaluate rejects mismatched dimensions and empty sets") {
    const auto [s, cpt] = degenerate_model(3);
    DiscreteDataset bad;
    bad.n_attrs = 2;
    bad.cardinalities = {2, 2};
    bad.class_count = 3;
    bad.instances.push_back({0, 1});
    bad.classes.push_back(0);
    CHECK_THROWS_AS(evaluate(cpt, s, bad), std::invalid_argument);

    DiscreteDataset empty;
    empty.n_attrs = 1;
    empty.cardinalities = {2};
    empty.class_count = 3;
    CHECK_THROWS_AS(evaluate(cpt, s, empty), std::invalid_argument);
}

TEST_CASE("report table has one train and one test row per classifier") {
    const auto [s, cpt] = degenerate_model(2);
    DiscreteDataset ds;
    ds.n_attrs = 1;
    ds.cardinalities = {2};
    ds.class_count = 2;
    for (int i = 0; i < 8; ++i) {
        ds.instances.push_back({i % 2});
        ds.classes.push_back(i % 2);
    }
    const EvalReport r = evaluate(cpt, s, ds);
    const std::string table =
        format_report_table({"nb"}, {{r, r}}, {"class_a", "class_b"});
    CHECK(table.find("training set") != std::string::npos);
    CHECK(table.find("test set") != std::string::npos);
    CHECK(table.find("mean") != std::string::npos);
    CHECK(table.find("class_a") != std::string::npos);
}
