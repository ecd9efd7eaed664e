#include "imgclass/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace imgclass {

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
stratified_split(const std::vector<int>& classes, double train_fraction,
                 std::uint64_t seed) {
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw std::invalid_argument("train_fraction must be in (0,1)");
    }
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        by_class[classes[i]].push_back(i);
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> train, test;
    for (auto& [cls, idx] : by_class) {
        if (idx.size() < 2) {
            throw std::invalid_argument("class " + std::to_string(cls) +
                                        " has fewer than 2 instances; cannot stratify");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        std::size_t n_train =
            static_cast<std::size_t>(train_fraction * static_cast<double>(idx.size()));
        n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? train : test).push_back(idx[i]);
        }
    }
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    return {std::move(train), std::move(test)};
}

EvalReport evaluate(const ConditionalProbabilityTable& cpt, const NetworkStructure& s,
                    const DiscreteDataset& test) {
    if (test.instances.empty()) {
        throw std::invalid_argument("evaluate: empty test set");
    }
    if (static_cast<int>(s.attr_parent.size()) != test.n_attrs) {
        throw std::invalid_argument("evaluate: model has " +
                                    std::to_string(s.attr_parent.size()) +
                                    " attributes, test data has " +
                                    std::to_string(test.n_attrs));
    }
    const int k = test.class_count;

    EvalReport report;
    report.confusion.assign(k, std::vector<long>(k, 0));
    for (std::size_t r = 0; r < test.size(); ++r) {
        const int predicted = classify_map(cpt, s, test.instances[r]);
        ++report.confusion[test.classes[r]][predicted];
    }

    long correct = 0, total = 0;
    report.per_class_accuracy.resize(k);
    for (int c = 0; c < k; ++c) {
        const long row_total =
            std::accumulate(report.confusion[c].begin(), report.confusion[c].end(), 0L);
        report.per_class_accuracy[c] =
            row_total > 0 ? static_cast<double>(report.confusion[c][c]) / row_total : 0.0;
        correct += report.confusion[c][c];
        total += row_total;
    }
    report.pcc = static_cast<double>(correct) / total;
    report.mean_classification =
        std::accumulate(report.per_class_accuracy.begin(),
                        report.per_class_accuracy.end(), 0.0) / k;
    return report;
}

std::string format_report_table(const std::vector<std::string>& row_labels,
                                const std::vector<std::pair<EvalReport, EvalReport>>& rows,
                                const std::vector<std::string>& class_names) {
    std::ostringstream out;
    out << "classifier           set           ";
    for (const auto& name : class_names) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%-10s", name.c_str());
        out << buf;
    }
    out << "mean\n";

    auto emit = [&](const std::string& label, const char* set, const EvalReport& r) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%-20s %-13s ", label.c_str(), set);
        out << buf;
        for (double a : r.per_class_accuracy) {
            std::snprintf(buf, sizeof(buf), "%-10.2f", a);
            out << buf;
        }
        std::snprintf(buf, sizeof(buf), "%.2f\n", r.mean_classification);
        out << buf;
    };
    for (std::size_t i = 0; i < rows.size(); ++i) {
        emit(row_labels[i], "training set", rows[i].first);
        emit("", "test set", rows[i].second);
    }
    return out.str();
}

} // namespace imgclass
