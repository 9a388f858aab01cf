#include "otssl/evaluation.hpp"

#include "otssl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace otssl {

namespace {

std::vector<std::size_t> compact(std::span<const int> labels, std::size_t& distinct) {
    std::unordered_map<int, std::size_t> ids;
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (const int y : labels) {
        const auto [it, inserted] = ids.try_emplace(y, ids.size());
        out.push_back(it->second);
    }
    distinct = ids.size();
    return out;
}

void check_pair(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw InvalidInput("label vectors differ in length: " + std::to_string(truth.size()) + " vs " +
                           std::to_string(predicted.size()));
    }
    if (truth.size() < 2) {
        throw InvalidInput("agreement metrics need at least two labels");
    }
}

double choose2(std::uint64_t x) {
    const auto d = static_cast<double>(x);
    return d * (d - 1.0) / 2.0;
}

double entropy(const std::vector<std::uint64_t>& sums, double n) {
    double h = 0.0;
    for (const auto s : sums) {
        if (s > 0) {
            const double p = static_cast<double>(s) / n;
            h -= p * std::log(p);
        }
    }
    return h;
}

}  // namespace

ContingencyTable::ContingencyTable(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw InvalidInput("label vectors differ in length");
    }
    std::size_t kt = 0;
    std::size_t kp = 0;
    const auto t = compact(truth, kt);
    const auto p = compact(predicted, kp);
    counts_.assign(kt * kp, 0);
    row_sums_.assign(kt, 0);
    col_sums_.assign(kp, 0);
    for (std::size_t i = 0; i < t.size(); ++i) {
        ++counts_[t[i] * kp + p[i]];
        ++row_sums_[t[i]];
        ++col_sums_[p[i]];
    }
    total_ = t.size();
}

double adjusted_rand_index(std::span<const int> truth, std::span<const int> predicted) {
    check_pair(truth, predicted);
    const ContingencyTable table(truth, predicted);

    double index = 0.0;
    for (std::size_t i = 0; i < table.true_classes(); ++i) {
        for (std::size_t j = 0; j < table.predicted_classes(); ++j) {
            index += choose2(table.count(i, j));
        }
    }
    double sum_rows = 0.0;
    for (const auto a : table.row_sums()) {
        sum_rows += choose2(a);
    }
    double sum_cols = 0.0;
    for (const auto b : table.col_sums()) {
        sum_cols += choose2(b);
    }
    const double expected = sum_rows * sum_cols / choose2(table.total());
    const double max_index = 0.5 * (sum_rows + sum_cols);
    // Only reachable when both partitions are identical (all singletons or
    // one block each).
    if (max_index == expected) {
        return 1.0;
    }
    return (index - expected) / (max_index - expected);
}

double normalized_mutual_information(std::span<const int> truth, std::span<const int> predicted) {
    check_pair(truth, predicted);
    const ContingencyTable table(truth, predicted);
    const auto n = static_cast<double>(table.total());

    const double h_true = entropy(table.row_sums(), n);
    const double h_pred = entropy(table.col_sums(), n);
    const bool true_constant = table.true_classes() == 1;
    const bool pred_constant = table.predicted_classes() == 1;
    if (true_constant && pred_constant) {
        return 1.0;
    }
    if (true_constant || pred_constant) {
        return 0.0;
    }

    double mi = 0.0;
    for (std::size_t i = 0; i < table.true_classes(); ++i) {
        for (std::size_t j = 0; j < table.predicted_classes(); ++j) {
            const auto nij = table.count(i, j);
            if (nij == 0) {
                continue;
            }
            const double pij = static_cast<double>(nij) / n;
            const double a = static_cast<double>(table.row_sums()[i]);
            const double b = static_cast<double>(table.col_sums()[j]);
            mi += pij * std::log(static_cast<double>(nij) * n / (a * b));
        }
    }
    return std::clamp(mi / (0.5 * (h_true + h_pred)), 0.0, 1.0);
}

}  // namespace otssl
