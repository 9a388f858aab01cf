#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace otssl {

/// Co-occurrence counts of two labelings. Label values are compacted to
/// 0..K-1 in order of first appearance, so arbitrary integer ids work.
class ContingencyTable {
public:
    ContingencyTable(std::span<const int> truth, std::span<const int> predicted);

    std::size_t true_classes() const noexcept { return row_sums_.size(); }
    std::size_t predicted_classes() const noexcept { return col_sums_.size(); }
    std::uint64_t count(std::size_t i, std::size_t j) const { return counts_[i * col_sums_.size() + j]; }
    const std::vector<std::uint64_t>& row_sums() const noexcept { return row_sums_; }
    const std::vector<std::uint64_t>& col_sums() const noexcept { return col_sums_; }
    std::uint64_t total() const noexcept { return total_; }

private:
    std::vector<std::uint64_t> counts_;
    std::vector<std::uint64_t> row_sums_;
    std::vector<std::uint64_t> col_sums_;
    std::uint64_t total_ = 0;
};

/// Hubert-Arabie adjusted Rand index in [-1, 1]. Two partitions for which
/// the index is 0/0 (both all-singletons or both constant) score 1.
double adjusted_rand_index(std::span<const int> truth, std::span<const int> predicted);

/// Mutual information divided by the arithmetic mean of the two entropies.
/// Both partitions constant -> 1; exactly one constant -> 0.
double normalized_mutual_information(std::span<const int> truth, std::span<const int> predicted);

}  // namespace otssl
