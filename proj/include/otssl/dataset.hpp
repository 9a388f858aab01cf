#pragma once

#include "otssl/ot_core.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace otssl {

/// Feature matrix with one class index per row.
struct Dataset {
    std::string name;
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;

    int num_classes() const noexcept { return static_cast<int>(class_names.size()); }
    Eigen::Index size() const noexcept { return features.rows(); }

    /// Labels in {0..K-1}, n >= K >= 2, finite features.
    void validate() const;
};

/// Rows whose label cell is empty are unlabeled (std::nullopt).
struct PartiallyLabeledData {
    Matrix features;
    std::vector<std::optional<int>> labels;
    std::vector<std::string> class_names;
    std::vector<std::string> feature_names;
};

/// Reads a headered CSV. `label_column` names the class column; every other
/// column must be numeric. Class names are numbered in order of first
/// appearance. Errors name the offending data row (1-based) and column.
Dataset load_csv(const std::filesystem::path& path, std::string_view label_column);

/// Like load_csv but an empty label cell marks the row as unlabeled.
PartiallyLabeledData load_partially_labeled_csv(const std::filesystem::path& path, std::string_view label_column);

/// Reads the columns `feature_names` (in that order) from a headered CSV;
/// other columns are ignored.
Matrix load_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& feature_names);

/// Raw text of one column of a headered CSV, one entry per data row.
std::vector<std::string> load_label_column(const std::filesystem::path& path, std::string_view column);

/// Per-feature affine map to zero mean and unit variance. Constant features
/// are centered only.
class Standardizer {
public:
    static Standardizer fit(const Matrix& features);
    Matrix apply(const Matrix& features) const;

    const Vector& mean() const noexcept { return mean_; }
    const Vector& scale() const noexcept { return scale_; }

private:
    Vector mean_;
    Vector scale_;
};

}  // namespace otssl
