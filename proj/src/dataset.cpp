#include "otssl/dataset.hpp"

#include "otssl/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace otssl {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

/// Splits one CSV record. Double quotes group fields and "" escapes a quote.
std::vector<std::string> split_record(const std::string& line, std::size_t line_number) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
            was_quoted = true;
        } else if (c == ',') {
            fields.push_back(was_quoted ? current : trim(current));
            current.clear();
            was_quoted = false;
        } else {
            current.push_back(c);
        }
    }
    if (quoted) {
        throw IngestionError("line " + std::to_string(line_number) + ": unterminated quoted field");
    }
    fields.push_back(was_quoted ? current : trim(current));
    return fields;
}

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

RawTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IngestionError("cannot open '" + path.string() + "'");
    }
    RawTable table;
    std::string line;
    std::size_t line_number = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (trim(line).empty()) {
            continue;
        }
        auto fields = split_record(line, line_number);
        if (!have_header) {
            if (line_number == 1 && fields[0].rfind("\xEF\xBB\xBF", 0) == 0) {
                fields[0].erase(0, 3);
            }
            table.header = std::move(fields);
            have_header = true;
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw IngestionError("'" + path.string() + "' row " + std::to_string(table.rows.size() + 1) + " has " +
                                 std::to_string(fields.size()) + " fields, header has " +
                                 std::to_string(table.header.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (!have_header) {
        throw IngestionError("'" + path.string() + "' is empty; a header row is required");
    }
    return table;
}

std::size_t find_column(const RawTable& table, std::string_view name, const std::filesystem::path& path) {
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == name) {
            return c;
        }
    }
    throw IngestionError("'" + path.string() + "' has no column named '" + std::string(name) + "'");
}

double parse_number(const std::string& cell, std::size_t row, const std::string& column) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = cell.data() + cell.size();
    if (!cell.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw IngestionError("row " + std::to_string(row) + ", column '" + column + "': '" + cell +
                             "' is not a finite number");
    }
    return value;
}

PartiallyLabeledData parse_labeled(const std::filesystem::path& path, std::string_view label_column,
                                   bool allow_missing) {
    const RawTable table = read_table(path);
    const std::size_t label_idx = find_column(table, label_column, path);

    PartiallyLabeledData out;
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (c != label_idx) {
            feature_cols.push_back(c);
            out.feature_names.push_back(table.header[c]);
        }
    }
    if (feature_cols.empty()) {
        throw IngestionError("'" + path.string() + "' has no feature columns");
    }

    out.features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(feature_cols.size()));
    std::unordered_map<std::string, int> class_ids;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        for (std::size_t f = 0; f < feature_cols.size(); ++f) {
            out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
                parse_number(row[feature_cols[f]], r + 1, table.header[feature_cols[f]]);
        }
        const std::string& name = row[label_idx];
        if (name.empty()) {
            if (!allow_missing) {
                throw IngestionError("row " + std::to_string(r + 1) + ", column '" + std::string(label_column) +
                                     "': missing label");
            }
            out.labels.emplace_back(std::nullopt);
            continue;
        }
        const auto [it, inserted] = class_ids.try_emplace(name, static_cast<int>(out.class_names.size()));
        if (inserted) {
            out.class_names.push_back(name);
        }
        out.labels.emplace_back(it->second);
    }
    return out;
}

}  // namespace

void Dataset::validate() const {
    const int k = num_classes();
    if (k < 2) {
        throw InvalidInput("dataset '" + name + "' needs at least two classes");
    }
    if (features.rows() < k) {
        throw InvalidInput("dataset '" + name + "' has fewer rows than classes");
    }
    if (static_cast<Eigen::Index>(labels.size()) != features.rows()) {
        throw InvalidInput("dataset '" + name + "' has mismatched feature and label counts");
    }
    if (!features.allFinite()) {
        throw InvalidInput("dataset '" + name + "' has a non-finite feature");
    }
    for (const int y : labels) {
        if (y < 0 || y >= k) {
            throw InvalidInput("dataset '" + name + "' has a label outside {0.." + std::to_string(k - 1) + "}");
        }
    }
}

Dataset load_csv(const std::filesystem::path& path, std::string_view label_column) {
    PartiallyLabeledData raw = parse_labeled(path, label_column, false);
    Dataset ds;
    ds.name = path.stem().string();
    ds.features = std::move(raw.features);
    ds.class_names = std::move(raw.class_names);
    ds.feature_names = std::move(raw.feature_names);
    ds.labels.reserve(raw.labels.size());
    for (const auto& y : raw.labels) {
        ds.labels.push_back(*y);
    }
    try {
        ds.validate();
    } catch (const InvalidInput& e) {
        throw IngestionError(e.what());
    }
    return ds;
}

PartiallyLabeledData load_partially_labeled_csv(const std::filesystem::path& path, std::string_view label_column) {
    return parse_labeled(path, label_column, true);
}

Matrix load_feature_csv(const std::filesystem::path& path, const std::vector<std::string>& feature_names) {
    const RawTable table = read_table(path);
    std::vector<std::size_t> cols;
    cols.reserve(feature_names.size());
    for (const auto& name : feature_names) {
        cols.push_back(find_column(table, name, path));
    }
    Matrix out(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t f = 0; f < cols.size(); ++f) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(f)) =
                parse_number(table.rows[r][cols[f]], r + 1, feature_names[f]);
        }
    }
    return out;
}

std::vector<std::string> load_label_column(const std::filesystem::path& path, std::string_view column) {
    const RawTable table = read_table(path);
    const std::size_t idx = find_column(table, column, path);
    std::vector<std::string> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        out.push_back(row[idx]);
    }
    return out;
}

Standardizer Standardizer::fit(const Matrix& features) {
    if (features.rows() == 0) {
        throw InvalidInput("cannot standardize an empty matrix");
    }
    Standardizer s;
    s.mean_ = features.colwise().mean().transpose();
    const Matrix centered = features.rowwise() - s.mean_.transpose();
    s.scale_ = (centered.colwise().squaredNorm() / static_cast<double>(features.rows())).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < s.scale_.size(); ++j) {
        if (!(s.scale_[j] > 0.0)) {
            s.scale_[j] = 1.0;
        }
    }
    return s;
}

Matrix Standardizer::apply(const Matrix& features) const {
    if (features.cols() != mean_.size()) {
        throw InvalidInput("standardizer was fitted on a different feature dimension");
    }
    return (features.rowwise() - mean_.transpose()).array().rowwise() / scale_.transpose().array();
}

}  // namespace otssl
