#pragma once

#include "otssl/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace otssl {

inline constexpr int kReportFormatVersion = 1;

/// Configuration echoed into every result file.
nlohmann::json config_to_json(const ExperimentConfig& config, std::span<const double> zetas);

nlohmann::json reports_to_json(std::span<const ExperimentReport> reports, const nlohmann::json& config);
std::vector<ExperimentReport> reports_from_json(const nlohmann::json& document);

/// dataset,zeta,metric,method,mean,std,runs rows, preceded by '#' lines
/// carrying the format version and configuration.
std::string flat_table(std::span<const ExperimentReport> reports, const nlohmann::json& config);

/// Writes the JSON document to `document_path` and the flat table to
/// `table_path`. Throws OutputError for an empty report list or an
/// unwritable path.
void emit_report(std::span<const ExperimentReport> reports, const nlohmann::json& config,
                 const std::filesystem::path& document_path, const std::filesystem::path& table_path);

std::vector<ExperimentReport> read_report(const std::filesystem::path& document_path);

/// Library version string.
std::string version();

}  // namespace otssl
