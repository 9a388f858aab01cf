#include "otssl/report.hpp"

#include "otssl/errors.hpp"

#include <cstdio>
#include <fstream>

#ifndef OTSSL_VERSION
#define OTSSL_VERSION "0.0.0"
#endif

namespace otssl {

namespace {

using nlohmann::json;

json epsilon_to_json(const Epsilon& e) {
    if (e.is_automatic()) {
        return {{"mode", "auto"}, {"median_factor", e.factor()}};
    }
    return {{"mode", "fixed"}, {"value", *e.fixed_value()}};
}

json summary_to_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}}; }

MetricSummary summary_from_json(const json& j) { return {j.at("mean").get<double>(), j.at("std").get<double>()}; }

json run_to_json(const RunResult& r) {
    json j = {{"run", r.run_index},
              {"seed", r.seed},
              {"ok", r.ok},
              {"sizes", {{"labeled", r.labeled}, {"unlabeled", r.unlabeled}, {"new", r.new_points}}}};
    if (r.ok) {
        j["oti"] = {{"ari", r.oti_ari}, {"nmi", r.oti_nmi}};
        j["transductive_reference"] = {{"ari", r.reference_ari}, {"nmi", r.reference_nmi}};
        j["propagation_rounds"] = r.propagation_rounds;
        if (r.singleton_agreement) {
            j["singleton_agreement"] = *r.singleton_agreement;
        }
    } else {
        j["error"] = r.error;
    }
    return j;
}

RunResult run_from_json(const json& j) {
    RunResult r;
    r.run_index = j.at("run").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.ok = j.at("ok").get<bool>();
    const auto& sizes = j.at("sizes");
    r.labeled = sizes.at("labeled").get<Eigen::Index>();
    r.unlabeled = sizes.at("unlabeled").get<Eigen::Index>();
    r.new_points = sizes.at("new").get<Eigen::Index>();
    if (r.ok) {
        r.oti_ari = j.at("oti").at("ari").get<double>();
        r.oti_nmi = j.at("oti").at("nmi").get<double>();
        r.reference_ari = j.at("transductive_reference").at("ari").get<double>();
        r.reference_nmi = j.at("transductive_reference").at("nmi").get<double>();
        r.propagation_rounds = j.at("propagation_rounds").get<int>();
        if (j.contains("singleton_agreement")) {
            r.singleton_agreement = j.at("singleton_agreement").get<double>();
        }
    } else {
        r.error = j.at("error").get<std::string>();
    }
    return r;
}

std::string format_double(const char* fmt, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

}  // namespace

std::string version() { return OTSSL_VERSION; }

json config_to_json(const ExperimentConfig& config, std::span<const double> zetas) {
    std::vector<std::uint64_t> seeds;
    for (int run = 0; run < config.repetitions; ++run) {
        seeds.push_back(run_seed(config.master_seed, run));
    }
    return {{"transduction_epsilon", epsilon_to_json(config.transduction_epsilon)},
            {"induction_epsilon", epsilon_to_json(config.induction_epsilon)},
            {"certainty_threshold", config.certainty_threshold},
            {"max_rounds", config.max_rounds},
            {"round_target", config.round_target == RoundTarget::all_unlabeled ? "all_unlabeled" : "remaining"},
            {"sinkhorn", {{"tolerance", config.sinkhorn.tolerance}, {"max_iterations", config.sinkhorn.max_iterations}}},
            {"decision_rule", config.rule == DecisionRule::binary_sign ? "binary_sign" : "multiclass_vote"},
            {"repetitions", config.repetitions},
            {"master_seed", config.master_seed},
            {"run_seeds", seeds},
            {"standardize", config.standardize},
            {"singleton_diagnostic", config.singleton_diagnostic},
            {"zetas", std::vector<double>(zetas.begin(), zetas.end())}};
}

json reports_to_json(std::span<const ExperimentReport> reports, const json& config) {
    json out = {{"format_version", kReportFormatVersion},
                {"artifact", "otssl"},
                {"artifact_version", version()},
                {"config", config},
                {"reports", json::array()}};
    for (const auto& rep : reports) {
        json runs = json::array();
        for (const auto& r : rep.runs) {
            runs.push_back(run_to_json(r));
        }
        out["reports"].push_back({{"dataset", rep.dataset},
                                  {"zeta", rep.zeta},
                                  {"repetitions", rep.repetitions},
                                  {"complete", rep.complete},
                                  {"oti", {{"ari", summary_to_json(rep.oti_ari)}, {"nmi", summary_to_json(rep.oti_nmi)}}},
                                  {"transductive_reference",
                                   {{"ari", summary_to_json(rep.reference_ari)}, {"nmi", summary_to_json(rep.reference_nmi)}}},
                                  {"runs", std::move(runs)}});
    }
    return out;
}

std::vector<ExperimentReport> reports_from_json(const json& document) {
    try {
        const int format = document.at("format_version").get<int>();
        if (format != kReportFormatVersion) {
            throw InvalidInput("unsupported report format version " + std::to_string(format));
        }
        std::vector<ExperimentReport> reports;
        for (const auto& j : document.at("reports")) {
            ExperimentReport rep;
            rep.dataset = j.at("dataset").get<std::string>();
            rep.zeta = j.at("zeta").get<double>();
            rep.repetitions = j.at("repetitions").get<int>();
            rep.complete = j.at("complete").get<bool>();
            rep.oti_ari = summary_from_json(j.at("oti").at("ari"));
            rep.oti_nmi = summary_from_json(j.at("oti").at("nmi"));
            rep.reference_ari = summary_from_json(j.at("transductive_reference").at("ari"));
            rep.reference_nmi = summary_from_json(j.at("transductive_reference").at("nmi"));
            for (const auto& r : j.at("runs")) {
                rep.runs.push_back(run_from_json(r));
            }
            reports.push_back(std::move(rep));
        }
        return reports;
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed report document: ") + e.what());
    }
}

std::string flat_table(std::span<const ExperimentReport> reports, const json& config) {
    std::string out = "# otssl results format_version=" + std::to_string(kReportFormatVersion) +
                      " artifact_version=" + version() + "\n";
    out += "# config=" + config.dump() + "\n";
    out += "dataset,zeta,metric,method,mean,std,runs\n";
    for (const auto& rep : reports) {
        const std::string runs = std::to_string(rep.successful_runs());
        const std::string prefix = rep.dataset + "," + format_double("%.4g", rep.zeta) + ",";
        const struct {
            const char* metric;
            const char* method;
            const MetricSummary& s;
        } rows[] = {{"ARI", "OTI", rep.oti_ari},
                    {"ARI", "transductive_reference", rep.reference_ari},
                    {"NMI", "OTI", rep.oti_nmi},
                    {"NMI", "transductive_reference", rep.reference_nmi}};
        for (const auto& row : rows) {
            out += prefix + row.metric + "," + row.method + "," + format_double("%.6f", row.s.mean) + "," +
                   format_double("%.6f", row.s.std) + "," + runs + "\n";
        }
    }
    return out;
}

void emit_report(std::span<const ExperimentReport> reports, const json& config,
                 const std::filesystem::path& document_path, const std::filesystem::path& table_path) {
    if (reports.empty()) {
        throw OutputError("no experiment reports to write");
    }
    auto write = [](const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw OutputError("cannot write '" + path.string() + "'");
        }
        out << text;
        out.flush();
        if (!out) {
            throw OutputError("failed while writing '" + path.string() + "'");
        }
    };
    write(document_path, reports_to_json(reports, config).dump(2) + "\n");
    write(table_path, flat_table(reports, config));
}

std::vector<ExperimentReport> read_report(const std::filesystem::path& document_path) {
    std::ifstream in(document_path);
    if (!in) {
        throw IngestionError("cannot open '" + document_path.string() + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw IngestionError("'" + document_path.string() + "' is not valid JSON: " + e.what());
    }
    return reports_from_json(doc);
}

}  // namespace otssl
