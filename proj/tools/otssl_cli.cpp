// otssl: run the randomized split protocol, predict out-of-sample labels, or
// score two label files.

#include "otssl/dataset.hpp"
#include "otssl/errors.hpp"
#include "otssl/evaluation.hpp"
#include "otssl/experiment.hpp"
#include "otssl/induction.hpp"
#include "otssl/report.hpp"
#include "otssl/transduction.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace otssl;

Epsilon parse_epsilon(const std::string& text) {
    if (text == "auto") {
        return Epsilon::automatic();
    }
    std::size_t used = 0;
    double value = 0.0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != text.size()) {
        throw InvalidInput("--epsilon expects 'auto' or a positive number, got '" + text + "'");
    }
    return Epsilon::fixed(value);
}

std::filesystem::path default_table_path(const std::filesystem::path& out) {
    auto table = out;
    table.replace_extension(".csv");
    if (table == out) {
        table = out;
        table += ".table.csv";
    }
    return table;
}

struct RunOptions {
    std::string data;
    std::string label_col = "class";
    std::vector<double> zetas{0.05, 0.15, 0.25};
    int reps = 10;
    std::string epsilon = "auto";
    std::string induction_epsilon;
    double alpha = 0.8;
    int max_rounds = 1;
    std::uint64_t seed = 0;
    bool standardize = false;
    bool singleton_diagnostic = false;
    std::string out;
    std::string table;
};

int cmd_run(const RunOptions& o) {
    const Dataset dataset = load_csv(o.data, o.label_col);

    ExperimentConfig config;
    config.transduction_epsilon = parse_epsilon(o.epsilon);
    config.induction_epsilon = parse_epsilon(o.induction_epsilon.empty() ? o.epsilon : o.induction_epsilon);
    config.certainty_threshold = o.alpha;
    config.max_rounds = o.max_rounds;
    config.repetitions = o.reps;
    config.master_seed = o.seed;
    config.standardize = o.standardize;
    config.singleton_diagnostic = o.singleton_diagnostic;

    const auto reports = run_experiment(dataset, o.zetas, config);
    const auto config_json = config_to_json(config, o.zetas);

    std::printf("%-12s %6s %10s %10s %10s %10s %s\n", "dataset", "zeta", "OTI-ARI", "OTI-NMI", "ref-ARI", "ref-NMI",
                "runs");
    for (const auto& r : reports) {
        std::printf("%-12s %6.3f %10.4f %10.4f %10.4f %10.4f %zu/%d%s\n", r.dataset.c_str(), r.zeta, r.oti_ari.mean,
                    r.oti_nmi.mean, r.reference_ari.mean, r.reference_nmi.mean, r.successful_runs(), r.repetitions,
                    r.complete ? "" : " INCOMPLETE");
        for (const auto& run : r.runs) {
            if (!run.ok) {
                std::fprintf(stderr, "run %d (seed %llu) failed: %s\n", run.run_index,
                             static_cast<unsigned long long>(run.seed), run.error.c_str());
            }
        }
    }
    if (!o.out.empty()) {
        const std::filesystem::path out = o.out;
        const std::filesystem::path table = o.table.empty() ? default_table_path(out) : std::filesystem::path(o.table);
        emit_report(reports, config_json, out, table);
        std::printf("wrote %s and %s\n", out.string().c_str(), table.string().c_str());
    }
    const bool all_complete = std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.complete; });
    return all_complete ? 0 : 2;
}

struct PredictOptions {
    std::string train;
    std::string label_col = "class";
    std::string new_points;
    std::string epsilon = "auto";
    std::string induction_epsilon;
    double alpha = 0.8;
    int max_rounds = 1;
    bool standardize = false;
    std::string out;
};

int cmd_predict(const PredictOptions& o) {
    PartiallyLabeledData data = load_partially_labeled_csv(o.train, o.label_col);
    Matrix x_new = load_feature_csv(o.new_points, data.feature_names);
    if (x_new.rows() == 0) {
        throw InvalidInput("'" + o.new_points + "' has no rows to predict");
    }
    if (o.standardize) {
        const auto s = Standardizer::fit(data.features);
        data.features = s.apply(data.features);
        x_new = s.apply(x_new);
    }

    std::vector<Eigen::Index> labeled_rows;
    std::vector<Eigen::Index> unlabeled_rows;
    std::vector<int> y_l;
    for (std::size_t i = 0; i < data.labels.size(); ++i) {
        if (data.labels[i]) {
            labeled_rows.push_back(static_cast<Eigen::Index>(i));
            y_l.push_back(*data.labels[i]);
        } else {
            unlabeled_rows.push_back(static_cast<Eigen::Index>(i));
        }
    }
    auto gather = [&](const std::vector<Eigen::Index>& rows) {
        Matrix m(static_cast<Eigen::Index>(rows.size()), data.features.cols());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            m.row(static_cast<Eigen::Index>(r)) = data.features.row(rows[r]);
        }
        return m;
    };

    const int k = static_cast<int>(data.class_names.size());
    const Matrix x_l = gather(labeled_rows);
    const LabeledPool pool(x_l, y_l, k);

    Matrix x_train = x_l;
    std::vector<int> y_train = y_l;
    if (!unlabeled_rows.empty()) {
        PropagationConfig prop;
        prop.epsilon = parse_epsilon(o.epsilon);
        prop.certainty_threshold = o.alpha;
        prop.max_rounds = o.max_rounds;
        const Matrix x_u = gather(unlabeled_rows);
        const PropagationResult transduced = propagate(pool, x_u, prop);
        x_train.conservativeResize(x_l.rows() + x_u.rows(), Eigen::NoChange);
        x_train.bottomRows(x_u.rows()) = x_u;
        y_train.insert(y_train.end(), transduced.predicted_labels.begin(), transduced.predicted_labels.end());
    }

    InductionConfig ind;
    ind.epsilon = parse_epsilon(o.induction_epsilon.empty() ? o.epsilon : o.induction_epsilon);
    const std::vector<int> predicted = predict_batch(x_train, y_train, x_new, k, ind);

    std::string text = "label\n";
    for (const int y : predicted) {
        text += data.class_names[static_cast<std::size_t>(y)] + "\n";
    }
    if (o.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(o.out, std::ios::binary | std::ios::trunc);
        if (!(out << text)) {
            throw OutputError("cannot write '" + o.out + "'");
        }
    }
    return 0;
}

struct MetricsOptions {
    std::string truth;
    std::string pred;
    std::string truth_col = "label";
    std::string pred_col = "label";
};

int cmd_metrics(const MetricsOptions& o) {
    const auto truth = load_label_column(o.truth, o.truth_col);
    const auto pred = load_label_column(o.pred, o.pred_col);
    std::map<std::string, int> ids;
    auto encode = [&](const std::vector<std::string>& tokens) {
        std::vector<int> out;
        for (const auto& t : tokens) {
            out.push_back(ids.try_emplace(t, static_cast<int>(ids.size())).first->second);
        }
        return out;
    };
    const auto yt = encode(truth);
    const auto yp = encode(pred);
    std::printf("ARI %.12f\nNMI %.12f\n", adjusted_rand_index(yt, yp), normalized_mutual_information(yt, yp));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal-transport semi-supervised learning: propagation, induction and benchmark harness"};
    app.set_version_flag("--version", otssl::version());
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Repeated randomized split protocol with ARI/NMI scoring");
    run_cmd->add_option("--data", run.data, "Dataset CSV with a header row")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--label-col", run.label_col, "Name of the class column")->capture_default_str();
    run_cmd->add_option("--zeta", run.zetas, "Labeled fractions")->delimiter(',')->capture_default_str();
    run_cmd->add_option("--reps", run.reps, "Repetitions per zeta")->capture_default_str()->check(CLI::PositiveNumber);
    run_cmd->add_option("--epsilon", run.epsilon, "Regularization: 'auto' (0.1 * median cost) or a value")
        ->capture_default_str();
    run_cmd->add_option("--induction-epsilon", run.induction_epsilon, "Induction regularization (defaults to --epsilon)");
    run_cmd->add_option("--alpha", run.alpha, "Certainty threshold for absorption")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    run_cmd->add_option("--max-rounds", run.max_rounds, "Propagation rounds before the forced round")
        ->capture_default_str()->check(CLI::NonNegativeNumber);
    run_cmd->add_option("--seed", run.seed, "Master seed; run i uses seed + i")->capture_default_str();
    run_cmd->add_flag("--standardize", run.standardize, "Standardize every feature before the protocol");
    run_cmd->add_flag("--singleton-diagnostic", run.singleton_diagnostic,
                      "Also predict each new point as a singleton batch and record the agreement");
    run_cmd->add_option("--out", run.out, "JSON result document");
    run_cmd->add_option("--table", run.table, "Flat aggregate table (defaults to --out with a .csv extension)");

    PredictOptions predict;
    auto* predict_cmd = app.add_subcommand("predict", "Train on a partially labeled CSV and label new points");
    predict_cmd->add_option("--train", predict.train, "Training CSV; empty label cells mark unlabeled rows")
        ->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--label-col", predict.label_col, "Name of the class column")->capture_default_str();
    predict_cmd->add_option("--new", predict.new_points, "CSV of points to label (same feature columns)")
        ->required()->check(CLI::ExistingFile);
    predict_cmd->add_option("--epsilon", predict.epsilon, "'auto' or a value")->capture_default_str();
    predict_cmd->add_option("--induction-epsilon", predict.induction_epsilon, "Induction regularization");
    predict_cmd->add_option("--alpha", predict.alpha, "Certainty threshold")->capture_default_str()
        ->check(CLI::Range(0.0, 1.0));
    predict_cmd->add_option("--max-rounds", predict.max_rounds, "Propagation rounds")->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    predict_cmd->add_flag("--standardize", predict.standardize, "Standardize with training statistics");
    predict_cmd->add_option("--out", predict.out, "Output CSV (stdout when omitted)");

    MetricsOptions metrics;
    auto* metrics_cmd = app.add_subcommand("metrics", "ARI and NMI between two label columns");
    metrics_cmd->add_option("--truth", metrics.truth, "CSV holding reference labels")->required()
        ->check(CLI::ExistingFile);
    metrics_cmd->add_option("--pred", metrics.pred, "CSV holding predicted labels")->required()
        ->check(CLI::ExistingFile);
    metrics_cmd->add_option("--truth-col", metrics.truth_col, "Column in --truth")->capture_default_str();
    metrics_cmd->add_option("--pred-col", metrics.pred_col, "Column in --pred")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            return cmd_run(run);
        }
        if (*predict_cmd) {
            return cmd_predict(predict);
        }
        return cmd_metrics(metrics);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
