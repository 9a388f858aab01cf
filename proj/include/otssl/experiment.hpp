#pragma once

#include "otssl/dataset.hpp"
#include "otssl/induction.hpp"
#include "otssl/transduction.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace otssl {

/// Disjoint index sets over a dataset: labeled X_L, unlabeled X_U and the
/// out-of-sample set X_new.
struct Split {
    std::vector<Eigen::Index> labeled;
    std::vector<Eigen::Index> unlabeled;
    std::vector<Eigen::Index> new_points;
    double zeta = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const Split&) const = default;
};

struct SplitSizes {
    Eigen::Index labeled = 0;
    Eigen::Index unlabeled = 0;
    Eigen::Index new_points = 0;
};

/// |labeled| = round(zeta * n); of the remaining r, round(0.4 * r) are
/// unlabeled and the rest out-of-sample. Rounding is half-up.
SplitSizes split_sizes(Eigen::Index n, double zeta);

/// Seeded split stratified by class: the three set sizes are apportioned
/// over the classes in proportion to class size (largest remainder), and
/// every class gets at least one labeled member. Members are drawn at random
/// within each class.
Split make_split(const Dataset& dataset, double zeta, std::uint64_t seed);

/// Per-run seed: master seed plus the run index.
std::uint64_t run_seed(std::uint64_t master_seed, int run_index);

struct ExperimentConfig {
    Epsilon transduction_epsilon = Epsilon::automatic();
    Epsilon induction_epsilon = Epsilon::automatic();
    double certainty_threshold = 0.8;
    int max_rounds = 1;
    RoundTarget round_target = RoundTarget::remaining;
    SinkhornOptions sinkhorn{};
    DecisionRule rule = DecisionRule::multiclass_vote;
    int repetitions = 10;
    std::uint64_t master_seed = 0;
    bool standardize = false;
    /// Also predict every new point as its own singleton batch and record
    /// the agreement with the whole-batch prediction.
    bool singleton_diagnostic = false;
};

struct RunResult {
    int run_index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    Eigen::Index labeled = 0;
    Eigen::Index unlabeled = 0;
    Eigen::Index new_points = 0;
    /// OTI: trained on X_L + X_U, evaluated on X_new.
    double oti_ari = 0.0;
    double oti_nmi = 0.0;
    /// Transductive reference: propagation over X_U + X_new, scored on X_new.
    double reference_ari = 0.0;
    double reference_nmi = 0.0;
    int propagation_rounds = 0;
    std::optional<double> singleton_agreement;

    bool operator==(const RunResult&) const = default;
};

struct MetricSummary {
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator); 0 for a single run.
    double std = 0.0;

    bool operator==(const MetricSummary&) const = default;
};

struct ExperimentReport {
    std::string dataset;
    double zeta = 0.0;
    int repetitions = 0;
    std::vector<RunResult> runs;
    MetricSummary oti_ari;
    MetricSummary oti_nmi;
    MetricSummary reference_ari;
    MetricSummary reference_nmi;
    /// Every configured repetition succeeded.
    bool complete = false;

    std::size_t successful_runs() const;
    bool operator==(const ExperimentReport&) const = default;
};

/// Predictions for the out-of-sample points of one split, in the order of
/// `split.new_points`. Reads labels of the labeled indices only.
struct SplitPredictions {
    std::vector<int> oti;
    std::vector<int> reference;
    int propagation_rounds = 0;
    std::optional<double> singleton_agreement;
};

SplitPredictions predict_split(const Dataset& dataset, const Split& split, const ExperimentConfig& config);

/// Outcome of a single split: both methods trained and scored.
RunResult run_once(const Dataset& dataset, const Split& split, const ExperimentConfig& config);

/// Repetitions of the split/train/score protocol for every zeta. Each run
/// uses the split seeded by run_seed(master_seed, run). A failing run is
/// recorded with its error and the report is marked incomplete.
std::vector<ExperimentReport> run_experiment(const Dataset& dataset, std::span<const double> zetas,
                                             const ExperimentConfig& config);

MetricSummary summarize(std::span<const double> values);

}  // namespace otssl
