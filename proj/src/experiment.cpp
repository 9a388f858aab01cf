#include "otssl/experiment.hpp"

#include "otssl/errors.hpp"
#include "otssl/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

namespace otssl {

namespace {

Eigen::Index round_half_up(double x) {
    // The slack keeps values such as 0.15 * 150 = 22.4999... on the upper side.
    return static_cast<Eigen::Index>(std::floor(x + 0.5 + 1e-9));
}

/// Uniform integer in [0, bound) by rejection; unlike
/// std::uniform_int_distribution its output is the same on every standard
/// library.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = 0;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % bound;
}

void shuffle(std::vector<Eigen::Index>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(v[i - 1], v[j]);
    }
}

/// Splits `total` over groups in proportion to `weights` by the largest
/// remainder method; ties go to the lower group index.
std::vector<Eigen::Index> apportion(const std::vector<Eigen::Index>& weights, Eigen::Index total) {
    const Eigen::Index sum = std::accumulate(weights.begin(), weights.end(), Eigen::Index{0});
    std::vector<Eigen::Index> quota(weights.size());
    std::vector<std::pair<Eigen::Index, std::size_t>> remainders;
    Eigen::Index assigned = 0;
    for (std::size_t g = 0; g < weights.size(); ++g) {
        quota[g] = total * weights[g] / sum;
        assigned += quota[g];
        remainders.emplace_back(total * weights[g] % sum, g);
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& x, const auto& y) { return x.first > y.first; });
    for (std::size_t r = 0; assigned < total; ++r, ++assigned) {
        ++quota[remainders[r].second];
    }
    return quota;
}

Matrix gather(const Matrix& features, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = features.row(rows[r]);
    }
    return out;
}

std::vector<int> gather(const std::vector<int>& labels, const std::vector<Eigen::Index>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (const auto r : rows) {
        out.push_back(labels[static_cast<std::size_t>(r)]);
    }
    return out;
}

Matrix stack(const Matrix& top, const Matrix& bottom) {
    Matrix out(top.rows() + bottom.rows(), top.cols());
    out << top, bottom;
    return out;
}

}  // namespace

SplitSizes split_sizes(Eigen::Index n, double zeta) {
    if (!(zeta > 0.0 && zeta < 1.0)) {
        throw InvalidInput("zeta must lie in (0, 1)");
    }
    SplitSizes s;
    s.labeled = std::min(round_half_up(zeta * static_cast<double>(n)), n);
    const Eigen::Index rest = n - s.labeled;
    s.unlabeled = round_half_up(0.4 * static_cast<double>(rest));
    s.new_points = rest - s.unlabeled;
    return s;
}

Split make_split(const Dataset& dataset, double zeta, std::uint64_t seed) {
    dataset.validate();
    const Eigen::Index n = dataset.size();
    const SplitSizes sizes = split_sizes(n, zeta);
    const int k = dataset.num_classes();
    if (sizes.labeled < k) {
        throw InfeasibleSplit("zeta=" + std::to_string(zeta) + " gives " + std::to_string(sizes.labeled) +
                              " labeled points, fewer than the " + std::to_string(k) + " classes");
    }

    std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        members[static_cast<std::size_t>(dataset.labels[static_cast<std::size_t>(i)])].push_back(i);
    }
    std::vector<Eigen::Index> class_sizes;
    for (const auto& m : members) {
        if (m.empty()) {
            throw InfeasibleSplit("a class has no members in dataset '" + dataset.name + "'");
        }
        class_sizes.push_back(static_cast<Eigen::Index>(m.size()));
    }

    std::vector<Eigen::Index> labeled = apportion(class_sizes, sizes.labeled);
    // Guarantee one labeled representative per class, taking from the
    // class with the most labeled members (lowest index on ties).
    for (std::size_t c = 0; c < labeled.size(); ++c) {
        if (labeled[c] == 0) {
            const auto donor = std::max_element(labeled.begin(), labeled.end()) - labeled.begin();
            --labeled[static_cast<std::size_t>(donor)];
            labeled[c] = 1;
        }
    }
    std::vector<Eigen::Index> rest(class_sizes.size());
    for (std::size_t c = 0; c < rest.size(); ++c) {
        rest[c] = class_sizes[c] - labeled[c];
    }
    const std::vector<Eigen::Index> unlabeled = apportion(rest, sizes.unlabeled);

    std::mt19937_64 rng(seed);
    Split split;
    split.zeta = zeta;
    split.seed = seed;
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& m = members[c];
        shuffle(m, rng);
        const auto a = m.begin() + labeled[c];
        const auto b = a + unlabeled[c];
        split.labeled.insert(split.labeled.end(), m.begin(), a);
        split.unlabeled.insert(split.unlabeled.end(), a, b);
        split.new_points.insert(split.new_points.end(), b, m.end());
    }
    std::sort(split.labeled.begin(), split.labeled.end());
    std::sort(split.unlabeled.begin(), split.unlabeled.end());
    std::sort(split.new_points.begin(), split.new_points.end());
    return split;
}

std::uint64_t run_seed(std::uint64_t master_seed, int run_index) {
    return master_seed + static_cast<std::uint64_t>(run_index);
}

MetricSummary summarize(std::span<const double> values) {
    MetricSummary s;
    if (values.empty()) {
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (const double v : values) {
            ss += (v - s.mean) * (v - s.mean);
        }
        s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

std::size_t ExperimentReport::successful_runs() const {
    return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const RunResult& r) { return r.ok; }));
}

SplitPredictions predict_split(const Dataset& dataset, const Split& split, const ExperimentConfig& config) {
    if (split.labeled.empty() || split.unlabeled.empty() || split.new_points.empty()) {
        throw InvalidInput("split leaves an empty labeled, unlabeled or out-of-sample set");
    }
    const int k = dataset.num_classes();
    const Matrix x_l = gather(dataset.features, split.labeled);
    const Matrix x_u = gather(dataset.features, split.unlabeled);
    const Matrix x_new = gather(dataset.features, split.new_points);
    const std::vector<int> y_l = gather(dataset.labels, split.labeled);

    PropagationConfig prop;
    prop.epsilon = config.transduction_epsilon;
    prop.certainty_threshold = config.certainty_threshold;
    prop.max_rounds = config.max_rounds;
    prop.target = config.round_target;
    prop.sinkhorn = config.sinkhorn;

    InductionConfig ind;
    ind.epsilon = config.induction_epsilon;
    ind.rule = config.rule;
    ind.sinkhorn = config.sinkhorn;

    const LabeledPool pool(x_l, y_l, k);
    SplitPredictions out;

    // Inductive: train on X_L + X_U, then label X_new in one batch.
    const PropagationResult transduced = propagate(pool, x_u, prop);
    out.propagation_rounds = transduced.rounds;
    const Matrix x_train = stack(x_l, x_u);
    std::vector<int> y_train = y_l;
    y_train.insert(y_train.end(), transduced.predicted_labels.begin(), transduced.predicted_labels.end());
    out.oti = predict_batch(x_train, y_train, x_new, k, ind);

    // Transductive reference: X_new joins the unlabeled side during training.
    const PropagationResult merged = propagate(pool, stack(x_u, x_new), prop);
    out.reference.assign(merged.predicted_labels.end() - static_cast<std::ptrdiff_t>(x_new.rows()),
                         merged.predicted_labels.end());

    if (config.singleton_diagnostic) {
        std::size_t agree = 0;
        for (Eigen::Index j = 0; j < x_new.rows(); ++j) {
            const Matrix single = x_new.row(j);
            if (predict_batch(x_train, y_train, single, k, ind).front() == out.oti[static_cast<std::size_t>(j)]) {
                ++agree;
            }
        }
        out.singleton_agreement = static_cast<double>(agree) / static_cast<double>(x_new.rows());
    }
    return out;
}

RunResult run_once(const Dataset& dataset, const Split& split, const ExperimentConfig& config) {
    const SplitPredictions pred = predict_split(dataset, split, config);
    const std::vector<int> truth = gather(dataset.labels, split.new_points);

    RunResult result;
    result.seed = split.seed;
    result.labeled = static_cast<Eigen::Index>(split.labeled.size());
    result.unlabeled = static_cast<Eigen::Index>(split.unlabeled.size());
    result.new_points = static_cast<Eigen::Index>(split.new_points.size());
    result.propagation_rounds = pred.propagation_rounds;
    result.singleton_agreement = pred.singleton_agreement;
    result.oti_ari = adjusted_rand_index(truth, pred.oti);
    result.oti_nmi = normalized_mutual_information(truth, pred.oti);
    result.reference_ari = adjusted_rand_index(truth, pred.reference);
    result.reference_nmi = normalized_mutual_information(truth, pred.reference);
    result.ok = true;
    return result;
}

std::vector<ExperimentReport> run_experiment(const Dataset& input, std::span<const double> zetas,
                                             const ExperimentConfig& config) {
    input.validate();
    if (zetas.empty()) {
        throw InvalidInput("no zeta values given");
    }
    if (config.repetitions < 1) {
        throw InvalidInput("repetitions must be at least 1");
    }
    Dataset dataset = input;
    if (config.standardize) {
        dataset.features = Standardizer::fit(dataset.features).apply(dataset.features);
    }

    std::vector<ExperimentReport> reports;
    for (const double zeta : zetas) {
        ExperimentReport report;
        report.dataset = dataset.name;
        report.zeta = zeta;
        report.repetitions = config.repetitions;
        for (int run = 0; run < config.repetitions; ++run) {
            const std::uint64_t seed = run_seed(config.master_seed, run);
            RunResult r;
            try {
                r = run_once(dataset, make_split(dataset, zeta, seed), config);
            } catch (const std::exception& e) {
                r = RunResult{};
                r.seed = seed;
                r.ok = false;
                r.error = e.what();
            }
            r.run_index = run;
            report.runs.push_back(std::move(r));
        }

        std::vector<double> oa, on, ra, rn;
        for (const auto& r : report.runs) {
            if (r.ok) {
                oa.push_back(r.oti_ari);
                on.push_back(r.oti_nmi);
                ra.push_back(r.reference_ari);
                rn.push_back(r.reference_nmi);
            }
        }
        report.oti_ari = summarize(oa);
        report.oti_nmi = summarize(on);
        report.reference_ari = summarize(ra);
        report.reference_nmi = summarize(rn);
        report.complete = report.successful_runs() == static_cast<std::size_t>(config.repetitions);
        reports.push_back(std::move(report));
    }
    return reports;
}

}  // namespace otssl
