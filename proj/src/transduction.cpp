#include "otssl/transduction.hpp"

#include "otssl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

namespace otssl {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

Matrix normalize_columns(const Matrix& coupling) {
    const Eigen::RowVectorXd sums = coupling.colwise().sum();
    if ((sums.array() <= 0.0).any() || !sums.allFinite()) {
        throw NumericalFailure("transport plan has a column with no mass");
    }
    return coupling.array().rowwise() / sums.array();
}

struct Affinities {
    Matrix weights;
    bool converged;
};

Affinities compute_affinities(const Matrix& labeled, const Matrix& unlabeled, const Epsilon& epsilon,
                              const SinkhornOptions& options) {
    if (labeled.rows() == 0 || unlabeled.rows() == 0) {
        throw InvalidInput("bipartite affinities need nonempty labeled and unlabeled sets");
    }
    const TransportPlan plan = uniform_plan(labeled, unlabeled, epsilon, options);
    return {normalize_columns(plan.coupling), plan.converged};
}

Matrix gather_rows(const Matrix& source, const std::vector<Eigen::Index>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), source.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.row(static_cast<Eigen::Index>(r)) = source.row(rows[r]);
    }
    return out;
}

}  // namespace

LabeledPool::LabeledPool(Matrix points, std::vector<int> labels, int num_classes)
    : points_(std::move(points)), labels_(std::move(labels)), num_classes_(num_classes) {
    if (num_classes_ < 2) {
        throw InvalidInput("a labeled pool needs at least two classes");
    }
    if (static_cast<Eigen::Index>(labels_.size()) != points_.rows()) {
        throw InvalidInput("labeled pool has " + std::to_string(points_.rows()) + " points but " +
                           std::to_string(labels_.size()) + " labels");
    }
    if (points_.rows() < num_classes_) {
        throw InvalidInput("labeled pool is smaller than the number of classes");
    }
    if (!points_.allFinite()) {
        throw InvalidInput("labeled pool contains a non-finite feature");
    }
    std::vector<bool> seen(static_cast<std::size_t>(num_classes_), false);
    for (const int y : labels_) {
        if (y < 0 || y >= num_classes_) {
            throw InvalidInput("label " + std::to_string(y) + " is outside {0.." +
                               std::to_string(num_classes_ - 1) + "}");
        }
        seen[static_cast<std::size_t>(y)] = true;
    }
    const auto missing = std::find(seen.begin(), seen.end(), false);
    if (missing != seen.end()) {
        throw InvalidInput("class " + std::to_string(missing - seen.begin()) +
                           " has no labeled representative");
    }
}

LabelDistribution::LabelDistribution(Vector probabilities) : p_(std::move(probabilities)) {
    if (p_.size() == 0) {
        throw InvalidInput("label distribution is empty");
    }
    if (!p_.allFinite() || (p_.array() < 0.0).any()) {
        throw InvalidInput("label distribution has a negative or non-finite entry");
    }
    if (std::abs(p_.sum() - 1.0) > kProbabilityTolerance) {
        throw InvalidInput("label distribution does not sum to 1");
    }
}

int LabelDistribution::argmax() const {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < p_.size(); ++k) {
        if (p_[k] > p_[best]) {
            best = k;
        }
    }
    return static_cast<int>(best);
}

double LabelDistribution::certainty() const {
    if (p_.size() < 2) {
        return 1.0;
    }
    double h = 0.0;
    for (Eigen::Index k = 0; k < p_.size(); ++k) {
        if (p_[k] > 0.0) {
            h -= p_[k] * std::log(p_[k]);
        }
    }
    const double s = 1.0 - h / std::log(static_cast<double>(p_.size()));
    return std::clamp(s, 0.0, 1.0);
}

Matrix bipartite_affinities(const Matrix& labeled, const Matrix& unlabeled, const Epsilon& epsilon,
                            const SinkhornOptions& options) {
    return compute_affinities(labeled, unlabeled, epsilon, options).weights;
}

Matrix bipartite_affinities(const Matrix& labeled, const Matrix& unlabeled, double epsilon,
                            const SinkhornOptions& options) {
    return bipartite_affinities(labeled, unlabeled, Epsilon::fixed(epsilon), options);
}

LabelDistribution class_distribution(const Matrix& affinities, Eigen::Index column,
                                     std::span<const int> labels, int num_classes) {
    if (static_cast<Eigen::Index>(labels.size()) != affinities.rows()) {
        throw InvalidInput("affinity rows and labels differ in length");
    }
    Vector mass = Vector::Zero(num_classes);
    for (Eigen::Index i = 0; i < affinities.rows(); ++i) {
        mass[labels[static_cast<std::size_t>(i)]] += affinities(i, column);
    }
    const double total = mass.sum();
    if (!(total > 0.0)) {
        throw NumericalFailure("affinity column carries no mass");
    }
    return LabelDistribution(mass / total);
}

PropagationResult propagate(const LabeledPool& pool, const Matrix& unlabeled,
                            const PropagationConfig& config) {
    if (unlabeled.rows() == 0) {
        throw InvalidInput("propagation needs at least one unlabeled point");
    }
    if (unlabeled.cols() != pool.points().cols()) {
        throw InvalidInput("unlabeled points have dimension " + std::to_string(unlabeled.cols()) +
                           ", labeled pool has " + std::to_string(pool.points().cols()));
    }
    if (!unlabeled.allFinite()) {
        throw InvalidInput("unlabeled points contain a non-finite feature");
    }
    if (!(config.certainty_threshold >= 0.0 && config.certainty_threshold <= 1.0)) {
        throw InvalidInput("certainty threshold must lie in [0, 1]");
    }
    if (config.max_rounds < 0) {
        throw InvalidInput("max_rounds must be nonnegative");
    }

    const int k = pool.num_classes();
    const auto n_u = unlabeled.rows();

    PropagationResult result;
    result.predicted_labels.assign(static_cast<std::size_t>(n_u), -1);
    result.certainty.assign(static_cast<std::size_t>(n_u), 0.0);
    result.absorbed_in_round.assign(static_cast<std::size_t>(n_u), 0);
    std::vector<std::optional<LabelDistribution>> dists(static_cast<std::size_t>(n_u));

    Matrix pool_points = pool.points();
    std::vector<int> pool_labels = pool.labels();

    std::vector<Eigen::Index> remaining(static_cast<std::size_t>(n_u));
    for (Eigen::Index j = 0; j < n_u; ++j) {
        remaining[static_cast<std::size_t>(j)] = j;
    }

    auto score_remaining = [&]() {
        const bool whole = config.target == RoundTarget::all_unlabeled;
        const Affinities aff = compute_affinities(pool_points, whole ? unlabeled : gather_rows(unlabeled, remaining),
                                                  config.epsilon, config.sinkhorn);
        if (!aff.converged) {
            ++result.unconverged_plans;
        }
        for (std::size_t r = 0; r < remaining.size(); ++r) {
            const auto j = static_cast<std::size_t>(remaining[r]);
            const Eigen::Index column = whole ? remaining[r] : static_cast<Eigen::Index>(r);
            dists[j] = class_distribution(aff.weights, column, pool_labels, k);
            result.certainty[j] = dists[j]->certainty();
        }
    };

    while (!remaining.empty() && result.rounds < config.max_rounds) {
        ++result.rounds;
        result.pool_sizes.push_back(pool_points.rows());
        score_remaining();

        std::vector<Eigen::Index> absorbed;
        std::vector<Eigen::Index> still_open;
        for (const auto j : remaining) {
            const auto ju = static_cast<std::size_t>(j);
            if (result.certainty[ju] >= config.certainty_threshold) {
                absorbed.push_back(j);
            } else {
                still_open.push_back(j);
            }
        }
        if (absorbed.empty()) {
            break;
        }

        const auto old_size = pool_points.rows();
        pool_points.conservativeResize(old_size + static_cast<Eigen::Index>(absorbed.size()), Eigen::NoChange);
        for (std::size_t r = 0; r < absorbed.size(); ++r) {
            const auto ju = static_cast<std::size_t>(absorbed[r]);
            const int label = dists[ju]->argmax();
            result.predicted_labels[ju] = label;
            result.absorbed_in_round[ju] = result.rounds;
            pool_points.row(old_size + static_cast<Eigen::Index>(r)) = unlabeled.row(absorbed[r]);
            pool_labels.push_back(label);
        }
        remaining = std::move(still_open);
    }

    if (!remaining.empty()) {
        ++result.rounds;
        result.pool_sizes.push_back(pool_points.rows());
        if (!dists[static_cast<std::size_t>(remaining.front())]) {
            score_remaining();
        }
        for (const auto j : remaining) {
            const auto ju = static_cast<std::size_t>(j);
            result.predicted_labels[ju] = dists[ju]->argmax();
            result.absorbed_in_round[ju] = result.rounds;
        }
    }

    result.distributions.reserve(static_cast<std::size_t>(n_u));
    for (auto& d : dists) {
        result.distributions.push_back(std::move(*d));
    }
    return result;
}

double transductive_objective(const Matrix& affinities, std::span<const int> labeled_classes,
                              const Matrix& predictions) {
    if (static_cast<Eigen::Index>(labeled_classes.size()) != affinities.rows() ||
        predictions.rows() != affinities.cols()) {
        throw InvalidInput("transductive objective: inconsistent dimensions");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < affinities.rows(); ++i) {
        const int y = labeled_classes[static_cast<std::size_t>(i)];
        if (y < 0 || y >= predictions.cols()) {
            throw InvalidInput("labeled class outside the prediction width");
        }
        for (Eigen::Index j = 0; j < affinities.cols(); ++j) {
            Vector diff = predictions.row(j).transpose();
            diff[y] -= 1.0;
            total += affinities(i, j) * diff.squaredNorm();
        }
    }
    return total;
}

double transductive_objective(const Matrix& affinities, std::span<const double> labeled_values,
                              std::span<const double> predictions) {
    if (static_cast<Eigen::Index>(labeled_values.size()) != affinities.rows() ||
        static_cast<Eigen::Index>(predictions.size()) != affinities.cols()) {
        throw InvalidInput("transductive objective: inconsistent dimensions");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < affinities.rows(); ++i) {
        for (Eigen::Index j = 0; j < affinities.cols(); ++j) {
            const double d = labeled_values[static_cast<std::size_t>(i)] - predictions[static_cast<std::size_t>(j)];
            total += affinities(i, j) * d * d;
        }
    }
    return total;
}

}  // namespace otssl
