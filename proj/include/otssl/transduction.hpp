#pragma once

#include "otssl/ot_core.hpp"

#include <span>
#include <vector>

namespace otssl {

/// Labeled points X_L with class indices in {0..K-1}; every class has at
/// least one representative.
class LabeledPool {
public:
    LabeledPool(Matrix points, std::vector<int> labels, int num_classes);

    const Matrix& points() const noexcept { return points_; }
    const std::vector<int>& labels() const noexcept { return labels_; }
    int num_classes() const noexcept { return num_classes_; }
    Eigen::Index size() const noexcept { return points_.rows(); }

private:
    Matrix points_;
    std::vector<int> labels_;
    int num_classes_;
};

/// Probability vector over K classes.
class LabelDistribution {
public:
    explicit LabelDistribution(Vector probabilities);

    const Vector& probabilities() const noexcept { return p_; }
    Eigen::Index num_classes() const noexcept { return p_.size(); }

    /// Most probable class; the lowest index wins ties.
    int argmax() const;

    /// 1 - H(p) / log K, clamped to [0, 1]. 1 for one-hot, 0 for uniform.
    double certainty() const;

private:
    Vector p_;
};

/// Target measure of each propagation round.
enum class RoundTarget {
    /// Only the points still unlabeled at the start of the round.
    remaining,
    /// Every originally unlabeled point; absorbed points keep their labels
    /// but stay in the target so both measures keep the same class mix.
    all_unlabeled,
};

struct PropagationConfig {
    Epsilon epsilon = Epsilon::automatic();
    /// Certainty a point needs to be absorbed into the labeled pool.
    double certainty_threshold = 0.8;
    /// Rounds that re-plan against the grown pool. Every re-plan transports
    /// the whole pool onto a smaller target, so extra rounds push the class
    /// mix of confidently absorbed points onto the leftovers.
    int max_rounds = 1;
    RoundTarget target = RoundTarget::remaining;
    SinkhornOptions sinkhorn{};
};

struct PropagationResult {
    std::vector<int> predicted_labels;
    std::vector<LabelDistribution> distributions;
    std::vector<double> certainty;
    /// Rounds executed, including the forced final round if one was needed.
    int rounds = 0;
    /// Labeled pool size at the start of each round.
    std::vector<Eigen::Index> pool_sizes;
    /// Round in which each unlabeled point was labeled (1-based).
    std::vector<int> absorbed_in_round;
    int unconverged_plans = 0;
};

/// Column-normalized transport plan between uniform measures on X_L and X_U:
/// entry (i, j) is the share of unlabeled point j's mass coming from labeled
/// point i.
Matrix bipartite_affinities(const Matrix& labeled, const Matrix& unlabeled, const Epsilon& epsilon,
                            const SinkhornOptions& options = {});
Matrix bipartite_affinities(const Matrix& labeled, const Matrix& unlabeled, double epsilon,
                            const SinkhornOptions& options = {});

/// Class mass of column j of `affinities`: p(c) = sum over labeled i with
/// label c of W(i, j).
LabelDistribution class_distribution(const Matrix& affinities, Eigen::Index column,
                                     std::span<const int> labels, int num_classes);

/// Incremental OT label propagation. Each round transports the current
/// labeled pool onto the remaining unlabeled points, scores every remaining
/// point by the certainty of its class distribution and absorbs those at or
/// above the threshold. Stops when everything is labeled, nothing passes the
/// threshold or `max_rounds` is reached; leftovers take the argmax of their
/// latest distribution in one final forced round (which only transports when
/// max_rounds is 0). The input pool is never modified.
PropagationResult propagate(const LabeledPool& pool, const Matrix& unlabeled,
                            const PropagationConfig& config = {});

/// Smoothness objective sum_i sum_j W(i,j) * ||onehot(y_i) - f_j||^2 where
/// row j of `predictions` is a length-K score vector for unlabeled point j.
double transductive_objective(const Matrix& affinities, std::span<const int> labeled_classes,
                              const Matrix& predictions);

/// Scalar form sum_i sum_j W(i,j) * (y_i - f_j)^2, e.g. with +/-1 labels.
double transductive_objective(const Matrix& affinities, std::span<const double> labeled_values,
                              std::span<const double> predictions);

}  // namespace otssl
