#pragma once

#include "otssl/ot_core.hpp"

#include <span>
#include <vector>

namespace otssl {

/// Normalized affinity of one new point to every training point. Nonnegative
/// and summing to 1.
class InductionWeights {
public:
    explicit InductionWeights(Vector weights);

    /// Divides a raw transport column by its total mass.
    static InductionWeights from_column(const Eigen::Ref<const Vector>& column);

    const Vector& values() const noexcept { return w_; }
    Eigen::Index size() const noexcept { return w_.size(); }
    double operator[](Eigen::Index i) const { return w_[i]; }

private:
    Vector w_;
};

/// Two class indices mapped onto {+1, -1}. The default maps class 0 to +1,
/// so that the sign rule and the two-class vote break ties the same way.
class BinaryEncoding {
public:
    BinaryEncoding() = default;
    BinaryEncoding(int positive_class, int negative_class);

    int to_signed(int class_index) const;
    int to_class(int sign) const;

    std::vector<int> encode(std::span<const int> classes) const;

    int positive_class() const noexcept { return positive_; }
    int negative_class() const noexcept { return negative_; }

private:
    int positive_ = 0;
    int negative_ = 1;
};

/// One plan between the uniform measures on the training set and the whole
/// batch of new points, with each new point's column normalized.
std::vector<InductionWeights> induction_weights(const Matrix& train, const Matrix& new_points,
                                                const Epsilon& epsilon, const SinkhornOptions& options = {});
std::vector<InductionWeights> induction_weights(const Matrix& train, const Matrix& new_points, double epsilon,
                                                const SinkhornOptions& options = {});

/// sum_i w_i (y_i - candidate)^2 over +/-1 training labels.
double inductive_objective(const InductionWeights& w, std::span<const int> signed_labels, double candidate);

/// Weighted mean sum_i w_i y_i / sum_i w_i, in [-1, 1]. Computed as
/// (S+ - S-) / (S+ + S-) so its sign agrees exactly with comparing the two
/// class masses.
double predict_regression_value(const InductionWeights& w, std::span<const int> signed_labels);

/// +1 when the regression value is >= 0, otherwise -1.
int predict_binary(const InductionWeights& w, std::span<const int> signed_labels);

/// Class with the largest total weight; the lowest index wins ties.
int predict_multiclass(const InductionWeights& w, std::span<const int> labels, int num_classes);

enum class DecisionRule { multiclass_vote, binary_sign };

struct InductionConfig {
    Epsilon epsilon = Epsilon::automatic();
    DecisionRule rule = DecisionRule::multiclass_vote;
    BinaryEncoding encoding{};
    SinkhornOptions sinkhorn{};
};

/// Labels for every row of `new_points` from one shared transport plan.
/// `binary_sign` needs num_classes == 2 and maps through `config.encoding`.
std::vector<int> predict_batch(const Matrix& train, std::span<const int> train_labels, const Matrix& new_points,
                               int num_classes, const InductionConfig& config = {});

}  // namespace otssl
