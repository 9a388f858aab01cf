#include "otssl/induction.hpp"

#include "otssl/errors.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace otssl {

namespace {

constexpr double kWeightSumTolerance = 1e-12;

void check_lengths(const InductionWeights& w, std::size_t labels) {
    if (static_cast<Eigen::Index>(labels) != w.size()) {
        throw InvalidInput("weights have length " + std::to_string(w.size()) + " but there are " +
                           std::to_string(labels) + " labels");
    }
}

struct SignedMass {
    double positive = 0.0;
    double negative = 0.0;
};

SignedMass signed_mass(const InductionWeights& w, std::span<const int> signed_labels) {
    check_lengths(w, signed_labels.size());
    SignedMass m;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const int y = signed_labels[static_cast<std::size_t>(i)];
        if (y == 1) {
            m.positive += w[i];
        } else if (y == -1) {
            m.negative += w[i];
        } else {
            throw InvalidInput("binary labels must be +1 or -1, got " + std::to_string(y));
        }
    }
    return m;
}

}  // namespace

InductionWeights::InductionWeights(Vector weights) : w_(std::move(weights)) {
    if (w_.size() == 0) {
        throw InvalidInput("induction weights are empty");
    }
    if (!w_.allFinite() || (w_.array() < 0.0).any()) {
        throw InvalidInput("induction weights must be finite and nonnegative");
    }
    if (std::abs(w_.sum() - 1.0) > kWeightSumTolerance) {
        throw InvalidInput("induction weights do not sum to 1");
    }
}

InductionWeights InductionWeights::from_column(const Eigen::Ref<const Vector>& column) {
    const double total = column.sum();
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw NumericalFailure("transport column has no mass to normalize");
    }
    return InductionWeights(column / total);
}

BinaryEncoding::BinaryEncoding(int positive_class, int negative_class)
    : positive_(positive_class), negative_(negative_class) {
    if (positive_ == negative_) {
        throw InvalidInput("binary encoding needs two distinct classes");
    }
}

int BinaryEncoding::to_signed(int class_index) const {
    if (class_index == positive_) {
        return 1;
    }
    if (class_index == negative_) {
        return -1;
    }
    throw InvalidInput("class " + std::to_string(class_index) + " is not part of the binary encoding");
}

int BinaryEncoding::to_class(int sign) const {
    if (sign == 1) {
        return positive_;
    }
    if (sign == -1) {
        return negative_;
    }
    throw InvalidInput("binary label must be +1 or -1");
}

std::vector<int> BinaryEncoding::encode(std::span<const int> classes) const {
    std::vector<int> out;
    out.reserve(classes.size());
    for (const int c : classes) {
        out.push_back(to_signed(c));
    }
    return out;
}

std::vector<InductionWeights> induction_weights(const Matrix& train, const Matrix& new_points,
                                                const Epsilon& epsilon, const SinkhornOptions& options) {
    if (train.rows() == 0 || new_points.rows() == 0) {
        throw InvalidInput("induction needs nonempty training and new point sets");
    }
    const TransportPlan plan = uniform_plan(train, new_points, epsilon, options);
    std::vector<InductionWeights> out;
    out.reserve(static_cast<std::size_t>(new_points.rows()));
    for (Eigen::Index j = 0; j < plan.coupling.cols(); ++j) {
        out.push_back(InductionWeights::from_column(plan.coupling.col(j)));
    }
    return out;
}

std::vector<InductionWeights> induction_weights(const Matrix& train, const Matrix& new_points, double epsilon,
                                                const SinkhornOptions& options) {
    return induction_weights(train, new_points, Epsilon::fixed(epsilon), options);
}

double inductive_objective(const InductionWeights& w, std::span<const int> signed_labels, double candidate) {
    check_lengths(w, signed_labels.size());
    double total = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const double d = signed_labels[static_cast<std::size_t>(i)] - candidate;
        total += w[i] * d * d;
    }
    return total;
}

double predict_regression_value(const InductionWeights& w, std::span<const int> signed_labels) {
    const SignedMass m = signed_mass(w, signed_labels);
    return (m.positive - m.negative) / (m.positive + m.negative);
}

int predict_binary(const InductionWeights& w, std::span<const int> signed_labels) {
    return predict_regression_value(w, signed_labels) >= 0.0 ? 1 : -1;
}

int predict_multiclass(const InductionWeights& w, std::span<const int> labels, int num_classes) {
    check_lengths(w, labels.size());
    if (num_classes < 1) {
        throw InvalidInput("num_classes must be positive");
    }
    Vector mass = Vector::Zero(num_classes);
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= num_classes) {
            throw InvalidInput("label " + std::to_string(y) + " is outside {0.." + std::to_string(num_classes - 1) + "}");
        }
        mass[y] += w[i];
    }
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < num_classes; ++k) {
        if (mass[k] > mass[best]) {
            best = k;
        }
    }
    return static_cast<int>(best);
}

std::vector<int> predict_batch(const Matrix& train, std::span<const int> train_labels, const Matrix& new_points,
                               int num_classes, const InductionConfig& config) {
    if (static_cast<Eigen::Index>(train_labels.size()) != train.rows()) {
        throw InvalidInput("training points and labels differ in length");
    }
    if (config.rule == DecisionRule::binary_sign && num_classes != 2) {
        throw InvalidInput("the sign rule needs exactly two classes");
    }
    const auto weights = induction_weights(train, new_points, config.epsilon, config.sinkhorn);

    std::vector<int> out;
    out.reserve(weights.size());
    if (config.rule == DecisionRule::binary_sign) {
        const std::vector<int> signed_labels = config.encoding.encode(train_labels);
        for (const auto& w : weights) {
            out.push_back(config.encoding.to_class(predict_binary(w, signed_labels)));
        }
    } else {
        for (const auto& w : weights) {
            out.push_back(predict_multiclass(w, train_labels, num_classes));
        }
    }
    return out;
}

}  // namespace otssl
