#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>

namespace otssl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weighted point cloud: row i of `support` carries mass `weights[i]`.
struct DiscreteMeasure {
    Matrix support;
    Vector weights;

    /// Uniform empirical measure (weights 1/n) over the rows of `points`.
    static DiscreteMeasure uniform(Matrix points);

    /// Throws InvalidInput unless weights form a probability vector and the
    /// support is nonempty and finite.
    void validate() const;
};

/// Nonnegative n x m matrix of pairwise transport costs.
class CostMatrix {
public:
    /// Takes ownership of `values`; throws InvalidInput on negative or
    /// non-finite entries or an empty matrix.
    explicit CostMatrix(Matrix values);

    const Matrix& values() const noexcept { return values_; }
    Eigen::Index rows() const noexcept { return values_.rows(); }
    Eigen::Index cols() const noexcept { return values_.cols(); }
    double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

    double median() const;
    double mean() const;

private:
    Matrix values_;
};

/// Squared Euclidean distances between the rows of `source` (n x d) and the
/// rows of `target` (m x d).
CostMatrix build_cost_matrix(const Matrix& source, const Matrix& target);

/// Regularization strength: either a fixed positive value or a multiple of
/// the median cost of the problem it is applied to.
class Epsilon {
public:
    static constexpr double kDefaultMedianFactor = 0.1;

    static Epsilon automatic(double median_factor = kDefaultMedianFactor);
    static Epsilon fixed(double value);

    /// For automatic mode: factor * median(C), falling back to factor *
    /// mean(C) and then to factor when the costs are mostly or entirely zero.
    double resolve(const CostMatrix& cost) const;

    bool is_automatic() const noexcept { return !fixed_.has_value(); }
    double factor() const noexcept { return factor_; }
    std::optional<double> fixed_value() const noexcept { return fixed_; }

private:
    Epsilon(double factor, std::optional<double> fixed) : factor_(factor), fixed_(fixed) {}

    double factor_;
    std::optional<double> fixed_;
};

enum class Stabilization {
    /// Exp-domain scaling, switching to log-sum-exp updates when a kernel
    /// entry or scaling factor leaves [1e-300, 1e300]. Log-domain solves at
    /// small epsilon anneal epsilon down from the cost spread.
    automatic,
    /// Exp-domain only; underflow raises NumericalFailure.
    exp_only,
    log_only,
};

struct SinkhornOptions {
    double epsilon = 1.0;
    double tolerance = 1e-9;
    int max_iterations = 10000;
    Stabilization stabilization = Stabilization::automatic;
};

struct TransportPlan {
    Matrix coupling;
    double epsilon = 0.0;
    int iterations = 0;
    bool converged = false;
    /// max(|T 1 - a|_inf, |T^T 1 - b|_inf) of `coupling` as returned.
    double marginal_error = 0.0;
    bool used_log_domain = false;

    /// Frobenius product <T, C>.
    double transport_cost(const CostMatrix& cost) const;
};

/// Entropy-regularized OT: argmin_{T in U(a,b)} <T,C> - eps * H(T) by
/// Sinkhorn-Knopp matrix scaling.
///
/// Iterates until the L-inf marginal violation is at most
/// `options.tolerance`. When `max_iterations` runs out the iterate with the
/// smallest violation is returned with `converged == false`.
TransportPlan sinkhorn(const Vector& a, const Vector& b, const CostMatrix& cost,
                       const SinkhornOptions& options);

/// H(T) = -sum t_ij (log t_ij - 1), with zero entries contributing nothing.
double plan_entropy(const Matrix& coupling);
inline double plan_entropy(const TransportPlan& plan) { return plan_entropy(plan.coupling); }

/// Max absolute deviation of the row sums from `a` and column sums from `b`.
double marginal_violation(const Matrix& coupling, const Vector& a, const Vector& b);

/// Convenience: plan between the uniform empirical measures on two point sets.
TransportPlan uniform_plan(const Matrix& source, const Matrix& target, const Epsilon& epsilon,
                           const SinkhornOptions& base = {});

}  // namespace otssl
