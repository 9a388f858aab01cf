#include "otssl/ot_core.hpp"

#include "otssl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace otssl {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kScalingFloor = 1e-300;
constexpr double kScalingCeiling = 1e300;
constexpr int kAnnealStageIterations = 100;
constexpr double kAnnealStageTolerance = 1e-4;

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw InvalidInput(std::string(what) + " contains a non-finite value");
    }
}

void validate_marginal(const Vector& w, const char* name) {
    if (w.size() == 0) {
        throw InvalidInput(std::string("marginal ") + name + " is empty");
    }
    if (!w.allFinite()) {
        throw InvalidInput(std::string("marginal ") + name + " contains a non-finite value");
    }
    if ((w.array() <= 0.0).any()) {
        throw InvalidInput(std::string("marginal ") + name +
                           " has a zero or negative entry; zero-weight supports are not supported");
    }
    if (std::abs(w.sum() - 1.0) > kWeightSumTolerance) {
        throw InvalidInput(std::string("marginal ") + name + " does not sum to 1");
    }
}

bool in_scaling_range(const Vector& s) {
    return s.allFinite() && (s.array() >= kScalingFloor).all() && (s.array() <= kScalingCeiling).all();
}

/// Row-wise log-sum-exp of (g_j - C_ij) / eps.
Vector row_logsumexp(const Matrix& cost, const Vector& g, double eps) {
    Eigen::ArrayXXd z = (-cost.array()).rowwise() + g.transpose().array();
    z /= eps;
    Eigen::ArrayXd mx = z.rowwise().maxCoeff();
    return (mx + (z.colwise() - mx).exp().rowwise().sum().log()).matrix();
}

/// Column-wise log-sum-exp of (f_i - C_ij) / eps.
Vector col_logsumexp(const Matrix& cost, const Vector& f, double eps) {
    Eigen::ArrayXXd z = (-cost.array()).colwise() + f.array();
    z /= eps;
    Eigen::ArrayXd mx = z.colwise().maxCoeff().transpose();
    return (mx + (z.rowwise() - mx.transpose()).exp().colwise().sum().log().transpose()).matrix();
}

struct ScalingState {
    Vector u;
    Vector v;
};

struct LoopOutcome {
    int iterations = 0;
    bool hit_tolerance = false;
    double best_error = std::numeric_limits<double>::infinity();
};

}  // namespace

DiscreteMeasure DiscreteMeasure::uniform(Matrix points) {
    const auto n = points.rows();
    if (n == 0) {
        throw InvalidInput("cannot build a uniform measure on an empty point set");
    }
    DiscreteMeasure m{std::move(points), Vector::Constant(n, 1.0 / static_cast<double>(n))};
    m.validate();
    return m;
}

void DiscreteMeasure::validate() const {
    if (support.rows() == 0) {
        throw InvalidInput("measure support is empty");
    }
    if (weights.size() != support.rows()) {
        throw InvalidInput("measure weights and support have different lengths");
    }
    require_finite(support, "measure support");
    if (!weights.allFinite() || (weights.array() < 0.0).any()) {
        throw InvalidInput("measure weights must be finite and nonnegative");
    }
    if (std::abs(weights.sum() - 1.0) > kWeightSumTolerance) {
        throw InvalidInput("measure weights do not sum to 1");
    }
}

CostMatrix::CostMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.size() == 0) {
        throw InvalidInput("cost matrix is empty");
    }
    require_finite(values_, "cost matrix");
    if ((values_.array() < 0.0).any()) {
        throw InvalidInput("cost matrix has a negative entry");
    }
}

double CostMatrix::median() const {
    std::vector<double> v(values_.data(), values_.data() + values_.size());
    const auto mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    const double upper = v[mid];
    if (v.size() % 2 == 1) {
        return upper;
    }
    const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

double CostMatrix::mean() const { return values_.mean(); }

CostMatrix build_cost_matrix(const Matrix& source, const Matrix& target) {
    if (source.rows() == 0 || target.rows() == 0) {
        throw InvalidInput("cost matrix inputs must be nonempty");
    }
    if (source.cols() != target.cols()) {
        throw InvalidInput("feature dimension mismatch: " + std::to_string(source.cols()) + " vs " +
                           std::to_string(target.cols()));
    }
    require_finite(source, "source points");
    require_finite(target, "target points");

    // ||x||^2 + ||y||^2 - 2 x.y loses precision for nearby points, so use
    // the direct difference form.
    Matrix c(source.rows(), target.rows());
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
        c.col(j) = (source.rowwise() - target.row(j)).rowwise().squaredNorm();
    }
    return CostMatrix(std::move(c));
}

Epsilon Epsilon::automatic(double median_factor) {
    if (!(median_factor > 0.0) || !std::isfinite(median_factor)) {
        throw InvalidInput("epsilon median factor must be positive and finite");
    }
    return Epsilon(median_factor, std::nullopt);
}

Epsilon Epsilon::fixed(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidInput("epsilon must be positive and finite");
    }
    return Epsilon(0.0, value);
}

double Epsilon::resolve(const CostMatrix& cost) const {
    if (fixed_) {
        return *fixed_;
    }
    double scale = cost.median();
    if (scale <= 0.0) {
        scale = cost.mean();
    }
    if (scale <= 0.0) {
        scale = 1.0;
    }
    return factor_ * scale;
}

double TransportPlan::transport_cost(const CostMatrix& cost) const {
    if (cost.rows() != coupling.rows() || cost.cols() != coupling.cols()) {
        throw InvalidInput("cost matrix and coupling have different shapes");
    }
    return coupling.cwiseProduct(cost.values()).sum();
}

double marginal_violation(const Matrix& coupling, const Vector& a, const Vector& b) {
    const double rows = (coupling.rowwise().sum() - a).cwiseAbs().maxCoeff();
    const double cols = (coupling.colwise().sum().transpose() - b).cwiseAbs().maxCoeff();
    return std::max(rows, cols);
}

double plan_entropy(const Matrix& coupling) {
    double h = 0.0;
    for (Eigen::Index j = 0; j < coupling.cols(); ++j) {
        for (Eigen::Index i = 0; i < coupling.rows(); ++i) {
            const double t = coupling(i, j);
            if (t > 0.0) {
                h -= t * (std::log(t) - 1.0);
            }
        }
    }
    return h;
}

TransportPlan sinkhorn(const Vector& a, const Vector& b, const CostMatrix& cost,
                       const SinkhornOptions& options) {
    validate_marginal(a, "a");
    validate_marginal(b, "b");
    if (cost.rows() != a.size() || cost.cols() != b.size()) {
        throw InvalidInput("cost matrix is " + std::to_string(cost.rows()) + "x" +
                           std::to_string(cost.cols()) + " but marginals have lengths " +
                           std::to_string(a.size()) + " and " + std::to_string(b.size()));
    }
    const double eps = options.epsilon;
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw InvalidInput("epsilon must be positive and finite");
    }
    if (!(options.tolerance > 0.0)) {
        throw InvalidInput("tolerance must be positive");
    }
    if (options.max_iterations < 1) {
        throw InvalidInput("max_iterations must be at least 1");
    }

    const Matrix& c = cost.values();
    const auto n = a.size();
    const auto m = b.size();

    TransportPlan plan;
    plan.epsilon = eps;

    LoopOutcome outcome;
    std::optional<ScalingState> warm_start;
    bool need_log = options.stabilization == Stabilization::log_only;

    if (!need_log) {
        // A kernel entry below the floor cannot be represented faithfully in
        // the exp domain (and subnormals make every product crawl), so such
        // problems go straight to the log domain.
        const Matrix kernel = (-c.array() / eps).exp().matrix();
        const bool kernel_ok = kernel.minCoeff() >= kScalingFloor;

        ScalingState best{Vector::Ones(n), Vector::Ones(m)};
        bool have_best = false;
        bool overflowed = !kernel_ok;
        Vector u = Vector::Ones(n);
        Vector v = Vector::Ones(m);
        ScalingState last_good{u, v};

        for (int it = 1; !overflowed && it <= options.max_iterations; ++it) {
            const Vector kv = kernel * v;
            if (it > 1) {
                const double err = (u.cwiseProduct(kv) - a).cwiseAbs().maxCoeff();
                if (err < outcome.best_error) {
                    outcome.best_error = err;
                    best = {u, v};
                    have_best = true;
                }
                if (err <= options.tolerance) {
                    outcome.hit_tolerance = true;
                    break;
                }
            }
            outcome.iterations = it;
            u = a.cwiseQuotient(kv);
            if (!in_scaling_range(u)) {
                overflowed = true;
                break;
            }
            v = b.cwiseQuotient(kernel.transpose() * u);
            if (!in_scaling_range(v)) {
                overflowed = true;
                break;
            }
            last_good = {u, v};
        }

        if (!overflowed) {
            if (!have_best) {
                best = {u, v};
            }
            plan.coupling = best.u.asDiagonal() * kernel * best.v.asDiagonal();
        } else {
            if (options.stabilization == Stabilization::exp_only) {
                throw NumericalFailure(
                    "Sinkhorn scaling factors left [1e-300, 1e300] at epsilon=" + std::to_string(eps) +
                    "; use log-domain stabilization for this epsilon");
            }
            need_log = true;
            if (kernel_ok) {
                warm_start = last_good;
            }
        }
    }

    if (need_log) {
        plan.used_log_domain = true;
        Vector f = Vector::Zero(n);
        Vector g = Vector::Zero(m);
        if (warm_start) {
            f = eps * warm_start->u.array().log().matrix();
            g = eps * warm_start->v.array().log().matrix();
        }
        const Vector log_a = a.array().log().matrix();
        const Vector log_b = b.array().log().matrix();

        auto row_error = [&](const Vector& r, double e) {
            return ((f.array() / e + r.array()).exp().matrix() - a).cwiseAbs().maxCoeff();
        };

        // Small epsilon relative to the cost spread: anneal from the spread
        // down, halving each stage and starting from the previous potentials.
        const double spread = c.maxCoeff() - c.minCoeff();
        std::vector<double> stages;
        for (double e = spread; e > 2.0 * eps; e *= 0.5) {
            stages.push_back(e);
        }
        if (!stages.empty()) {
            f.setZero();
            g.setZero();
            warm_start.reset();
            for (const double e : stages) {
                for (int it = 0; it < kAnnealStageIterations && outcome.iterations < options.max_iterations; ++it) {
                    const Vector r = row_logsumexp(c, g, e);
                    if (it > 0 && row_error(r, e) <= kAnnealStageTolerance) {
                        break;
                    }
                    ++outcome.iterations;
                    f = e * (log_a - r);
                    g = e * (log_b - col_logsumexp(c, f, e));
                }
            }
        }

        Vector best_f = f;
        Vector best_g = g;
        bool have_best = false;
        outcome.best_error = std::numeric_limits<double>::infinity();
        outcome.hit_tolerance = false;
        const int start = outcome.iterations;

        for (int it = start + 1; it <= std::max(options.max_iterations, start + 1); ++it) {
            const Vector r = row_logsumexp(c, g, eps);
            if (it > start + 1 || warm_start) {
                const double err = row_error(r, eps);
                if (err < outcome.best_error) {
                    outcome.best_error = err;
                    best_f = f;
                    best_g = g;
                    have_best = true;
                }
                if (err <= options.tolerance) {
                    outcome.hit_tolerance = true;
                    break;
                }
            }
            outcome.iterations = it;
            f = eps * (log_a - r);
            g = eps * (log_b - col_logsumexp(c, f, eps));
        }
        if (!have_best) {
            best_f = f;
            best_g = g;
        }
        Eigen::ArrayXXd z = (-c.array()).colwise() + best_f.array();
        z.rowwise() += best_g.transpose().array();
        plan.coupling = (z / eps).exp().matrix();
    }

    plan.iterations = outcome.iterations;
    plan.marginal_error = marginal_violation(plan.coupling, a, b);
    plan.converged = outcome.hit_tolerance && plan.marginal_error <= options.tolerance;
    return plan;
}

TransportPlan uniform_plan(const Matrix& source, const Matrix& target, const Epsilon& epsilon,
                           const SinkhornOptions& base) {
    const CostMatrix cost = build_cost_matrix(source, target);
    SinkhornOptions options = base;
    options.epsilon = epsilon.resolve(cost);
    const auto n = source.rows();
    const auto m = target.rows();
    return sinkhorn(Vector::Constant(n, 1.0 / static_cast<double>(n)),
                    Vector::Constant(m, 1.0 / static_cast<double>(m)), cost, options);
}

}  // namespace otssl
