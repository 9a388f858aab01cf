#include "oracles.hpp"

#include "otssl/errors.hpp"
#include "otssl/ot_core.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

using namespace otssl;
using namespace otssl::testing;

namespace {

Vector uniform(Eigen::Index n) { return Vector::Constant(n, 1.0 / static_cast<double>(n)); }

SinkhornOptions with_eps(double eps) {
    SinkhornOptions o;
    o.epsilon = eps;
    return o;
}

Matrix row_vec(std::initializer_list<double> v) {
    Matrix m(1, static_cast<Eigen::Index>(v.size()));
    Eigen::Index j = 0;
    for (const double x : v) {
        m(0, j++) = x;
    }
    return m;
}

}  // namespace

TEST_SUITE("build_cost_matrix") {
    TEST_CASE("identical single points") {
        const auto c = build_cost_matrix(row_vec({0}), row_vec({0}));
        CHECK(c.rows() == 1);
        CHECK(c(0, 0) == 0.0);
    }

    TEST_CASE("hand-computed squared distances") {
        Matrix x(2, 1);
        x << 0, 1;
        const auto c = build_cost_matrix(x, row_vec({2}));
        CHECK(c.rows() == 2);
        CHECK(c.cols() == 1);
        CHECK(c(0, 0) == 4.0);
        CHECK(c(1, 0) == 1.0);
    }

    TEST_CASE("two dimensions") {
        CHECK(build_cost_matrix(row_vec({1, 0}), row_vec({0, 1}))(0, 0) == 2.0);
    }

    TEST_CASE("same point set gives a symmetric matrix with zero diagonal") {
        std::mt19937_64 rng(3);
        const Matrix x = random_points(rng, 12, 4, 5.0);
        const auto c = build_cost_matrix(x, x);
        CHECK((c.values() - c.values().transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(c.values().diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK(c.values().minCoeff() >= 0.0);
    }

    TEST_CASE("dimension mismatch") {
        CHECK_THROWS_AS(build_cost_matrix(Matrix::Zero(2, 3), Matrix::Zero(2, 2)), InvalidInput);
    }

    TEST_CASE("non-finite features") {
        Matrix x = Matrix::Zero(2, 2);
        x(1, 1) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(build_cost_matrix(x, Matrix::Zero(1, 2)), InvalidInput);
        x(1, 1) = std::numeric_limits<double>::infinity();
        CHECK_THROWS_AS(build_cost_matrix(Matrix::Zero(1, 2), x), InvalidInput);
    }

    TEST_CASE("empty inputs") {
        CHECK_THROWS_AS(build_cost_matrix(Matrix::Zero(0, 2), Matrix::Zero(1, 2)), InvalidInput);
    }

    TEST_CASE("cost matrix rejects negative entries") {
        Matrix c = Matrix::Ones(2, 2);
        c(0, 1) = -1e-3;
        CHECK_THROWS_AS(CostMatrix{c}, InvalidInput);
    }
}

TEST_SUITE("epsilon") {
    TEST_CASE("automatic resolves to factor times the median cost") {
        Matrix c(1, 3);
        c << 1, 4, 9;
        CHECK(Epsilon::automatic().resolve(CostMatrix(c)) == doctest::Approx(Epsilon::kDefaultMedianFactor * 4));
        CHECK(Epsilon::automatic(0.5).resolve(CostMatrix(c)) == doctest::Approx(2.0));
    }

    TEST_CASE("automatic falls back when the median cost is zero") {
        Matrix c(1, 3);
        c << 0, 0, 3;
        CHECK(Epsilon::automatic(0.1).resolve(CostMatrix(c)) == doctest::Approx(0.1));
        CHECK(Epsilon::automatic(0.1).resolve(CostMatrix(Matrix::Zero(2, 2))) == doctest::Approx(0.1));
    }

    TEST_CASE("fixed values") {
        const auto e = Epsilon::fixed(0.25);
        CHECK_FALSE(e.is_automatic());
        CHECK(e.resolve(CostMatrix(Matrix::Ones(2, 2))) == 0.25);
        CHECK_THROWS_AS(Epsilon::fixed(0.0), InvalidInput);
        CHECK_THROWS_AS(Epsilon::fixed(-1.0), InvalidInput);
        CHECK_THROWS_AS(Epsilon::automatic(0.0), InvalidInput);
    }
}

TEST_SUITE("sinkhorn") {
    TEST_CASE("single point gives the unique coupling") {
        for (const double eps : {1e-6, 0.1, 10.0}) {
            const auto plan = sinkhorn(Vector::Ones(1), Vector::Ones(1), CostMatrix(Matrix::Zero(1, 1)), with_eps(eps));
            CHECK(plan.converged);
            CHECK(plan.coupling(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        }
    }

    TEST_CASE("zero cost gives the independent coupling") {
        for (const double eps : {0.01, 1.0, 100.0}) {
            const auto plan = sinkhorn(uniform(2), uniform(2), CostMatrix(Matrix::Zero(2, 2)), with_eps(eps));
            CHECK(plan.converged);
            CHECK((plan.coupling.array() - 0.25).abs().maxCoeff() <= 1e-15);
        }
    }

    TEST_CASE("symmetric 2x2 matches the fixed point") {
        Matrix c(2, 2);
        c << 0, 1, 1, 0;
        const auto plan = sinkhorn(uniform(2), uniform(2), CostMatrix(c), with_eps(0.1));
        const double t11 = symmetric_2x2_fixed_point(0.1);
        CHECK(plan.converged);
        CHECK(std::abs(plan.coupling(0, 0) - t11) <= 1e-9);
        CHECK(std::abs(plan.coupling(1, 1) - t11) <= 1e-9);
        CHECK(std::abs(plan.coupling(0, 1) - (0.5 - t11)) <= 1e-9);
        CHECK(plan.coupling(0, 1) == doctest::Approx(2.27e-5).epsilon(1e-2));
    }

    TEST_CASE("log-domain iterations agree with exp-domain ones") {
        std::mt19937_64 rng(11);
        for (int t = 0; t < 10; ++t) {
            const CostMatrix c(random_cost(rng, 7, 5));
            const Vector a = random_simplex(rng, 7);
            const Vector b = random_simplex(rng, 5);
            SinkhornOptions exp_opts = with_eps(0.2);
            exp_opts.stabilization = Stabilization::exp_only;
            SinkhornOptions log_opts = with_eps(0.2);
            log_opts.stabilization = Stabilization::log_only;
            const auto pe = sinkhorn(a, b, c, exp_opts);
            const auto pl = sinkhorn(a, b, c, log_opts);
            CHECK(pe.converged);
            CHECK(pl.converged);
            CHECK_FALSE(pe.used_log_domain);
            CHECK(pl.used_log_domain);
            CHECK((pe.coupling - pl.coupling).cwiseAbs().maxCoeff() <= 1e-9);
        }
    }

    TEST_CASE("tiny epsilon switches to the log domain automatically") {
        // Every kernel entry underflows: exp(-1/1e-3) == 0.
        Matrix c(2, 2);
        c << 1, 2, 2, 1;
        const auto plan = sinkhorn(uniform(2), uniform(2), CostMatrix(c), with_eps(1e-3));
        CHECK(plan.converged);
        CHECK(plan.used_log_domain);
        CHECK(plan.coupling(0, 0) == doctest::Approx(0.5));
        CHECK(plan.coupling.allFinite());
    }

    TEST_CASE("cells whose kernel value underflows stay in play") {
        // The optimal plan is diagonal and uses C(1,1) = 5.9, whose kernel
        // value exp(-1180) is not representable as a double.
        Matrix c(2, 2);
        c << 0, 3, 3, 5.9;
        const auto plan = sinkhorn(uniform(2), uniform(2), CostMatrix(c), with_eps(1.0 / 200.0));
        CHECK(plan.converged);
        CHECK(plan.used_log_domain);
        // Off-diagonal odds are exp(-(3 + 3 - 5.9) / (2 eps)) = exp(-10).
        const double diagonal = 0.5 / (1.0 + std::exp(-10.0));
        CHECK(std::abs(plan.coupling(1, 1) - diagonal) <= 1e-9);
        CHECK(std::abs(plan.coupling(0, 0) - diagonal) <= 1e-9);
    }

    TEST_CASE("tiny epsilon without the log domain is a numerical failure") {
        Matrix c(2, 2);
        c << 1, 2, 2, 1;
        SinkhornOptions o = with_eps(1e-3);
        o.stabilization = Stabilization::exp_only;
        CHECK_THROWS_AS(sinkhorn(uniform(2), uniform(2), CostMatrix(c), o), NumericalFailure);
    }

    TEST_CASE("exhausted iterations return the best iterate flagged unconverged") {
        std::mt19937_64 rng(5);
        const CostMatrix c(random_cost(rng, 6, 6));
        SinkhornOptions o = with_eps(0.01);
        o.max_iterations = 2;
        o.tolerance = 1e-15;
        const Vector a = random_simplex(rng, 6);
        const Vector b = random_simplex(rng, 6);
        const auto plan = sinkhorn(a, b, c, o);
        CHECK_FALSE(plan.converged);
        CHECK(plan.iterations <= 2);
        CHECK(plan.marginal_error > 1e-15);
        CHECK(plan.marginal_error == doctest::Approx(marginal_violation(plan.coupling, a, b)).epsilon(1e-12));
    }

    TEST_CASE("invalid inputs") {
        const CostMatrix c(Matrix::Ones(2, 2));
        Vector zero_entry(2);
        zero_entry << 1.0, 0.0;
        CHECK_THROWS_AS(sinkhorn(zero_entry, uniform(2), c, {}), InvalidInput);
        CHECK_THROWS_AS(sinkhorn(uniform(2), zero_entry, c, {}), InvalidInput);
        Vector not_normalized(2);
        not_normalized << 0.5, 0.6;
        CHECK_THROWS_AS(sinkhorn(not_normalized, uniform(2), c, {}), InvalidInput);
        CHECK_THROWS_AS(sinkhorn(uniform(3), uniform(2), c, {}), InvalidInput);
        CHECK_THROWS_AS(sinkhorn(uniform(2), uniform(2), c, with_eps(0.0)), InvalidInput);
        CHECK_THROWS_AS(sinkhorn(uniform(2), uniform(2), c, with_eps(-1.0)), InvalidInput);
    }

    TEST_CASE("property: converged plans are feasible") {
        std::mt19937_64 rng(17);
        std::uniform_int_distribution<int> size(1, 40);
        for (int t = 0; t < 60; ++t) {
            const auto n = size(rng);
            const auto m = size(rng);
            const Matrix x = random_points(rng, n, 3);
            const Matrix y = random_points(rng, m, 3);
            const CostMatrix c = build_cost_matrix(x, y);
            const Vector a = t % 2 ? random_simplex(rng, n) : uniform(n);
            const Vector b = t % 2 ? random_simplex(rng, m) : uniform(m);
            SinkhornOptions o;
            o.epsilon = Epsilon::automatic().resolve(c);
            const auto plan = sinkhorn(a, b, c, o);
            REQUIRE(plan.converged);
            CHECK(marginal_violation(plan.coupling, a, b) <= o.tolerance);
            CHECK(plan.coupling.minCoeff() >= 0.0);
        }
    }

    TEST_CASE("property: transport cost is nondecreasing in epsilon") {
        std::mt19937_64 rng(23);
        const std::vector<double> sweep{10.0, 3.0, 1.0, 0.3, 0.1, 0.05, 0.03, 0.02, 0.01};
        for (int t = 0; t < 25; ++t) {
            const CostMatrix c(random_cost(rng, 5, 5));
            const Vector a = random_simplex(rng, 5);
            const Vector b = random_simplex(rng, 5);
            double previous = std::numeric_limits<double>::infinity();
            for (const double eps : sweep) {
                const auto plan = sinkhorn(a, b, c, with_eps(eps));
                REQUIRE(plan.converged);
                const double cost = plan.transport_cost(c);
                CHECK(cost <= previous + 1e-8);
                previous = cost;
            }
        }
    }

    TEST_CASE("property: approaches the exact assignment as epsilon shrinks") {
        std::mt19937_64 rng(29);
        for (int n = 2; n <= 8; ++n) {
            const CostMatrix c(random_cost(rng, n, n));
            const double optimum = exact_assignment_oracle(c.values()).cost;
            // Near-degenerate instances converge slowly at this epsilon; the
            // cost is already close long before the marginals hit 1e-9.
            const auto plan = sinkhorn(uniform(n), uniform(n), c, with_eps(1e-3 * c.mean()));
            CHECK(plan.marginal_error <= 1e-4);
            CHECK(std::abs(plan.transport_cost(c) - optimum) <= 0.01 * optimum);
        }
    }

    TEST_CASE("property: row permutation equivariance") {
        std::mt19937_64 rng(31);
        for (int t = 0; t < 20; ++t) {
            const Eigen::Index n = 6, m = 4;
            const Matrix c = random_cost(rng, n, m);
            const Vector a = random_simplex(rng, n);
            const Vector b = random_simplex(rng, m);
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            Matrix pc(n, m);
            Vector pa(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                pc.row(i) = c.row(perm[i]);
                pa[i] = a[perm[i]];
            }
            const auto plan = sinkhorn(a, b, CostMatrix(c), with_eps(0.1));
            const auto permuted = sinkhorn(pa, b, CostMatrix(pc), with_eps(0.1));
            for (Eigen::Index i = 0; i < n; ++i) {
                CHECK((permuted.coupling.row(i) - plan.coupling.row(perm[i])).cwiseAbs().maxCoeff() <= 1e-9);
            }
        }
    }
}

TEST_SUITE("plan_entropy") {
    TEST_CASE("single unit entry") {
        Matrix t(1, 1);
        t << 1.0;
        CHECK(plan_entropy(t) == doctest::Approx(1.0).epsilon(1e-15));
    }

    TEST_CASE("independent 2x2 coupling") {
        const Matrix t = Matrix::Constant(2, 2, 0.25);
        CHECK(plan_entropy(t) == doctest::Approx(2.386294361119891).epsilon(1e-14));
    }

    TEST_CASE("zero entries contribute nothing") {
        Matrix t(2, 2);
        t << 0.5, 0.0, 0.0, 0.5;
        CHECK(plan_entropy(t) == doctest::Approx(1.6931471805599454).epsilon(1e-14));
    }

    TEST_CASE("strictly positive for solver output") {
        std::mt19937_64 rng(37);
        const CostMatrix c(random_cost(rng, 4, 6));
        CHECK(plan_entropy(sinkhorn(uniform(4), uniform(6), c, with_eps(0.05))) > 0.0);
    }

    TEST_CASE("property: invariant under row and column permutations") {
        std::mt19937_64 rng(41);
        for (int t = 0; t < 20; ++t) {
            Matrix m = random_cost(rng, 5, 7);
            m /= m.sum();
            std::vector<int> rows(5), cols(7);
            std::iota(rows.begin(), rows.end(), 0);
            std::iota(cols.begin(), cols.end(), 0);
            std::shuffle(rows.begin(), rows.end(), rng);
            std::shuffle(cols.begin(), cols.end(), rng);
            Matrix p(5, 7);
            for (int i = 0; i < 5; ++i) {
                for (int j = 0; j < 7; ++j) {
                    p(i, j) = m(rows[i], cols[j]);
                }
            }
            CHECK(plan_entropy(p) == doctest::Approx(plan_entropy(m)).epsilon(1e-13));
        }
    }
}

TEST_SUITE("measures") {
    TEST_CASE("uniform measure") {
        const auto mu = DiscreteMeasure::uniform(Matrix::Zero(4, 2));
        CHECK(mu.weights.size() == 4);
        CHECK(mu.weights[3] == 0.25);
        CHECK_NOTHROW(mu.validate());
    }

    TEST_CASE("invalid weights") {
        DiscreteMeasure mu{Matrix::Zero(2, 1), Vector::Constant(2, 0.4)};
        CHECK_THROWS_AS(mu.validate(), InvalidInput);
        mu.weights = Vector::Constant(3, 1.0 / 3.0);
        CHECK_THROWS_AS(mu.validate(), InvalidInput);
    }

    TEST_CASE("uniform_plan resolves automatic epsilon per problem") {
        Matrix x(2, 1), y(2, 1);
        x << 0, 10;
        y << 0, 10;
        const auto plan = uniform_plan(x, y, Epsilon::automatic());
        CHECK(plan.converged);
        CHECK(plan.epsilon == doctest::Approx(Epsilon::automatic().resolve(build_cost_matrix(x, y))));
        CHECK(plan.coupling(0, 0) == doctest::Approx(0.5));
    }
}
