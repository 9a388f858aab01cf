#include "oracles.hpp"

#include "otssl/errors.hpp"
#include "otssl/experiment.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace otssl;
using namespace otssl::testing;

namespace {

const std::filesystem::path kData = OTSSL_DATA_DIR;

std::vector<int> class_counts(const Dataset& ds, const std::vector<Eigen::Index>& idx) {
    std::vector<int> counts(static_cast<std::size_t>(ds.num_classes()), 0);
    for (const auto i : idx) {
        ++counts[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])];
    }
    return counts;
}

}  // namespace

TEST_SUITE("split sizes") {
    TEST_CASE("150 points at a quarter") {
        const auto s = split_sizes(150, 0.25);
        CHECK(s.labeled == 38);
        CHECK(s.unlabeled == 45);
        CHECK(s.new_points == 67);
    }

    TEST_CASE("half-up rounding at five percent") {
        const auto s = split_sizes(150, 0.05);
        CHECK(s.labeled == 8);
        CHECK(s.unlabeled == 57);
        CHECK(s.new_points == 85);
    }

    TEST_CASE("property: arithmetic holds for every size") {
        for (Eigen::Index n = 3; n <= 400; n += 7) {
            for (const double zeta : {0.01, 0.05, 0.1, 0.15, 0.2, 0.25, 0.5, 0.9}) {
                const auto s = split_sizes(n, zeta);
                const double l = zeta * static_cast<double>(n);
                CHECK(s.labeled == static_cast<Eigen::Index>(std::floor(l + 0.5 + 1e-9)));
                const auto r = n - s.labeled;
                CHECK(s.unlabeled == static_cast<Eigen::Index>(std::floor(0.4 * static_cast<double>(r) + 0.5 + 1e-9)));
                CHECK(s.labeled + s.unlabeled + s.new_points == n);
            }
        }
    }

    TEST_CASE("zeta outside (0, 1)") {
        CHECK_THROWS_AS(split_sizes(10, 0.0), InvalidInput);
        CHECK_THROWS_AS(split_sizes(10, 1.0), InvalidInput);
    }
}

TEST_SUITE("make_split") {
    TEST_CASE("Iris quarter split") {
        const Dataset iris = load_csv(kData / "iris.csv", "class");
        const Split s = make_split(iris, 0.25, 7);
        CHECK(s.labeled.size() == 38);
        CHECK(s.unlabeled.size() == 45);
        CHECK(s.new_points.size() == 67);
        CHECK(s.seed == 7);
        CHECK(s.zeta == 0.25);
    }

    TEST_CASE("deterministic in the seed") {
        const Dataset iris = load_csv(kData / "iris.csv", "class");
        CHECK(make_split(iris, 0.15, 3) == make_split(iris, 0.15, 3));
        CHECK_FALSE(make_split(iris, 0.15, 3) == make_split(iris, 0.15, 4));
    }

    TEST_CASE("property: disjoint cover, sorted, every class labeled, proportional strata") {
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const Dataset ds = gaussian_blobs({7 + static_cast<int>(seed % 5), 30, 13}, 3.0, seed);
            for (const double zeta : {0.05, 0.1, 0.25, 0.6}) {
                const Split s = make_split(ds, zeta, seed);
                const auto sizes = split_sizes(ds.size(), zeta);
                CHECK(static_cast<Eigen::Index>(s.labeled.size()) == sizes.labeled);
                CHECK(static_cast<Eigen::Index>(s.unlabeled.size()) == sizes.unlabeled);
                CHECK(static_cast<Eigen::Index>(s.new_points.size()) == sizes.new_points);
                std::set<Eigen::Index> all;
                for (const auto* part : {&s.labeled, &s.unlabeled, &s.new_points}) {
                    CHECK(std::is_sorted(part->begin(), part->end()));
                    all.insert(part->begin(), part->end());
                }
                CHECK(static_cast<Eigen::Index>(all.size()) == ds.size());
                CHECK(*all.begin() == 0);
                CHECK(*all.rbegin() == ds.size() - 1);

                std::vector<Eigen::Index> everything(static_cast<std::size_t>(ds.size()));
                std::iota(everything.begin(), everything.end(), 0);
                const auto class_sizes = class_counts(ds, everything);
                const auto per_class = class_counts(ds, s.labeled);
                for (std::size_t c = 0; c < per_class.size(); ++c) {
                    const double share =
                        static_cast<double>(sizes.labeled * class_sizes[c]) / static_cast<double>(ds.size());
                    CHECK(per_class[c] >= 1);
                    CHECK(std::abs(per_class[c] - share) < 2.0);
                }
            }
        }
    }

    TEST_CASE("too few labeled points for the classes") {
        const Dataset ds = gaussian_blobs({4, 3, 3}, 5.0, 1);
        CHECK_THROWS_AS(make_split(ds, 0.1, 0), InfeasibleSplit);
        CHECK_NOTHROW(make_split(ds, 0.3, 0));
    }

    TEST_CASE("run seeds") {
        CHECK(run_seed(0, 0) == 0);
        CHECK(run_seed(100, 3) == 103);
    }
}

TEST_SUITE("predictions") {
    TEST_CASE("labels outside the labeled set are never read") {
        const Dataset iris = load_csv(kData / "iris.csv", "class");
        const Split s = make_split(iris, 0.15, 11);
        Dataset scrambled = iris;
        for (const auto* part : {&s.unlabeled, &s.new_points}) {
            for (const auto i : *part) {
                auto& y = scrambled.labels[static_cast<std::size_t>(i)];
                y = (y + 1 + static_cast<int>(i % 2)) % 3;
            }
        }
        const ExperimentConfig cfg;
        const auto a = predict_split(iris, s, cfg);
        const auto b = predict_split(scrambled, s, cfg);
        CHECK(a.oti == b.oti);
        CHECK(a.reference == b.reference);
        CHECK(a.oti.size() == s.new_points.size());
    }

    TEST_CASE("singleton diagnostic is recorded only on request") {
        const Dataset ds = gaussian_blobs({30, 30}, 10.0, 4);
        const Split s = make_split(ds, 0.2, 0);
        ExperimentConfig cfg;
        CHECK_FALSE(predict_split(ds, s, cfg).singleton_agreement.has_value());
        cfg.singleton_diagnostic = true;
        const auto p = predict_split(ds, s, cfg);
        REQUIRE(p.singleton_agreement.has_value());
        CHECK(*p.singleton_agreement >= 0.0);
        CHECK(*p.singleton_agreement <= 1.0);
    }
}

TEST_SUITE("run_experiment") {
    TEST_CASE("separated blobs score perfectly") {
        const Dataset ds = gaussian_blobs({100, 100}, 10.0, 42);
        const std::vector<double> zetas{0.25};
        const auto reports = run_experiment(ds, zetas, ExperimentConfig{});
        REQUIRE(reports.size() == 1);
        const auto& r = reports[0];
        CHECK(r.complete);
        CHECK(r.runs.size() == 10);
        CHECK(r.oti_ari.mean == 1.0);
        CHECK(r.oti_nmi.mean == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.reference_ari.mean == 1.0);
        CHECK(r.oti_ari.std == 0.0);
    }

    TEST_CASE("identical configuration gives identical reports") {
        const Dataset iris = load_csv(kData / "iris.csv", "class");
        const std::vector<double> zetas{0.1};
        ExperimentConfig cfg;
        cfg.repetitions = 1;
        cfg.master_seed = 99;
        const auto a = run_experiment(iris, zetas, cfg);
        const auto b = run_experiment(iris, zetas, cfg);
        CHECK(a == b);
        CHECK(a[0].runs[0].seed == 99);
    }

    TEST_CASE("per-run seeds follow the master seed") {
        const Dataset ds = gaussian_blobs({20, 20}, 10.0, 1);
        const std::vector<double> zetas{0.2};
        ExperimentConfig cfg;
        cfg.repetitions = 3;
        cfg.master_seed = 10;
        const auto r = run_experiment(ds, zetas, cfg);
        for (int i = 0; i < 3; ++i) {
            CHECK(r[0].runs[static_cast<std::size_t>(i)].run_index == i);
            CHECK(r[0].runs[static_cast<std::size_t>(i)].seed == 10u + static_cast<unsigned>(i));
        }
    }

    TEST_CASE("failing runs are recorded and flag the report incomplete") {
        const Dataset ds = gaussian_blobs({4, 3, 3}, 5.0, 1);
        const std::vector<double> zetas{0.1, 0.3};
        ExperimentConfig cfg;
        cfg.repetitions = 2;
        const auto r = run_experiment(ds, zetas, cfg);
        REQUIRE(r.size() == 2);
        CHECK_FALSE(r[0].complete);
        CHECK(r[0].successful_runs() == 0);
        CHECK(r[0].runs.size() == 2);
        CHECK_FALSE(r[0].runs[0].ok);
        CHECK_FALSE(r[0].runs[0].error.empty());
        CHECK(r[1].complete);
        CHECK(r[1].successful_runs() == 2);
    }

    TEST_CASE("standardization removes dependence on feature scale") {
        Dataset ds = gaussian_blobs({25, 25}, 4.0, 6);
        Dataset stretched = ds;
        stretched.features.col(1) *= 1000.0;
        stretched.features.col(0) = stretched.features.col(0).array() + 50.0;
        const std::vector<double> zetas{0.2};
        ExperimentConfig cfg;
        cfg.repetitions = 3;
        cfg.standardize = true;
        const auto a = run_experiment(ds, zetas, cfg);
        const auto b = run_experiment(stretched, zetas, cfg);
        CHECK(a[0].oti_ari.mean == doctest::Approx(b[0].oti_ari.mean).epsilon(1e-9));
        CHECK(a[0].oti_nmi.mean == doctest::Approx(b[0].oti_nmi.mean).epsilon(1e-9));
    }

    TEST_CASE("configuration errors") {
        const Dataset ds = gaussian_blobs({10, 10}, 5.0, 1);
        CHECK_THROWS_AS(run_experiment(ds, std::vector<double>{}, ExperimentConfig{}), InvalidInput);
        ExperimentConfig cfg;
        cfg.repetitions = 0;
        CHECK_THROWS_AS(run_experiment(ds, std::vector<double>{0.2}, cfg), InvalidInput);
    }
}

TEST_CASE("summaries use the sample standard deviation") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(v);
    CHECK(s.mean == 2.5);
    CHECK(s.std == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
    CHECK(summarize(std::vector<double>{0.7}).std == 0.0);
}
