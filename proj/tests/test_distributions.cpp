#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "redd/distributions.hpp"
#include "redd/errors.hpp"
#include "testutil.hpp"

using namespace redd;
using doctest::Approx;

TEST_CASE("two-point min moments match the closed form and brute force") {
    const auto spec = testutil::two_point();

    // alpha p + beta (1-p) and alpha (1-(1-p)^2) + beta (1-p)^2
    CHECK(spec.min_moment(1) == Approx(19.0).epsilon(1e-12));
    CHECK(spec.min_moment(2) == Approx(10.9).epsilon(1e-12));

    for (int j = 1; j <= 3; ++j)
        CHECK(spec.min_moment(j) ==
              Approx(testutil::brute_min_moment_iid(spec.pmf(), j)).epsilon(1e-12));
}

TEST_CASE("survival sums agree with product-law brute force on random pmfs") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int support = 2 + static_cast<int>(uniform_below(rng, 3));  // <= 4
        std::vector<PmfEntry> pmf;
        double rest = 1.0;
        for (int i = 0; i < support; ++i) {
            const double p = (i + 1 == support) ? rest : rest * (0.2 + 0.6 * uniform_u01(rng));
            pmf.push_back({1 + static_cast<std::int64_t>(uniform_below(rng, 30)), p});
            rest -= p;
        }
        const auto spec = ServiceSpec::iid_finite(pmf);
        for (int j = 1; j <= 3; ++j)
            CHECK(spec.min_moment(j) ==
                  Approx(testutil::brute_min_moment_iid(spec.pmf(), j)).epsilon(1e-12));
    }
}

TEST_CASE("min_moment is non-increasing in j") {
    const auto spec = testutil::two_point(3, 17, 0.4);
    for (int j = 1; j < 8; ++j) CHECK(spec.min_moment(j + 1) <= spec.min_moment(j) + 1e-12);
}

TEST_CASE("identical replicas have constant min moments") {
    const auto spec = ServiceSpec::identical_replicas({{5, 0.5}, {11, 0.5}});
    for (int j = 1; j <= 6; ++j) CHECK(spec.min_moment(j) == Approx(8.0).epsilon(1e-12));
}

TEST_CASE("joint_finite is symmetrized to exact exchangeability") {
    // deliberately asymmetric input
    const auto spec = ServiceSpec::joint_finite(
        3, {JointAtom{{2, 5, 9}, 0.5}, JointAtom{{1, 1, 7}, 0.5}});

    // every coordinate has the same marginal mean
    for (int coord = 0; coord < 3; ++coord) {
        double mean = 0.0;
        for (const auto& a : spec.atoms()) mean += a.prob * static_cast<double>(a.values[static_cast<std::size_t>(coord)]);
        CHECK(mean == Approx((2 + 5 + 9 + 1 + 1 + 7) / 6.0).epsilon(1e-12));
    }

    // min over any j-subset of coordinates equals min_moment(j)
    for (int j = 1; j <= 3; ++j) {
        const std::vector<std::vector<int>> subsets =
            j == 1 ? std::vector<std::vector<int>>{{0}, {1}, {2}}
            : j == 2 ? std::vector<std::vector<int>>{{0, 1}, {0, 2}, {1, 2}}
                     : std::vector<std::vector<int>>{{0, 1, 2}};
        for (const auto& sub : subsets) {
            double m = 0.0;
            for (const auto& a : spec.atoms()) {
                std::int64_t mn = a.values[static_cast<std::size_t>(sub[0])];
                for (int s : sub) mn = std::min(mn, a.values[static_cast<std::size_t>(s)]);
                m += a.prob * static_cast<double>(mn);
            }
            CHECK(m == Approx(spec.min_moment(j)).epsilon(1e-12));
        }
    }
}

TEST_CASE("samplers are consistent with exact min moments") {
    Rng rng(2024);
    const int n = 40000;

    SUBCASE("iid two-point") {
        const auto spec = testutil::two_point();
        for (int j : {1, 2}) {
            double sum = 0.0, sumsq = 0.0;
            for (int i = 0; i < n; ++i) {
                const auto v = spec.sample_vector(rng, 10);
                std::int64_t mn = v[0];
                for (int k = 0; k < j; ++k) mn = std::min(mn, v[static_cast<std::size_t>(k)]);
                sum += static_cast<double>(mn);
                sumsq += static_cast<double>(mn) * static_cast<double>(mn);
            }
            const double mean = sum / n;
            const double se = std::sqrt((sumsq / n - mean * mean) / (n - 1));
            CHECK(std::abs(mean - spec.min_moment(j)) < 4.0 * se + 1e-9);
        }
    }

    SUBCASE("identical replicas give equal coordinates") {
        const auto spec = ServiceSpec::identical_replicas({{2, 0.3}, {7, 0.7}});
        for (int i = 0; i < 200; ++i) {
            const auto v = spec.sample_vector(rng, 5);
            for (auto x : v) CHECK(x == v[0]);
        }
    }

    SUBCASE("joint sampler hits the symmetrized marginals") {
        const auto spec = ServiceSpec::joint_finite(3, {JointAtom{{2, 5, 9}, 1.0}});
        double mean0 = 0.0, mean2 = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto v = spec.sample_vector(rng, 3);
            mean0 += static_cast<double>(v[0]);
            mean2 += static_cast<double>(v[2]);
        }
        // each coordinate sees {2,5,9} uniformly after symmetrization
        CHECK(mean0 / n == Approx(16.0 / 3).epsilon(0.02));
        CHECK(mean2 / n == Approx(16.0 / 3).epsilon(0.02));
    }
}

TEST_CASE("every coordinate stays in the two-point support") {
    Rng rng(5);
    const auto spec = testutil::two_point();
    for (int i = 0; i < 200; ++i)
        for (auto v : spec.sample_vector(rng, 10)) CHECK((v == 10 || v == 100));
}

TEST_CASE("time scaling condition") {
    const auto spec = testutil::two_point();
    CHECK(time_scaling_check(spec, 10, 2));   // 10.9 > 10
    CHECK(time_scaling_check(spec, 10, 10));  // E[min_10] = 10 + 90*0.1^10 > 10
    CHECK_FALSE(time_scaling_check(spec, 11, 2));

    // survival-sum value for d = 10: barely above 10
    const double m10 = spec.min_moment(10);
    CHECK(m10 > 10.0);
    CHECK(m10 == Approx(10.0 + 90.0 * std::pow(0.1, 10)).epsilon(1e-12));
}

TEST_CASE("moments") {
    CHECK(testutil::two_point().moments().mean == Approx(19.0).epsilon(1e-12));
    CHECK(*testutil::two_point().moments().second == Approx(1090.0).epsilon(1e-12));

    const auto degenerate = ServiceSpec::iid_finite({{5, 1.0}});
    CHECK(degenerate.moments().mean == Approx(5.0));
    CHECK(*degenerate.moments().second == Approx(25.0));

    const auto ident = ServiceSpec::identical_replicas({{5, 1.0}});
    CHECK(ident.moments().mean == Approx(5.0));
    CHECK(*ident.moments().second == Approx(25.0));

    const auto profile = ServiceSpec::moment_profile({19.0, 10.9});
    CHECK(profile.moments().mean == Approx(19.0));
    CHECK_FALSE(profile.moments().second.has_value());
}

TEST_CASE("moment profiles are bounds-only") {
    const auto spec = ServiceSpec::moment_profile({30.0, 21.0, 17.0});
    Rng rng(1);
    CHECK_THROWS_AS(spec.sample_vector(rng, 3), CapabilityError);
    CHECK_THROWS_AS(spec.first_coords_law(2), CapabilityError);
    CHECK(spec.min_moment(3) == Approx(17.0));
    CHECK_THROWS_AS(spec.min_moment(4), std::invalid_argument);
    CHECK(spec.max_moment_order() == 3);
}

TEST_CASE("construction rejects invalid laws") {
    CHECK_THROWS_AS(ServiceSpec::iid_finite({{10, 0.9}, {100, 0.2}}), ConfigError);  // sums to 1.1
    CHECK_THROWS_AS(ServiceSpec::iid_finite({{0, 1.0}}), ConfigError);               // value < 1
    CHECK_THROWS_AS(ServiceSpec::iid_finite({}), ConfigError);
    CHECK_THROWS_AS(ServiceSpec::moment_profile({3.0, 4.0}), ConfigError);  // increasing
    CHECK_THROWS_AS(ServiceSpec::moment_profile({3.0, -1.0}), ConfigError);
    CHECK_THROWS_AS(ServiceSpec::joint_finite(2, {JointAtom{{1, 2, 3}, 1.0}}), ConfigError);
    CHECK_THROWS_AS(ServiceSpec::joint_finite(9, {JointAtom{{1, 1, 1, 1, 1, 1, 1, 1, 1}, 1.0}}),
                    CapabilityError);  // symmetrization cap

    // normalization tolerance: 1e-13 off is fine, 1e-9 off is rejected
    CHECK_NOTHROW(ServiceSpec::iid_finite({{10, 0.9}, {100, 0.1 + 1e-13}}));
    CHECK_THROWS_AS(ServiceSpec::iid_finite({{10, 0.9}, {100, 0.1 + 1e-9}}), ConfigError);
}

TEST_CASE("first_coords_law enumerates the product law") {
    const auto spec = testutil::two_point();
    const auto law = spec.first_coords_law(2);
    REQUIRE(law.size() == 4);
    double total = 0.0, min_mean = 0.0;
    for (const auto& a : law) {
        total += a.prob;
        min_mean += a.prob * static_cast<double>(std::min(a.values[0], a.values[1]));
    }
    CHECK(total == Approx(1.0).epsilon(1e-12));
    CHECK(min_mean == Approx(10.9).epsilon(1e-12));

    CHECK_THROWS_AS(spec.first_coords_law(30, 1000), CapabilityError);
}
