#include <doctest.h>

#include "cml/error.hpp"
#include "cml/exact.hpp"
#include "cml/local_map.hpp"
#include "cml/rng.hpp"
#include "support.hpp"

using namespace cml;

TEST_CASE("doubling examples") {
    const auto T = LocalMapSpec::doubling();
    CHECK(apply_local_map(T, CirclePoint(0.3)).value() == doctest::Approx(0.6));
    CHECK(apply_local_map(T, CirclePoint(0.75)).value() == 0.5);
    CHECK(apply_local_map(T, CirclePoint(0.0)).value() == 0.0);
    CHECK(T.lambda_lower() == 2.0);
    CHECK(T.lambda_upper() == 2.0);
    REQUIRE(T.sigma());
    CHECK(*T.sigma() == 0.25);
}

TEST_CASE("doubling on exact rationals follows the period-2 orbit") {
    const auto T = LocalMapSpec::doubling();
    const Rational third(1, 3);
    CHECK(T.apply_generic<Rational>(third) == Rational(2, 3));
    CHECK(T.apply_generic<Rational>(Rational(2, 3)) == third);
}

TEST_CASE("verify_lipschitz on shipped maps") {
    SUBCASE("doubling within sigma") {
        const auto r = verify_lipschitz(LocalMapSpec::doubling(), 10000);
        CHECK(r.max_observed_ratio == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.min_observed_ratio == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(r.pairs > 9000);
    }
    SUBCASE("rotation is an isometry") {
        const auto r = verify_lipschitz(LocalMapSpec::rotation(0.3), 10000);
        CHECK(r.max_observed_ratio == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(r.min_observed_ratio == doctest::Approx(1.0).epsilon(1e-6));
    }
    SUBCASE("affine 1.2 on non-wrapping pairs") {
        const auto r = verify_lipschitz(LocalMapSpec::affine(1.2, 0.1), 10000);
        CHECK(r.max_observed_ratio == doctest::Approx(1.2).epsilon(1e-6));
        CHECK(r.min_observed_ratio == doctest::Approx(1.2).epsilon(1e-6));
    }
    SUBCASE("piecewise linear sensitivity map") {
        const auto r = verify_lipschitz(testing::sensitivity_map(), 10000);
        CHECK(r.max_observed_ratio <= 1.2 + 1e-9);
        CHECK(r.min_observed_ratio >= 0.64 / 0.7 - 1e-9);
    }
}

TEST_CASE("verify_lipschitz rejects wrong declared constants") {
    const auto too_small = LocalMapSpec::doubling().with_constants(1.5, 1.8, 0.25);
    CHECK_THROWS_AS(verify_lipschitz(too_small, 1000), InvalidSpec);
    const auto too_big_lower = LocalMapSpec::rotation(0.1).with_constants(1.5, 2.0, 0.25);
    CHECK_THROWS_AS(verify_lipschitz(too_big_lower, 1000), InvalidSpec);
    // Beyond sigma = 1/4 the doubled arc folds over and the lower bound breaks.
    const auto wide = LocalMapSpec::doubling().with_constants(2.0, 2.0, 0.4);
    CHECK_THROWS_AS(verify_lipschitz(wide, 5000), InvalidSpec);
}

TEST_CASE("piecewise linear map structure") {
    const auto T = testing::sensitivity_map();
    CHECK(T(0.5) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(T(0.0) == 0.0);
    CHECK(T(0.35) == doctest::Approx(0.32));
    const LinearPiece p = T.linear_piece_at(0.5);
    CHECK(p.lo == 0.35);
    CHECK(p.hi == 0.65);
    CHECK(p.slope == 1.2);
    CHECK(p.slope * 0.5 + p.intercept == doctest::Approx(0.5));
    CHECK(T.lambda_upper() == 1.2);
    CHECK_THROWS_AS(LocalMapSpec::piecewise_linear({0.0, 0.5}, {1.0, 1.5}, 0.0), InvalidSpec);
    CHECK_THROWS_AS(LocalMapSpec::piecewise_linear({0.1}, {1.0}, 0.0), InvalidSpec);
    CHECK_THROWS_AS(LocalMapSpec::piecewise_linear({0.0, 0.5}, {-1.0, 3.0}, 0.0), InvalidSpec);
}

TEST_CASE("inverses") {
    CHECK(LocalMapSpec::rotation(0.3).inverse(0.5) == doctest::Approx(0.2));
    CHECK_THROWS_AS(LocalMapSpec::doubling().inverse(0.5), NotInvertible);
    CHECK_FALSE(LocalMapSpec::affine(3.0, 0.0).invertible());
    const auto deg1 = LocalMapSpec::piecewise_linear({0.0, 0.5}, {0.5, 1.5}, 0.1);
    REQUIRE(deg1.invertible());
    StreamRng rng(2, 7);
    for (int k = 0; k < 1000; ++k) {
        const double x = rng.uniform();
        CHECK(circle_dist(deg1.inverse(deg1(x)), x) < 1e-12);
    }
}

TEST_CASE("declared constants are validated") {
    CHECK_THROWS_AS(LocalMapSpec::doubling().with_constants(0.0, 2.0, 0.25), InvalidSpec);
    CHECK_THROWS_AS(LocalMapSpec::doubling().with_constants(2.0, 1.0, 0.25), InvalidSpec);
    CHECK_THROWS_AS(LocalMapSpec::doubling().with_constants(2.0, 2.0, 0.7), InvalidSpec);
    CHECK_THROWS_AS(LocalMapSpec::affine(0.0, 0.1), InvalidSpec);
}
