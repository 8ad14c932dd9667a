#include <doctest.h>

#include "afmm/errors.hpp"
#include "afmm/metrics.hpp"
#include "afmm/rng.hpp"

#include <cmath>
#include <vector>

using namespace afmm;

TEST_CASE("pricing_error hand values") {
    std::vector<double> v = {1.0, 1.0, 1.0, 1.0};
    std::vector<double> p_equal = v;
    CHECK(pricing_error(p_equal, v) == doctest::Approx(0.0));

    std::vector<double> p = {2.0, 0.0, 2.0, 0.0}; // p - v = (1,-1,1,-1)
    CHECK(pricing_error(p, v) == doctest::Approx(1.0));

    std::vector<double> v2 = {0.0, 0.0};
    std::vector<double> p2 = {3.0, 4.0};
    CHECK(pricing_error(p2, v2) == doctest::Approx(std::sqrt(12.5)));

    CHECK_THROWS_AS(pricing_error({}, {}), ContractError);
    std::vector<double> one = {1.0};
    CHECK_THROWS_AS(pricing_error(one, v), ContractError);
}

TEST_CASE("pricing_error is invariant under sign flip of the gap") {
    Rng rng(11);
    std::vector<double> p(50), v(50), flipped(50);
    for (int i = 0; i < 50; ++i) {
        v[static_cast<std::size_t>(i)] = rng.normal();
        p[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] + rng.normal();
        flipped[static_cast<std::size_t>(i)] =
            2.0 * v[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)];
    }
    CHECK(pricing_error(p, v) == doctest::Approx(pricing_error(flipped, v)));
}

TEST_CASE("realized_volatility hand values") {
    std::vector<double> constant = {0.5, 0.5, 0.5};
    CHECK(realized_volatility(constant) == doctest::Approx(0.0));

    std::vector<double> alternating = {0.01, -0.01, 0.01, -0.01};
    CHECK(realized_volatility(alternating) == doctest::Approx(0.01));

    std::vector<double> skewed = {2.0, 2.0, 2.0, 6.0};
    CHECK(realized_volatility(skewed) == doctest::Approx(std::sqrt(3.0)));

    std::vector<double> single = {1.0};
    CHECK_THROWS_AS(realized_volatility(single), ContractError);
}

TEST_CASE("realized_volatility unchanged under sign flip of demeaned returns") {
    Rng rng(12);
    std::vector<double> r(40);
    for (auto& x : r) x = 0.3 + rng.normal();
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(r.size());
    std::vector<double> flipped(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) flipped[i] = 2.0 * mean - r[i];
    CHECK(realized_volatility(r) == doctest::Approx(realized_volatility(flipped)));
}

TEST_CASE("liquidity_level hand values") {
    std::vector<double> full = {2.0, 2.0, 2.0};
    CHECK(liquidity_level(full, 2.0) == doctest::Approx(1.0));

    std::vector<double> half = {1.0, 1.0};
    CHECK(liquidity_level(half, 2.0) == doctest::Approx(0.5));

    std::vector<double> mixed = {2.0, 1.0};
    CHECK(liquidity_level(mixed, 2.0) == doctest::Approx(0.75));

    std::vector<double> above = {3.0}; // clipped at 1
    CHECK(liquidity_level(above, 2.0) == doctest::Approx(1.0));

    CHECK_THROWS_AS(liquidity_level({}, 1.0), ContractError);
    CHECK_THROWS_AS(liquidity_level(full, 0.0), ContractError);
}

TEST_CASE("expected_shortfall hand values") {
    std::vector<double> twenty = {-0.10, 0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08,
                                  0.09, 0.10, 0.11, 0.12, 0.13, 0.14, 0.15, 0.16, 0.17, 0.18};
    CHECK(expected_shortfall(twenty, 0.05) == doctest::Approx(0.10)); // k = 1

    std::vector<double> four = {-2.0, -1.0, 1.0, 2.0};
    CHECK(expected_shortfall(four, 0.5) == doctest::Approx(1.5)); // mean of worst two

    std::vector<double> flat = {0.03, 0.03, 0.03, 0.03};
    CHECK(expected_shortfall(flat, 0.25) == doctest::Approx(-0.03));

    CHECK_THROWS_AS(expected_shortfall({}, 0.1), ContractError);
    CHECK_THROWS_AS(expected_shortfall(four, 0.0), ContractError);
    CHECK_THROWS_AS(expected_shortfall(four, 0.6), ContractError);
}

TEST_CASE("expected_shortfall translation equivariance: ES(r - c) = ES(r) + c") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> r(31);
        for (auto& x : r) x = rng.normal();
        const double c = rng.uniform(-2.0, 2.0);
        std::vector<double> shifted(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) shifted[i] = r[i] - c;
        const double tail = rng.uniform(0.05, 0.5);
        CHECK(expected_shortfall(shifted, tail) ==
              doctest::Approx(expected_shortfall(r, tail) + c).epsilon(1e-12));
    }
}

TEST_CASE("action_similarity hand values") {
    const std::vector<std::pair<int, int>> pair01 = {{0, 1}};

    std::vector<std::vector<double>> correlated = {{1, 2, 3}, {2, 4, 6}};
    auto rho = action_similarity(correlated, 3, pair01);
    REQUIRE(rho.size() == 1);
    CHECK(rho[0].t == 2);
    CHECK(rho[0].rho == doctest::Approx(1.0));

    std::vector<std::vector<double>> anti = {{1, 2, 3}, {3, 2, 1}};
    rho = action_similarity(anti, 3, pair01);
    REQUIRE(rho.size() == 1);
    CHECK(rho[0].rho == doctest::Approx(-1.0));

    std::vector<std::vector<double>> three = {{1, 2, 3}, {1, 2, 3}, {3, 2, 1}};
    const std::vector<std::pair<int, int>> all_pairs = {{0, 1}, {0, 2}, {1, 2}};
    rho = action_similarity(three, 3, all_pairs);
    REQUIRE(rho.size() == 1);
    CHECK(rho[0].rho == doctest::Approx(-1.0 / 3.0));
}

TEST_CASE("action_similarity skips constant series and may omit every t") {
    std::vector<std::vector<double>> one_constant = {{1, 2, 3, 4}, {5, 5, 5, 5}};
    const std::vector<std::pair<int, int>> pair01 = {{0, 1}};
    CHECK(action_similarity(one_constant, 3, pair01).empty());

    std::vector<std::vector<double>> short_series = {{1, 2}, {2, 1}};
    CHECK(action_similarity(short_series, 3, pair01).empty());

    const std::vector<std::pair<int, int>> bad_pair = {{1, 1}};
    CHECK_THROWS_AS(action_similarity(one_constant, 3, bad_pair), ContractError);
    CHECK_THROWS_AS(action_similarity(one_constant, 1, pair01), ContractError);
}

TEST_CASE("action_similarity invariant under positive affine rescaling") {
    Rng rng(14);
    std::vector<std::vector<double>> actions(4, std::vector<double>(30));
    for (auto& series : actions) {
        for (auto& q : series) q = rng.normal();
    }
    const std::vector<std::pair<int, int>> pairs = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    const auto base = action_similarity(actions, 7, pairs);

    std::vector<std::vector<double>> scaled = actions;
    for (std::size_t a = 0; a < scaled.size(); ++a) {
        const double scale = 0.5 + static_cast<double>(a);
        const double shift = rng.uniform(-3.0, 3.0);
        for (auto& q : scaled[a]) q = scale * q + shift;
    }
    const auto rescaled = action_similarity(scaled, 7, pairs);
    REQUIRE(base.size() == rescaled.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].rho == doctest::Approx(rescaled[i].rho).epsilon(1e-9));
        CHECK(base[i].rho >= -1.0);
        CHECK(base[i].rho <= 1.0);
    }
}

TEST_CASE("spearman hand values") {
    std::vector<double> x = {1, 2, 3};
    std::vector<double> inverted = {3, 2, 1};
    CHECK(*spearman(x, inverted) == doctest::Approx(-1.0));

    std::vector<double> swapped = {1, 3, 2};
    CHECK(*spearman(x, swapped) == doctest::Approx(0.5));

    CHECK(*spearman(x, x) == doctest::Approx(1.0));

    std::vector<double> constant = {2, 2, 2};
    CHECK(!spearman(x, constant).has_value());
    CHECK(!spearman(constant, x).has_value());

    std::vector<double> two = {1, 2};
    CHECK_THROWS_AS(spearman(two, two), ContractError);
}

TEST_CASE("spearman averages tied ranks") {
    std::vector<double> x = {1, 2, 2, 3};
    std::vector<double> y = {10, 20, 20, 30};
    CHECK(*spearman(x, y) == doctest::Approx(1.0));
}

TEST_CASE("ols_fit exact fit") {
    std::vector<double> x = {1, 2, 3};
    std::vector<double> y = {2, 4, 6};
    std::vector<double> ones = {1, 1, 1};
    const OlsResult fit = ols_fit(y, {ones, x});
    CHECK(fit.coefficients[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));
    for (double r : fit.residuals) CHECK(std::abs(r) < 1e-10);
}

TEST_CASE("ols_fit three-point hand oracle") {
    // Points (0,0), (1,1), (2,3): slope 3/2, intercept -1/6, R^2 = 27/28,
    // slope t = 1.5/sqrt(1/12) = sqrt(27) = 5.19615...
    std::vector<double> x = {0, 1, 2};
    std::vector<double> y = {0, 1, 3};
    std::vector<double> ones = {1, 1, 1};
    const OlsResult fit = ols_fit(y, {ones, x});
    CHECK(std::abs(fit.coefficients[1] - 1.5) < 1e-9);
    CHECK(std::abs(fit.coefficients[0] - (-1.0 / 6.0)) < 1e-9);
    CHECK(std::abs(fit.r_squared - 27.0 / 28.0) < 1e-9);
    CHECK(std::abs(fit.t_stats[1] - std::sqrt(27.0)) < 1e-9);
    CHECK(fit.n_obs == 3);

    double residual_sum = 0.0;
    for (double r : fit.residuals) residual_sum += r;
    CHECK(std::abs(residual_sum) < 1e-8);
}

TEST_CASE("ols_fit detects rank deficiency") {
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y = {1, 2, 3, 4};
    std::vector<double> ones = {1, 1, 1, 1};
    CHECK_THROWS_AS(ols_fit(y, {ones, x, x}), NumericalError);
}

TEST_CASE("ols_fit contract errors") {
    std::vector<double> y = {1, 2};
    std::vector<double> ones = {1, 1};
    std::vector<double> x = {1, 2};
    CHECK_THROWS_AS(ols_fit(y, {ones, x}), ContractError); // n == k
    CHECK_THROWS_AS(ols_fit(y, {}), ContractError);
    std::vector<double> short_col = {1};
    CHECK_THROWS_AS(ols_fit(y, {short_col}), ContractError);
}

TEST_CASE("ols_fit residuals orthogonal to design columns") {
    Rng rng(15);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 40;
        std::vector<double> ones(n, 1.0), x1(n), x2(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x1[i] = rng.normal();
            x2[i] = rng.normal();
            y[i] = 0.5 + 1.2 * x1[i] - 0.7 * x2[i] + rng.normal();
        }
        const OlsResult fit = ols_fit(y, {ones, x1, x2});
        for (const auto& col : {ones, x1, x2}) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += col[i] * fit.residuals[i];
            CHECK(std::abs(dot) < 1e-8 * static_cast<double>(n));
        }
        CHECK(fit.r_squared >= 0.0);
        CHECK(fit.r_squared <= 1.0);
    }
}

TEST_CASE("ols_fit without intercept uses uncentred R^2") {
    std::vector<double> x = {1, 2, 3, 4};
    std::vector<double> y = {2, 4, 6, 8};
    const OlsResult fit = ols_fit(y, {x});
    CHECK(fit.coefficients[0] == doctest::Approx(2.0));
    CHECK(fit.r_squared == doctest::Approx(1.0));
}
