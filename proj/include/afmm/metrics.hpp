#pragma once

// Market-outcome measures (pricing error, volatility, liquidity, expected
// shortfall), realised action similarity, and the shared statistics
// primitives (Spearman, OLS) used by the experiment harness and the event
// study.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace afmm {

struct MetricBundle {
    double pricing_error_rmse = 0.0;       // lower = more efficient
    double volatility = 0.0;               // std of price changes
    double liquidity_level = 1.0;          // mean depth / baseline depth, in (0,1]
    double expected_shortfall = 0.0;       // positive under losses
    std::optional<double> mean_rho;        // undefined when no valid window exists
};

// sqrt(mean((p_t - v_t)^2)); equal nonempty lengths required.
double pricing_error(std::span<const double> prices, std::span<const double> fundamentals);

// Population standard deviation; length >= 2 required.
double realized_volatility(std::span<const double> changes);

// mean(depth)/d0 clipped to (0,1]; d0 > 0, nonempty series required.
double liquidity_level(std::span<const double> depth, double d0);

// -mean of the ceil(tail*n) smallest values; tail in (0,0.5].
double expected_shortfall(std::span<const double> returns, double tail);

struct RhoPoint {
    int t = 0;       // index into the series, window covers [t-window+1, t]
    double rho = 0.0;
};

// Trailing-window mean pairwise Pearson correlation of per-agent action
// series. Pairs with a constant series over the window are skipped; a t with
// no surviving pair is omitted.
std::vector<RhoPoint> action_similarity(const std::vector<std::vector<double>>& actions,
                                        int window,
                                        std::span<const std::pair<int, int>> pairs);

// Spearman rank correlation with average ranks for ties; nullopt when either
// input is constant. Lengths must match and be >= 3.
std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys);

struct OlsResult {
    std::vector<double> coefficients;
    std::vector<double> standard_errors;
    std::vector<double> t_stats;
    double r_squared = 0.0;
    int n_obs = 0;
    std::vector<double> residuals;
};

// Least squares of y on the given design columns (include a ones column for
// an intercept). Classical homoskedastic standard errors; R^2 is centred when
// a constant column is present. Throws NumericalError on rank deficiency and
// ContractError when n_obs <= n_params.
OlsResult ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& columns);

} // namespace afmm
