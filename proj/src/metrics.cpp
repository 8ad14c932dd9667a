#include "afmm/metrics.hpp"
#include "afmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace afmm {

double pricing_error(std::span<const double> prices, std::span<const double> fundamentals) {
    if (prices.empty() || prices.size() != fundamentals.size()) {
        throw ContractError("pricing_error: series must be nonempty and equal length");
    }
    double sum_sq = 0.0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const double d = prices[i] - fundamentals[i];
        sum_sq += d * d;
    }
    return std::sqrt(sum_sq / static_cast<double>(prices.size()));
}

double realized_volatility(std::span<const double> changes) {
    if (changes.size() < 2) {
        throw ContractError("realized_volatility: need at least 2 observations");
    }
    const double n = static_cast<double>(changes.size());
    double mean = 0.0;
    for (double c : changes) mean += c;
    mean /= n;
    double ss = 0.0;
    for (double c : changes) ss += (c - mean) * (c - mean);
    return std::sqrt(ss / n);
}

double liquidity_level(std::span<const double> depth, double d0) {
    if (depth.empty()) throw ContractError("liquidity_level: empty depth series");
    if (d0 <= 0.0) throw ContractError("liquidity_level: baseline depth must be positive");
    double mean = 0.0;
    for (double d : depth) mean += d;
    mean /= static_cast<double>(depth.size());
    return std::min(mean / d0, 1.0);
}

double expected_shortfall(std::span<const double> returns, double tail) {
    if (returns.empty()) throw ContractError("expected_shortfall: empty returns");
    if (tail <= 0.0 || tail > 0.5) {
        throw ContractError("expected_shortfall: tail must lie in (0, 0.5]");
    }
    const std::size_t n = returns.size();
    const std::size_t k = static_cast<std::size_t>(
        std::ceil(tail * static_cast<double>(n)));
    std::vector<double> sorted(returns.begin(), returns.end());
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    double mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) mean += sorted[i];
    return -mean / static_cast<double>(k);
}

std::vector<RhoPoint> action_similarity(const std::vector<std::vector<double>>& actions,
                                        int window,
                                        std::span<const std::pair<int, int>> pairs) {
    if (window < 2) throw ContractError("action_similarity: window must be >= 2");
    for (const auto& [i, j] : pairs) {
        if (i >= j || i < 0 || static_cast<std::size_t>(j) >= actions.size()) {
            throw ContractError("action_similarity: pair (" + std::to_string(i) + "," +
                                std::to_string(j) + ") out of range or not i<j");
        }
    }
    std::vector<RhoPoint> out;
    if (actions.empty() || pairs.empty()) return out;
    const std::size_t steps = actions.front().size();
    for (const auto& series : actions) {
        if (series.size() != steps) {
            throw ContractError("action_similarity: ragged action matrix");
        }
    }
    if (steps < static_cast<std::size_t>(window)) return out;

    // Prefix sums give exact O(1) windowed moments per (pair, t).
    const std::size_t n_agents = actions.size();
    std::vector<std::vector<double>> csum(n_agents), csum2(n_agents);
    for (std::size_t a = 0; a < n_agents; ++a) {
        csum[a].assign(steps + 1, 0.0);
        csum2[a].assign(steps + 1, 0.0);
        for (std::size_t t = 0; t < steps; ++t) {
            const double q = actions[a][t];
            csum[a][t + 1] = csum[a][t] + q;
            csum2[a][t + 1] = csum2[a][t] + q * q;
        }
    }
    std::vector<std::vector<double>> cross(pairs.size());
    for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto& qi = actions[static_cast<std::size_t>(pairs[p].first)];
        const auto& qj = actions[static_cast<std::size_t>(pairs[p].second)];
        cross[p].assign(steps + 1, 0.0);
        for (std::size_t t = 0; t < steps; ++t) {
            cross[p][t + 1] = cross[p][t] + qi[t] * qj[t];
        }
    }

    const double w = static_cast<double>(window);
    for (std::size_t t = static_cast<std::size_t>(window) - 1; t < steps; ++t) {
        const std::size_t lo = t + 1 - static_cast<std::size_t>(window);
        double total = 0.0;
        int valid = 0;
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            const auto i = static_cast<std::size_t>(pairs[p].first);
            const auto j = static_cast<std::size_t>(pairs[p].second);
            const double si = csum[i][t + 1] - csum[i][lo];
            const double sj = csum[j][t + 1] - csum[j][lo];
            const double sii = csum2[i][t + 1] - csum2[i][lo];
            const double sjj = csum2[j][t + 1] - csum2[j][lo];
            const double sij = cross[p][t + 1] - cross[p][lo];
            const double var_i = sii - si * si / w;
            const double var_j = sjj - sj * sj / w;
            if (var_i <= 1e-300 || var_j <= 1e-300) continue; // constant over window
            const double cov = sij - si * sj / w;
            double rho = cov / std::sqrt(var_i * var_j);
            rho = std::clamp(rho, -1.0, 1.0);
            total += rho;
            ++valid;
        }
        if (valid > 0) {
            out.push_back({static_cast<int>(t), total / valid});
        }
    }
    return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> xs) {
    const std::size_t n = xs.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
        const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

} // namespace

std::optional<double> spearman(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size() || xs.size() < 3) {
        throw ContractError("spearman: need equal lengths >= 3");
    }
    const bool x_const = std::all_of(xs.begin(), xs.end(), [&](double v) { return v == xs[0]; });
    const bool y_const = std::all_of(ys.begin(), ys.end(), [&](double v) { return v == ys[0]; });
    if (x_const || y_const) return std::nullopt;
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    return pearson(rx, ry);
}

OlsResult ols_fit(std::span<const double> y, const std::vector<std::vector<double>>& columns) {
    const std::size_t n = y.size();
    const std::size_t k = columns.size();
    if (k == 0) throw ContractError("ols_fit: no design columns");
    for (const auto& col : columns) {
        if (col.size() != n) throw ContractError("ols_fit: column length mismatch");
    }
    if (n <= k) throw ContractError("ols_fit: need more observations than parameters");

    // Householder QR on the n x k design, applied to y alongside.
    std::vector<double> a(n * k);
    for (std::size_t j = 0; j < k; ++j) {
        for (std::size_t i = 0; i < n; ++i) a[i * k + j] = columns[j][i];
    }
    std::vector<double> qty(y.begin(), y.end());

    double max_norm = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += a[i * k + j] * a[i * k + j];
        max_norm = std::max(max_norm, std::sqrt(norm));
    }
    const double rank_tol = 1e-10 * std::max(max_norm, 1.0);

    for (std::size_t j = 0; j < k; ++j) {
        double sigma = 0.0;
        for (std::size_t i = j; i < n; ++i) sigma += a[i * k + j] * a[i * k + j];
        sigma = std::sqrt(sigma);
        if (sigma < rank_tol) {
            throw NumericalError("ols_fit: design matrix is rank deficient at column " +
                                 std::to_string(j));
        }
        if (a[j * k + j] > 0.0) sigma = -sigma;
        // Householder vector v stored in the column below the diagonal.
        std::vector<double> v(n - j);
        v[0] = a[j * k + j] - sigma;
        for (std::size_t i = j + 1; i < n; ++i) v[i - j] = a[i * k + j];
        double vtv = 0.0;
        for (double x : v) vtv += x * x;
        if (vtv > 0.0) {
            for (std::size_t c = j; c < k; ++c) {
                double dot = 0.0;
                for (std::size_t i = j; i < n; ++i) dot += v[i - j] * a[i * k + c];
                const double f = 2.0 * dot / vtv;
                for (std::size_t i = j; i < n; ++i) a[i * k + c] -= f * v[i - j];
            }
            double dot = 0.0;
            for (std::size_t i = j; i < n; ++i) dot += v[i - j] * qty[i];
            const double f = 2.0 * dot / vtv;
            for (std::size_t i = j; i < n; ++i) qty[i] -= f * v[i - j];
        }
        a[j * k + j] = sigma;
        if (std::abs(sigma) < rank_tol) {
            throw NumericalError("ols_fit: design matrix is rank deficient at column " +
                                 std::to_string(j));
        }
    }

    OlsResult result;
    result.n_obs = static_cast<int>(n);
    result.coefficients.assign(k, 0.0);
    for (std::size_t jj = k; jj-- > 0;) {
        double s = qty[jj];
        for (std::size_t c = jj + 1; c < k; ++c) s -= a[jj * k + c] * result.coefficients[c];
        result.coefficients[jj] = s / a[jj * k + jj];
    }

    result.residuals.assign(n, 0.0);
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double fitted = 0.0;
        for (std::size_t j = 0; j < k; ++j) fitted += columns[j][i] * result.coefficients[j];
        result.residuals[i] = y[i] - fitted;
        ssr += result.residuals[i] * result.residuals[i];
    }

    const double sigma2 = ssr / static_cast<double>(n - k);
    // diag((X'X)^-1) = row norms of R^-T.
    result.standard_errors.assign(k, 0.0);
    result.t_stats.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        std::vector<double> z(k, 0.0); // solve R' z = e_j (forward substitution)
        for (std::size_t i = j; i < k; ++i) {
            double s = (i == j) ? 1.0 : 0.0;
            for (std::size_t c = j; c < i; ++c) s -= a[c * k + i] * z[c];
            z[i] = s / a[i * k + i];
        }
        double diag = 0.0;
        for (double x : z) diag += x * x;
        result.standard_errors[j] = std::sqrt(sigma2 * diag);
        result.t_stats[j] = result.standard_errors[j] > 0.0
                                ? result.coefficients[j] / result.standard_errors[j]
                                : 0.0;
    }

    bool has_intercept = false;
    for (const auto& col : columns) {
        const bool constant =
            std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; });
        if (constant && col[0] != 0.0) {
            has_intercept = true;
            break;
        }
    }
    double tss = 0.0;
    if (has_intercept) {
        double ybar = 0.0;
        for (double v : y) ybar += v;
        ybar /= static_cast<double>(n);
        for (double v : y) tss += (v - ybar) * (v - ybar);
    } else {
        for (double v : y) tss += v * v;
    }
    result.r_squared = tss > 0.0 ? 1.0 - ssr / tss : 1.0;
    result.r_squared = std::clamp(result.r_squared, 0.0, 1.0);
    return result;
}

} // namespace afmm
