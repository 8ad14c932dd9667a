#include "afmm/population.hpp"
#include "afmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace afmm {

namespace {

void check_range(const char* name, const ParamRange& r) {
    if (r.mean < 0.0 || r.mean > 1.0) {
        throw ConfigError(std::string(name) + ".mean must lie in [0,1]");
    }
    if (r.half_width < 0.0) {
        throw ConfigError(std::string(name) + ".half_width must be nonnegative");
    }
}

double sample_clipped(const ParamRange& r, Rng& rng) {
    const double lo = std::clamp(r.mean - r.half_width, 0.0, 1.0);
    const double hi = std::clamp(r.mean + r.half_width, 0.0, 1.0);
    return rng.uniform(lo, hi);
}

} // namespace

void PopulationConfig::validate() const {
    if (n_agents <= 0) throw ConfigError("population.n_agents must be positive");
    if (n_vendors <= 0) throw ConfigError("population.n_vendors must be positive");
    if (vendor_skew < 0.0) throw ConfigError("population.vendor_skew must be nonnegative");
    if (position_limit <= 0.0) throw ConfigError("population.position_limit must be positive");
    check_range("population.a", autonomy);
    check_range("population.h", heterogeneity);
    check_range("population.c", coupling);
    check_range("population.s", observability);
}

std::vector<double> zipf_shares(int n_vendors, double skew) {
    std::vector<double> shares(static_cast<std::size_t>(n_vendors));
    double total = 0.0;
    for (int k = 0; k < n_vendors; ++k) {
        shares[static_cast<std::size_t>(k)] = std::pow(static_cast<double>(k + 1), -skew);
        total += shares[static_cast<std::size_t>(k)];
    }
    for (auto& s : shares) s /= total;
    return shares;
}

AgentPopulation build_population(const PopulationConfig& config, std::uint64_t seed) {
    config.validate();

    Rng rng(seed);
    AgentPopulation pop;
    pop.vendor_shares = zipf_shares(config.n_vendors, config.vendor_skew);

    // Cumulative shares for the vendor draw.
    std::vector<double> cum(pop.vendor_shares.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < cum.size(); ++k) {
        acc += pop.vendor_shares[k];
        cum[k] = acc;
    }
    cum.back() = 1.0;

    pop.agents.resize(static_cast<std::size_t>(config.n_agents));
    for (int i = 0; i < config.n_agents; ++i) {
        AgentSpec& a = pop.agents[static_cast<std::size_t>(i)];
        a.id = i;
        a.autonomy = sample_clipped(config.autonomy, rng);
        a.heterogeneity = sample_clipped(config.heterogeneity, rng);
        a.coupling = sample_clipped(config.coupling, rng);
        a.observability = sample_clipped(config.observability, rng);
        const double u = rng.uniform01();
        const auto it = std::lower_bound(cum.begin(), cum.end(), u);
        a.vendor_id = static_cast<int>(it - cum.begin());
        if (a.vendor_id >= config.n_vendors) a.vendor_id = config.n_vendors - 1;
        a.vendor_exposure = pop.vendor_shares[static_cast<std::size_t>(a.vendor_id)];
        a.position_limit = config.position_limit;
    }

    if (config.weight_mode == WeightMode::Equal) {
        const double w = 1.0 / static_cast<double>(config.n_agents);
        for (auto& a : pop.agents) a.weight = w;
    } else {
        double total = 0.0;
        for (auto& a : pop.agents) {
            a.weight = rng.uniform01();
            total += a.weight;
        }
        for (auto& a : pop.agents) a.weight /= total;
    }
    return pop;
}

double vendor_concentration(const AgentPopulation& pop) {
    if (pop.agents.empty()) throw ContractError("vendor_concentration: empty population");
    double hhi = 0.0;
    for (double s : pop.vendor_shares) hhi += s * s;
    return hhi;
}

ParameterAggregates population_summary(const AgentPopulation& pop) {
    if (pop.agents.empty()) throw ContractError("population_summary: empty population");
    ParameterAggregates agg;
    for (const auto& a : pop.agents) {
        agg.a_bar += a.weight * a.autonomy;
        agg.h_bar += a.weight * a.heterogeneity;
        agg.c_bar += a.weight * a.coupling;
        agg.s_bar += a.weight * a.observability;
    }
    agg.v_bar = vendor_concentration(pop);
    return agg;
}

} // namespace afmm
