#pragma once

// Heterogeneous agent population: design-parameter sampling, vendor
// assignment, and cross-sectional aggregates.

#include "afmm/rng.hpp"

#include <cstdint>
#include <vector>

namespace afmm {

struct AgentSpec {
    int id = 0;
    double autonomy = 0.0;       // A: executes without approval
    double heterogeneity = 0.0;  // H: idiosyncratic share of model error
    double coupling = 0.0;       // C: weight on the common-signal trigger
    double observability = 0.0;  // S: supervisory intervention probability
    int vendor_id = 0;
    double vendor_exposure = 0.0; // V: population share of the assigned vendor
    double weight = 0.0;          // market weight, sums to 1 across agents
    double position_limit = 0.0;  // units of asset
};

struct ParamRange {
    double mean = 0.5;
    double half_width = 0.0;
};

enum class WeightMode { Equal, Random };

struct PopulationConfig {
    int n_agents = 100;
    ParamRange autonomy{0.5, 0.1};
    ParamRange heterogeneity{0.5, 0.1};
    ParamRange coupling{0.5, 0.1};
    ParamRange observability{0.5, 0.1};
    int n_vendors = 5;
    double vendor_skew = 1.0;    // Zipf exponent for vendor shares
    WeightMode weight_mode = WeightMode::Equal;
    double position_limit = 60.0;

    void validate() const; // throws ConfigError
};

struct AgentPopulation {
    std::vector<AgentSpec> agents;
    std::vector<double> vendor_shares; // length K, sums to 1
};

struct ParameterAggregates {
    double a_bar = 0.0;
    double h_bar = 0.0;
    double c_bar = 0.0;
    double s_bar = 0.0;
    double v_bar = 0.0; // Herfindahl of vendor shares
};

// share_k proportional to (k+1)^(-skew), normalised to sum 1.
std::vector<double> zipf_shares(int n_vendors, double skew);

// Deterministic in (config, seed). Draw order: per agent in id order the four
// design parameters A,H,C,S then the vendor index; afterwards, for random
// weight mode, one uniform per agent.
AgentPopulation build_population(const PopulationConfig& config, std::uint64_t seed);

// Herfindahl index of vendor shares, in [1/K, 1].
double vendor_concentration(const AgentPopulation& pop);

// Weight-weighted means of A,H,C,S plus vendor concentration.
ParameterAggregates population_summary(const AgentPopulation& pop);

} // namespace afmm
