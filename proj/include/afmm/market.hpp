#pragma once

// The market loop: environment evolution, belief formation, decisions,
// institutional controls, flow aggregation, price impact, and the state
// transition. A run is a pure function of (configs, seed).
//
// Per-step draw order (fixed for reproducibility):
//   1. fundamental shock, 2. jump trigger (+ jump size when triggered),
//   3. public-signal noise, 4. common model error,
//   5. one outage draw per healthy vendor in vendor-id order,
//   6. one belief draw per agent in id order,
//   7. at most one control draw per agent in id order.

#include "afmm/metrics.hpp"
#include "afmm/population.hpp"
#include "afmm/rng.hpp"

#include <cstdint>
#include <deque>
#include <string>
#include <vector>

namespace afmm {

struct SimConfig {
    int horizon = 2000;            // steps
    int burn_in = 200;             // records before this step are discarded
    double p0 = 100.0;
    double v0 = 100.0;
    double sigma_v = 0.045;         // fundamental step volatility
    double jump_prob = 0.03;       // per-step news-jump probability
    double sigma_jump = 0.15;       // jump size scale
    double sigma_s = 0.3;          // public-signal noise scale
    double sigma_m = 0.2;          // model-error scale
    double kappa = 0.9;            // decision gain (units per price unit)
    double theta = 0.35;            // coupling trigger threshold (price units)
    double depth0 = 1.0;           // baseline depth (units per price unit)
    double gamma = 3.0;            // depth sensitivity to stress
    double depth_floor = 0.35;
    int stress_window = 20;        // realised-volatility window for Z
    double stress_threshold = 1.0; // Z level triggering supervisory checks
    double flatten_fraction = 0.05; // phi
    int pause_steps = 20;
    double outage_prob = 0.0008;    // per vendor per step
    int outage_duration = 10;      // steps
    double unwind_rate = 0.5;      // mu
    int rho_window = 20;
    int rho_pairs = 200;
    double es_tail = 0.01;         // expected-shortfall tail fraction

    void validate() const; // throws ConfigError
};

struct EnvSnapshot {
    int t = 0;
    double v = 0.0;      // fundamental
    double s = 0.0;      // public signal = v + common noise
    double m = 0.0;      // common model error
    double news = 0.0;   // jump this step, 0 if none
    double stress = 0.0; // Z: rolling std of price changes
    double depth = 0.0;  // D >= depth_floor
    std::vector<int> failed_vendors; // sorted vendor ids in outage
};

enum class ActionStatus { Executed, Delayed, Paused, FrozenSafe, ForcedUnwind };

const char* to_string(ActionStatus status);

struct DecisionObject {
    int agent_id = 0;
    double desired_trade = 0.0;
    bool trigger_active = false;
    double belief = 0.0;
};

struct RealizedAction {
    int agent_id = 0;
    double quantity = 0.0;
    ActionStatus status = ActionStatus::Executed;
};

struct StatusCounts {
    int executed = 0;
    int delayed = 0;
    int paused = 0;
    int frozen = 0;
    int unwind = 0;
};

struct StepRecord {
    int t = 0;
    double price = 0.0;  // after this step's impact
    double v = 0.0;
    double s = 0.0;
    double flow = 0.0;   // Q
    double depth = 0.0;
    double stress = 0.0;
    double news = 0.0;
    std::vector<double> trades; // per-agent q, id order
    StatusCounts counts;
};

struct SimState {
    SimConfig config;
    AgentPopulation population;
    int t = 0;
    double price = 0.0;
    double fundamental = 0.0;
    std::vector<double> positions;      // per agent
    std::vector<double> pending;        // one delayed-trade slot per agent
    std::vector<int> pause_left;        // per agent
    std::vector<int> outage_left;       // per vendor
    std::deque<double> price_changes;   // last stress_window changes
    Rng rng;

    SimState() : rng(0) {}
};

struct SimResult {
    std::vector<StepRecord> records; // t in [burn_in, horizon)
    MetricBundle metrics;
    std::uint64_t seed = 0;
    std::string config_digest;
    ParameterAggregates aggregates;   // realised population aggregates
};

SimState init_sim(const SimConfig& config, AgentPopulation pop, std::uint64_t seed);

// Advances the fundamental, public signal, model error, outages, stress and
// depth; mutates state and returns the snapshot agents observe this step.
EnvSnapshot advance_environment(SimState& state);

// b = v + sqrt(1-H)*m + sqrt(H)*sigma_m*idio.
double form_belief(const AgentSpec& agent, const EnvSnapshot& env, double sigma_m, double idio);

// d = (1-C)*kappa*(b-p) + C*kappa*(s-p)*1{|s-p| >= theta}.
DecisionObject decide(const AgentSpec& agent, double belief, const EnvSnapshot& env,
                      double price, const SimConfig& config);

// Clamp so the post-trade position obeys |position + q| <= limit.
double clamp_trade(double raw, double position, double limit);

// Institutional control map: outage containment, stress circuit-breaker,
// approval latency, position-limit clamp. Mutates per-agent control state
// (pending slot, pause counter) and consumes at most one draw.
RealizedAction apply_controls(const AgentSpec& agent, const DecisionObject& decision,
                              SimState& state, const EnvSnapshot& env);

// Q = sum_i w_i q_i.
double aggregate_actions(std::span<const RealizedAction> actions,
                         std::span<const double> weights);

// p' = p + Q/D.
double update_price(double price, double flow, double depth);

// One application of the transition map; advances state.t.
StepRecord step(SimState& state);

// Build population (sub-seed), run the horizon, compute the metric bundle
// over post-burn-in records.
SimResult simulate_run(const SimConfig& config, const PopulationConfig& pop_config,
                       std::uint64_t seed);

// Sampled agent pairs for the similarity measure; deterministic in seed.
std::vector<std::pair<int, int>> sample_rho_pairs(int n_agents, int n_pairs,
                                                  std::uint64_t seed);

// series.csv body: t,p,v,s,Q,D,Z,news,n_executed,n_delayed,n_paused,n_frozen,n_unwind
void write_series_csv(const SimResult& result, std::ostream& out);

} // namespace afmm
