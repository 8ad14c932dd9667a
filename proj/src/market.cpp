#include "afmm/market.hpp"
#include "afmm/csv.hpp"
#include "afmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace afmm {

void SimConfig::validate() const {
    if (horizon <= 0) throw ConfigError("simulation.horizon must be positive");
    if (burn_in < 0 || burn_in >= horizon) {
        throw ConfigError("simulation.burn_in must satisfy 0 <= burn_in < horizon");
    }
    if (sigma_v < 0 || sigma_jump < 0 || sigma_s < 0 || sigma_m < 0) {
        throw ConfigError("simulation noise scales must be nonnegative");
    }
    if (jump_prob < 0 || jump_prob > 1) throw ConfigError("simulation.jump_prob must lie in [0,1]");
    if (outage_prob < 0 || outage_prob > 1) throw ConfigError("simulation.outage_prob must lie in [0,1]");
    if (flatten_fraction < 0 || flatten_fraction > 1) {
        throw ConfigError("simulation.flatten_fraction must lie in [0,1]");
    }
    if (unwind_rate < 0 || unwind_rate > 1) throw ConfigError("simulation.unwind_rate must lie in [0,1]");
    if (kappa < 0) throw ConfigError("simulation.kappa must be nonnegative");
    if (theta < 0) throw ConfigError("simulation.theta must be nonnegative");
    if (depth0 <= 0) throw ConfigError("simulation.depth0 must be positive");
    if (depth_floor <= 0) throw ConfigError("simulation.depth_floor must be positive");
    if (gamma < 0) throw ConfigError("simulation.gamma must be nonnegative");
    if (stress_window < 2) throw ConfigError("simulation.stress_window must be >= 2");
    if (stress_threshold < 0) throw ConfigError("simulation.stress_threshold must be nonnegative");
    if (pause_steps < 0) throw ConfigError("simulation.pause_steps must be nonnegative");
    if (outage_duration < 0) throw ConfigError("simulation.outage_duration must be nonnegative");
    if (rho_window < 2) throw ConfigError("simulation.rho_window must be >= 2");
    if (rho_pairs < 1) throw ConfigError("simulation.rho_pairs must be >= 1");
    if (es_tail <= 0 || es_tail > 0.5) throw ConfigError("simulation.es_tail must lie in (0, 0.5]");
}

const char* to_string(ActionStatus status) {
    switch (status) {
        case ActionStatus::Executed: return "executed";
        case ActionStatus::Delayed: return "delayed";
        case ActionStatus::Paused: return "paused";
        case ActionStatus::FrozenSafe: return "frozen_safe";
        case ActionStatus::ForcedUnwind: return "forced_unwind";
    }
    return "unknown";
}

SimState init_sim(const SimConfig& config, AgentPopulation pop, std::uint64_t seed) {
    config.validate();
    if (pop.agents.empty()) throw ConfigError("init_sim: population is empty");

    SimState state;
    state.config = config;
    state.population = std::move(pop);
    state.t = 0;
    state.price = config.p0;
    state.fundamental = config.v0;
    const std::size_t n = state.population.agents.size();
    state.positions.assign(n, 0.0);
    state.pending.assign(n, 0.0);
    state.pause_left.assign(n, 0);
    state.outage_left.assign(state.population.vendor_shares.size(), 0);
    state.rng = Rng(seed);
    return state;
}

EnvSnapshot advance_environment(SimState& state) {
    if (state.t >= state.config.horizon) {
        throw ContractError("advance_environment: horizon already reached");
    }
    const SimConfig& cfg = state.config;
    EnvSnapshot env;
    env.t = state.t;

    state.fundamental += cfg.sigma_v * state.rng.normal();
    if (state.rng.bernoulli(cfg.jump_prob)) {
        env.news = cfg.sigma_jump * state.rng.normal();
        state.fundamental += env.news;
    }
    env.v = state.fundamental;
    env.s = env.v + cfg.sigma_s * state.rng.normal();
    env.m = cfg.sigma_m * state.rng.normal();

    // Outage timers: tick down, then healthy vendors may fail.
    for (std::size_t k = 0; k < state.outage_left.size(); ++k) {
        if (state.outage_left[k] > 0) --state.outage_left[k];
        if (state.outage_left[k] == 0 && state.rng.bernoulli(cfg.outage_prob)) {
            state.outage_left[k] = cfg.outage_duration;
        }
        if (state.outage_left[k] > 0) env.failed_vendors.push_back(static_cast<int>(k));
    }

    if (state.price_changes.size() >= 2) {
        std::vector<double> changes(state.price_changes.begin(), state.price_changes.end());
        env.stress = realized_volatility(changes);
    }
    env.depth = std::max(cfg.depth_floor, cfg.depth0 * std::exp(-cfg.gamma * env.stress));
    return env;
}

double form_belief(const AgentSpec& agent, const EnvSnapshot& env, double sigma_m, double idio) {
    return env.v + std::sqrt(1.0 - agent.heterogeneity) * env.m +
           std::sqrt(agent.heterogeneity) * sigma_m * idio;
}

DecisionObject decide(const AgentSpec& agent, double belief, const EnvSnapshot& env,
                      double price, const SimConfig& config) {
    DecisionObject d;
    d.agent_id = agent.id;
    d.belief = belief;
    const double gap = env.s - price;
    d.trigger_active = std::abs(gap) >= config.theta;
    d.desired_trade = (1.0 - agent.coupling) * config.kappa * (belief - price);
    if (d.trigger_active) {
        d.desired_trade += agent.coupling * config.kappa * gap;
    }
    return d;
}

double clamp_trade(double raw, double position, double limit) {
    return std::clamp(raw, -limit - position, limit - position);
}

RealizedAction apply_controls(const AgentSpec& agent, const DecisionObject& decision,
                              SimState& state, const EnvSnapshot& env) {
    if (decision.agent_id != agent.id) {
        throw ContractError("apply_controls: decision does not belong to agent");
    }
    const SimConfig& cfg = state.config;
    const auto idx = static_cast<std::size_t>(agent.id);
    const double position = state.positions[idx];
    RealizedAction action;
    action.agent_id = agent.id;

    // (1) Vendor outage: safe freeze with probability S, otherwise forced unwind.
    const bool vendor_down = std::binary_search(env.failed_vendors.begin(),
                                                env.failed_vendors.end(), agent.vendor_id);
    if (vendor_down) {
        if (state.rng.bernoulli(agent.observability)) {
            action.status = ActionStatus::FrozenSafe;
            return action;
        }
        action.status = ActionStatus::ForcedUnwind;
        action.quantity = clamp_trade(-cfg.unwind_rate * position, position, agent.position_limit);
        return action;
    }

    // (2) Supervisory pause / stress circuit-breaker.
    if (state.pause_left[idx] > 0) {
        --state.pause_left[idx];
        action.status = ActionStatus::Paused;
        return action;
    }
    if (env.stress > cfg.stress_threshold && state.rng.bernoulli(agent.observability)) {
        action.status = ActionStatus::ForcedUnwind;
        action.quantity =
            clamp_trade(-cfg.flatten_fraction * position, position, agent.position_limit);
        state.pause_left[idx] = cfg.pause_steps;
        return action;
    }

    // (3) Normal path: autonomy scales the trade and gates approval latency.
    const double raw = agent.autonomy * (decision.desired_trade + state.pending[idx]);
    state.pending[idx] = 0.0;
    if (state.rng.bernoulli(1.0 - agent.autonomy)) {
        state.pending[idx] = raw;
        action.status = ActionStatus::Delayed;
        return action;
    }
    action.status = ActionStatus::Executed;
    action.quantity = clamp_trade(raw, position, agent.position_limit);
    return action;
}

double aggregate_actions(std::span<const RealizedAction> actions,
                         std::span<const double> weights) {
    if (actions.size() != weights.size()) {
        throw ContractError("aggregate_actions: length mismatch");
    }
    double flow = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        flow += weights[i] * actions[i].quantity;
    }
    return flow;
}

double update_price(double price, double flow, double depth) {
    if (depth <= 0.0) throw ContractError("update_price: depth must be positive");
    return price + flow / depth;
}

StepRecord step(SimState& state) {
    const SimConfig& cfg = state.config;
    EnvSnapshot env = advance_environment(state);
    const auto& agents = state.population.agents;
    const std::size_t n = agents.size();

    std::vector<double> beliefs(n);
    for (std::size_t i = 0; i < n; ++i) {
        beliefs[i] = form_belief(agents[i], env, cfg.sigma_m, state.rng.normal());
    }

    std::vector<DecisionObject> decisions(n);
    for (std::size_t i = 0; i < n; ++i) {
        decisions[i] = decide(agents[i], beliefs[i], env, state.price, cfg);
    }

    std::vector<RealizedAction> actions(n);
    std::vector<double> weights(n);
    StepRecord record;
    record.trades.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        actions[i] = apply_controls(agents[i], decisions[i], state, env);
        weights[i] = agents[i].weight;
        record.trades[i] = actions[i].quantity;
        switch (actions[i].status) {
            case ActionStatus::Executed: ++record.counts.executed; break;
            case ActionStatus::Delayed: ++record.counts.delayed; break;
            case ActionStatus::Paused: ++record.counts.paused; break;
            case ActionStatus::FrozenSafe: ++record.counts.frozen; break;
            case ActionStatus::ForcedUnwind: ++record.counts.unwind; break;
        }
    }

    const double flow = aggregate_actions(actions, weights);
    const double new_price = update_price(state.price, flow, env.depth);

    for (std::size_t i = 0; i < n; ++i) {
        state.positions[i] += actions[i].quantity;
    }
    state.price_changes.push_back(new_price - state.price);
    while (state.price_changes.size() > static_cast<std::size_t>(cfg.stress_window)) {
        state.price_changes.pop_front();
    }
    state.price = new_price;

    record.t = state.t;
    record.price = new_price;
    record.v = env.v;
    record.s = env.s;
    record.flow = flow;
    record.depth = env.depth;
    record.stress = env.stress;
    record.news = env.news;
    ++state.t;
    return record;
}

std::vector<std::pair<int, int>> sample_rho_pairs(int n_agents, int n_pairs,
                                                  std::uint64_t seed) {
    std::vector<std::pair<int, int>> all;
    all.reserve(static_cast<std::size_t>(n_agents) * (n_agents - 1) / 2);
    for (int i = 0; i < n_agents; ++i) {
        for (int j = i + 1; j < n_agents; ++j) all.emplace_back(i, j);
    }
    if (static_cast<std::size_t>(n_pairs) >= all.size()) return all;
    Rng rng(seed);
    // Partial Fisher-Yates: the first n_pairs entries are the sample.
    for (int i = 0; i < n_pairs; ++i) {
        const auto j = i + static_cast<int>(rng.below(all.size() - static_cast<std::size_t>(i)));
        std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
    }
    all.resize(static_cast<std::size_t>(n_pairs));
    std::sort(all.begin(), all.end());
    return all;
}

namespace {

// Sub-stream salts for one run seed.
constexpr std::uint64_t kPopulationSalt = 1;
constexpr std::uint64_t kMarketSalt = 2;
constexpr std::uint64_t kRhoPairSalt = 3;

MetricBundle compute_metrics(const SimConfig& cfg, const std::vector<StepRecord>& records) {
    MetricBundle bundle;
    const std::size_t n = records.size();
    std::vector<double> prices(n), fundamentals(n), depths(n);
    for (std::size_t i = 0; i < n; ++i) {
        prices[i] = records[i].price;
        fundamentals[i] = records[i].v;
        depths[i] = records[i].depth;
    }
    bundle.pricing_error_rmse = pricing_error(prices, fundamentals);
    bundle.liquidity_level = liquidity_level(depths, cfg.depth0);
    if (n >= 3) {
        std::vector<double> changes(n - 1);
        for (std::size_t i = 1; i < n; ++i) changes[i - 1] = prices[i] - prices[i - 1];
        bundle.volatility = realized_volatility(changes);
        bundle.expected_shortfall = expected_shortfall(changes, cfg.es_tail);
    }
    return bundle;
}

} // namespace

SimResult simulate_run(const SimConfig& config, const PopulationConfig& pop_config,
                       std::uint64_t seed) {
    config.validate();
    pop_config.validate();

    AgentPopulation pop = build_population(pop_config, stable_mix(seed, kPopulationSalt));
    SimResult result;
    result.seed = seed;
    result.aggregates = population_summary(pop);
    const int n_agents = static_cast<int>(pop.agents.size());

    SimState state = init_sim(config, std::move(pop), stable_mix(seed, kMarketSalt));
    result.records.reserve(static_cast<std::size_t>(config.horizon - config.burn_in));
    for (int t = 0; t < config.horizon; ++t) {
        StepRecord record = step(state);
        if (record.t >= config.burn_in) result.records.push_back(std::move(record));
    }

    result.metrics = compute_metrics(config, result.records);

    const auto pairs =
        sample_rho_pairs(n_agents, config.rho_pairs, stable_mix(seed, kRhoPairSalt));
    std::vector<std::vector<double>> action_matrix(
        static_cast<std::size_t>(n_agents),
        std::vector<double>(result.records.size(), 0.0));
    for (std::size_t t = 0; t < result.records.size(); ++t) {
        for (int i = 0; i < n_agents; ++i) {
            action_matrix[static_cast<std::size_t>(i)][t] =
                result.records[t].trades[static_cast<std::size_t>(i)];
        }
    }
    const auto rho = action_similarity(action_matrix, config.rho_window, pairs);
    if (!rho.empty()) {
        double total = 0.0;
        for (const auto& point : rho) total += point.rho;
        result.metrics.mean_rho = total / static_cast<double>(rho.size());
    }
    return result;
}

void write_series_csv(const SimResult& result, std::ostream& out) {
    out << "t,p,v,s,Q,D,Z,news,n_executed,n_delayed,n_paused,n_frozen,n_unwind\n";
    for (const auto& r : result.records) {
        write_csv_row(out, {std::to_string(r.t), format_double(r.price), format_double(r.v),
                            format_double(r.s), format_double(r.flow), format_double(r.depth),
                            format_double(r.stress), format_double(r.news),
                            std::to_string(r.counts.executed), std::to_string(r.counts.delayed),
                            std::to_string(r.counts.paused), std::to_string(r.counts.frozen),
                            std::to_string(r.counts.unwind)});
    }
}

} // namespace afmm
