#include "afmm/config.hpp"
#include "afmm/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace afmm {

using nlohmann::json;

namespace {

void reject_unknown_keys(const json& object, const std::set<std::string>& allowed,
                         const std::string& where) {
    for (const auto& [key, value] : object.items()) {
        (void)value;
        if (!allowed.count(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

double get_number(const json& object, const char* key, double fallback,
                  const std::string& where) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
    return v.get<double>();
}

int get_int(const json& object, const char* key, int fallback, const std::string& where) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& object, const char* key, std::uint64_t fallback,
                      const std::string& where) {
    if (!object.contains(key)) return fallback;
    const auto& v = object.at(key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw ConfigError(where + "." + key + " must be a nonnegative integer");
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        throw ConfigError(where + "." + key + " must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

void parse_population(const json& object, PopulationConfig& pop) {
    const std::string where = "population";
    reject_unknown_keys(object,
                        {"n_agents", "a_mean", "a_half_width", "h_mean", "h_half_width",
                         "c_mean", "c_half_width", "s_mean", "s_half_width", "n_vendors",
                         "vendor_skew", "weight_mode", "position_limit"},
                        where);
    pop.n_agents = get_int(object, "n_agents", pop.n_agents, where);
    pop.autonomy.mean = get_number(object, "a_mean", pop.autonomy.mean, where);
    pop.autonomy.half_width = get_number(object, "a_half_width", pop.autonomy.half_width, where);
    pop.heterogeneity.mean = get_number(object, "h_mean", pop.heterogeneity.mean, where);
    pop.heterogeneity.half_width =
        get_number(object, "h_half_width", pop.heterogeneity.half_width, where);
    pop.coupling.mean = get_number(object, "c_mean", pop.coupling.mean, where);
    pop.coupling.half_width = get_number(object, "c_half_width", pop.coupling.half_width, where);
    pop.observability.mean = get_number(object, "s_mean", pop.observability.mean, where);
    pop.observability.half_width =
        get_number(object, "s_half_width", pop.observability.half_width, where);
    pop.n_vendors = get_int(object, "n_vendors", pop.n_vendors, where);
    pop.vendor_skew = get_number(object, "vendor_skew", pop.vendor_skew, where);
    pop.position_limit = get_number(object, "position_limit", pop.position_limit, where);
    if (object.contains("weight_mode")) {
        const std::string mode = object.at("weight_mode").get<std::string>();
        if (mode == "equal") pop.weight_mode = WeightMode::Equal;
        else if (mode == "random") pop.weight_mode = WeightMode::Random;
        else throw ConfigError("population.weight_mode must be 'equal' or 'random'");
    }
}

void parse_simulation(const json& object, SimConfig& sim, std::uint64_t& seed) {
    const std::string where = "simulation";
    reject_unknown_keys(
        object, {"horizon", "burn_in", "p0", "v0", "sigma_v", "jump_prob", "sigma_jump",
                 "sigma_s", "sigma_m", "kappa", "theta", "depth0", "gamma", "depth_floor",
                 "stress_window", "stress_threshold", "flatten_fraction", "pause_steps",
                 "outage_prob", "outage_duration", "unwind_rate", "rho_window", "rho_pairs",
                 "es_tail", "seed"},
        where);
    sim.horizon = get_int(object, "horizon", sim.horizon, where);
    sim.burn_in = get_int(object, "burn_in", sim.burn_in, where);
    sim.p0 = get_number(object, "p0", sim.p0, where);
    sim.v0 = get_number(object, "v0", sim.v0, where);
    sim.sigma_v = get_number(object, "sigma_v", sim.sigma_v, where);
    sim.jump_prob = get_number(object, "jump_prob", sim.jump_prob, where);
    sim.sigma_jump = get_number(object, "sigma_jump", sim.sigma_jump, where);
    sim.sigma_s = get_number(object, "sigma_s", sim.sigma_s, where);
    sim.sigma_m = get_number(object, "sigma_m", sim.sigma_m, where);
    sim.kappa = get_number(object, "kappa", sim.kappa, where);
    sim.theta = get_number(object, "theta", sim.theta, where);
    sim.depth0 = get_number(object, "depth0", sim.depth0, where);
    sim.gamma = get_number(object, "gamma", sim.gamma, where);
    sim.depth_floor = get_number(object, "depth_floor", sim.depth_floor, where);
    sim.stress_window = get_int(object, "stress_window", sim.stress_window, where);
    sim.stress_threshold = get_number(object, "stress_threshold", sim.stress_threshold, where);
    sim.flatten_fraction = get_number(object, "flatten_fraction", sim.flatten_fraction, where);
    sim.pause_steps = get_int(object, "pause_steps", sim.pause_steps, where);
    sim.outage_prob = get_number(object, "outage_prob", sim.outage_prob, where);
    sim.outage_duration = get_int(object, "outage_duration", sim.outage_duration, where);
    sim.unwind_rate = get_number(object, "unwind_rate", sim.unwind_rate, where);
    sim.rho_window = get_int(object, "rho_window", sim.rho_window, where);
    sim.rho_pairs = get_int(object, "rho_pairs", sim.rho_pairs, where);
    sim.es_tail = get_number(object, "es_tail", sim.es_tail, where);
    seed = get_u64(object, "seed", seed, where);
}

void parse_sweep(const json& object, ToolConfig& config) {
    const std::string where = "sweep";
    reject_unknown_keys(object, {"parameters", "seeds_per_cell", "base_seed"}, where);
    config.seeds_per_cell = get_int(object, "seeds_per_cell", config.seeds_per_cell, where);
    config.base_seed = get_u64(object, "base_seed", config.base_seed, where);
    if (!object.contains("parameters")) return;
    const auto& params = object.at("parameters");
    if (!params.is_array()) throw ConfigError("sweep.parameters must be an array");
    config.sweep_parameters.clear();
    for (const auto& entry : params) {
        if (!entry.is_object()) throw ConfigError("sweep.parameters entries must be objects");
        reject_unknown_keys(entry, {"name", "grid"}, "sweep.parameters[]");
        if (!entry.contains("name") || !entry.contains("grid")) {
            throw ConfigError("sweep.parameters entries need 'name' and 'grid'");
        }
        SweepParameter param;
        param.name = entry.at("name").get<std::string>();
        for (const auto& v : entry.at("grid")) {
            if (!v.is_number()) throw ConfigError("sweep grid values must be numbers");
            param.grid.push_back(v.get<double>());
        }
        config.sweep_parameters.push_back(std::move(param));
    }
}

void parse_thresholds(const json& object, PropositionThresholds& th) {
    const std::string where = "thresholds";
    reject_unknown_keys(object, {"spearman_strong", "spearman_weak", "psi_t_min"}, where);
    th.spearman_strong = get_number(object, "spearman_strong", th.spearman_strong, where);
    th.spearman_weak = get_number(object, "spearman_weak", th.spearman_weak, where);
    if (th.spearman_strong <= 0 || th.spearman_strong > 1 || th.spearman_weak < 0 ||
        th.spearman_weak > th.spearman_strong) {
        throw ConfigError("thresholds: need 0 <= spearman_weak <= spearman_strong <= 1");
    }
    th.psi_t_min = get_number(object, "psi_t_min", th.psi_t_min, where);
}

} // namespace

ToolConfig parse_config(const std::string& json_text, const std::string& source_name) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(source_name + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError(source_name + ": top level must be an object");
    reject_unknown_keys(root, {"population", "simulation", "sweep", "thresholds"}, source_name);

    ToolConfig config;
    try {
        if (root.contains("population")) parse_population(root.at("population"), config.population);
        if (root.contains("simulation")) parse_simulation(root.at("simulation"), config.simulation, config.seed);
        if (root.contains("sweep")) parse_sweep(root.at("sweep"), config);
        if (root.contains("thresholds")) parse_thresholds(root.at("thresholds"), config.thresholds);
    } catch (const json::exception& e) {
        throw ConfigError(source_name + ": " + e.what());
    }
    config.population.validate();
    config.simulation.validate();
    return config;
}

ToolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path);
}

std::string canonical_config_json(const ToolConfig& config) {
    json root;
    json& pop = root["population"];
    pop["n_agents"] = config.population.n_agents;
    pop["a_mean"] = config.population.autonomy.mean;
    pop["a_half_width"] = config.population.autonomy.half_width;
    pop["h_mean"] = config.population.heterogeneity.mean;
    pop["h_half_width"] = config.population.heterogeneity.half_width;
    pop["c_mean"] = config.population.coupling.mean;
    pop["c_half_width"] = config.population.coupling.half_width;
    pop["s_mean"] = config.population.observability.mean;
    pop["s_half_width"] = config.population.observability.half_width;
    pop["n_vendors"] = config.population.n_vendors;
    pop["vendor_skew"] = config.population.vendor_skew;
    pop["weight_mode"] = config.population.weight_mode == WeightMode::Equal ? "equal" : "random";
    pop["position_limit"] = config.population.position_limit;

    json& sim = root["simulation"];
    sim["horizon"] = config.simulation.horizon;
    sim["burn_in"] = config.simulation.burn_in;
    sim["p0"] = config.simulation.p0;
    sim["v0"] = config.simulation.v0;
    sim["sigma_v"] = config.simulation.sigma_v;
    sim["jump_prob"] = config.simulation.jump_prob;
    sim["sigma_jump"] = config.simulation.sigma_jump;
    sim["sigma_s"] = config.simulation.sigma_s;
    sim["sigma_m"] = config.simulation.sigma_m;
    sim["kappa"] = config.simulation.kappa;
    sim["theta"] = config.simulation.theta;
    sim["depth0"] = config.simulation.depth0;
    sim["gamma"] = config.simulation.gamma;
    sim["depth_floor"] = config.simulation.depth_floor;
    sim["stress_window"] = config.simulation.stress_window;
    sim["stress_threshold"] = config.simulation.stress_threshold;
    sim["flatten_fraction"] = config.simulation.flatten_fraction;
    sim["pause_steps"] = config.simulation.pause_steps;
    sim["outage_prob"] = config.simulation.outage_prob;
    sim["outage_duration"] = config.simulation.outage_duration;
    sim["unwind_rate"] = config.simulation.unwind_rate;
    sim["rho_window"] = config.simulation.rho_window;
    sim["rho_pairs"] = config.simulation.rho_pairs;
    sim["es_tail"] = config.simulation.es_tail;
    sim["seed"] = config.seed;

    json& sweep = root["sweep"];
    sweep["seeds_per_cell"] = config.seeds_per_cell;
    sweep["base_seed"] = config.base_seed;
    sweep["parameters"] = json::array();
    for (const auto& param : config.sweep_parameters) {
        sweep["parameters"].push_back({{"name", param.name}, {"grid", param.grid}});
    }

    json& th = root["thresholds"];
    th["spearman_strong"] = config.thresholds.spearman_strong;
    th["spearman_weak"] = config.thresholds.spearman_weak;
    th["psi_t_min"] = config.thresholds.psi_t_min;

    return root.dump(); // nlohmann orders object keys; output is canonical
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001B3ULL;
    }
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[hash & 0xF];
        hash >>= 4;
    }
    return out;
}

std::string config_digest(const ToolConfig& config) {
    return fnv1a_hex(canonical_config_json(config));
}

} // namespace afmm
