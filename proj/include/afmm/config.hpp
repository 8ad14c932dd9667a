#pragma once

// Structured JSON configuration with sections population, simulation, sweep,
// thresholds. Unknown keys are rejected. Missing keys fall back to the
// documented defaults, so a minimal config is valid.

#include "afmm/experiments.hpp"
#include "afmm/market.hpp"
#include "afmm/population.hpp"

#include <cstdint>
#include <string>

namespace afmm {

struct ToolConfig {
    PopulationConfig population;
    SimConfig simulation;
    std::vector<SweepParameter> sweep_parameters; // may be empty
    int seeds_per_cell = 20;
    std::uint64_t base_seed = 42;
    std::uint64_t seed = 7; // run seed for `simulate`; --seed overrides
    PropositionThresholds thresholds;
};

ToolConfig load_config(const std::string& path);
ToolConfig parse_config(const std::string& json_text, const std::string& source_name);

// Canonical serialisation of the resolved configuration (sorted keys,
// shortest-round-trip numbers); input to the digest.
std::string canonical_config_json(const ToolConfig& config);

// FNV-1a 64-bit over a byte string, rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

std::string config_digest(const ToolConfig& config);

} // namespace afmm
