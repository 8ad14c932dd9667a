#pragma once

// Parameter sweeps over population means, proposition verdicts, and the
// reduced-form similarity regression.

#include "afmm/market.hpp"
#include "afmm/metrics.hpp"
#include "afmm/population.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace afmm {

// Sweepable parameter names: A, H, C, S (population means), vendor_skew,
// outage_prob.
struct SweepParameter {
    std::string name;
    std::vector<double> grid;
};

struct SweepSpec {
    SimConfig sim;
    PopulationConfig pop;
    std::vector<SweepParameter> parameters;
    int seeds_per_cell = 1;
    std::uint64_t base_seed = 0;

    void validate() const; // throws ConfigError
};

struct SweepRow {
    int cell_index = 0;
    std::vector<double> cell_values; // aligned with SweepTable::parameter_names
    int seed_index = 0;
    std::uint64_t run_seed = 0;
    ParameterAggregates aggregates;
    MetricBundle metrics;
};

struct SweepTable {
    std::vector<std::string> parameter_names;
    std::vector<SweepRow> rows; // sorted by (cell_index, seed_index)
};

// Cells enumerated row-major over the parameter grids; each run's seed is
// stable_mix(stable_mix(base_seed, cell_index), seed_index).
std::uint64_t sweep_run_seed(std::uint64_t base_seed, int cell_index, int seed_index);
SweepTable run_sweep(const SweepSpec& spec);

void write_sweep_csv(const SweepTable& table, std::ostream& out);
SweepTable read_sweep_csv(std::istream& in, const std::string& source_name);

enum class Verdict { Supported, NotSupported, Inconclusive };
const char* to_string(Verdict verdict);

struct PropositionThresholds {
    double spearman_strong = 0.8;
    double spearman_weak = 0.3;
    double psi_t_min = 2.0;
};

struct PropositionStatistic {
    std::string name;
    double value = 0.0;
    bool defined = true;
    std::string threshold; // human-readable criterion the value was held to
};

struct PropositionReport {
    std::string id;
    std::vector<PropositionStatistic> statistics;
    Verdict verdict = Verdict::Inconclusive;
};

// Mean of a metric per cell, keyed by cell_index, cells in index order.
struct CellMeans {
    std::vector<std::vector<double>> cell_values;
    std::vector<double> means;
};
CellMeans cell_mean(const SweepTable& table, double (*extract)(const SweepRow&));

// Heterogeneity improves price discovery: Spearman(H grid, mean pricing
// error) at most -strong supported, in (-strong, -weak] inconclusive.
PropositionReport test_proposition1(const SweepTable& table, const PropositionThresholds& th);

// Coupling produces herding: volatility and similarity rise, liquidity falls.
PropositionReport test_proposition2(const SweepTable& table, const PropositionThresholds& th);

// Shortfall is supermodular in (autonomy, concentration) at low oversight and
// lower at high oversight.
PropositionReport test_proposition3(const SweepTable& table, const PropositionThresholds& th);

// OLS of cell-mean similarity on intercept, C-bar, (1 - H-bar), V-bar.
OlsResult fit_rho_reduced_form(const SweepTable& table);

// Wraps the reduced-form fit as a report: supported when all three slopes are
// positive with t above the threshold.
PropositionReport psi_report(const OlsResult& fit, const PropositionThresholds& th);

void write_propositions_csv(std::span<const PropositionReport> reports, std::ostream& out);

// Canonical sweep designs used by the `propositions` subcommand: one swept
// mean per proposition with everything else at the base configuration.
SweepSpec proposition1_spec(const SimConfig& sim, const PopulationConfig& pop,
                            int seeds_per_cell, std::uint64_t base_seed);
SweepSpec proposition2_spec(const SimConfig& sim, const PopulationConfig& pop,
                            int seeds_per_cell, std::uint64_t base_seed);
SweepSpec proposition3_spec(const SimConfig& sim, const PopulationConfig& pop,
                            int seeds_per_cell, std::uint64_t base_seed);
SweepSpec psi_spec(const SimConfig& sim, const PopulationConfig& pop, int seeds_per_cell,
                   std::uint64_t base_seed);

} // namespace afmm
