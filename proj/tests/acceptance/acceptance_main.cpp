// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails. Expects the repository root as argv[1] (for the default
// configuration and the golden files).

#include "afmm/cli.hpp"
#include "afmm/config.hpp"
#include "afmm/errors.hpp"
#include "afmm/eventstudy.hpp"
#include "afmm/experiments.hpp"
#include "afmm/market.hpp"
#include "afmm/metrics.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace afmm;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%2d] %s  %s\n", criterion, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct Paths {
    fs::path repo;
    fs::path work;
    std::string config;
};

// ---------------------------------------------------------------------------
// 1. Determinism and runtime of the simulate subcommand.
void criterion_determinism(const Paths& paths) {
    const auto start = std::chrono::steady_clock::now();
    const int rc1 = cli::dispatch({"simulate", "--config", paths.config, "--seed", "7",
                                   "--out", (paths.work / "det1").string()});
    const double elapsed = seconds_since(start);
    const int rc2 = cli::dispatch({"simulate", "--config", paths.config, "--seed", "7",
                                   "--out", (paths.work / "det2").string()});

    bool pass = rc1 == 0 && rc2 == 0;
    std::string detail;
    if (pass) {
        const std::string series1 = read_file(paths.work / "det1" / "series.csv");
        const std::string series2 = read_file(paths.work / "det2" / "series.csv");
        const auto manifest1 = nlohmann::json::parse(read_file(paths.work / "det1" / "manifest.json"));
        const auto manifest2 = nlohmann::json::parse(read_file(paths.work / "det2" / "manifest.json"));
        const bool bytes_equal = series1 == series2;
        const bool digest_equal =
            manifest1.at("config_digest") == manifest2.at("config_digest");
        pass = bytes_equal && digest_equal && elapsed < 5.0;
        std::ostringstream out;
        out << "determinism: series byte-identical=" << (bytes_equal ? "yes" : "no")
            << ", manifest digest identical=" << (digest_equal ? "yes" : "no") << ", runtime "
            << elapsed << "s (< 5s)";
        detail = out.str();
    } else {
        detail = "simulate exited nonzero";
    }
    report(1, pass, detail);
}

// ---------------------------------------------------------------------------
// 2-3. Propositions 1 and 2 on their acceptance grids.
void criterion_p1(const ToolConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const SweepTable table =
        run_sweep(proposition1_spec(config.simulation, config.population, 20, config.base_seed));
    const PropositionReport rep = test_proposition1(table, config.thresholds);
    const double elapsed = seconds_since(start);
    const bool pass = rep.verdict == Verdict::Supported && elapsed < 120.0;
    std::ostringstream out;
    out << "P1 heterogeneity vs pricing error: spearman=" << rep.statistics[0].value
        << " (need <= -0.8), verdict=" << to_string(rep.verdict) << ", runtime " << elapsed
        << "s (< 120s)";
    report(2, pass, out.str());
}

void criterion_p2(const ToolConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const SweepTable table =
        run_sweep(proposition2_spec(config.simulation, config.population, 20, config.base_seed));
    const PropositionReport rep = test_proposition2(table, config.thresholds);
    const double elapsed = seconds_since(start);
    const bool pass = rep.verdict == Verdict::Supported && elapsed < 120.0;
    std::ostringstream out;
    out << "P2 coupling vs volatility/similarity/liquidity: spearman=("
        << rep.statistics[0].value << ", " << rep.statistics[1].value << ", "
        << rep.statistics[2].value << ") (need >= 0.8, >= 0.8, <= -0.3), verdict="
        << to_string(rep.verdict) << ", runtime " << elapsed << "s (< 120s)";
    report(3, pass, out.str());
}

// ---------------------------------------------------------------------------
// 4. Proposition 3 supermodularity and oversight damping.
void criterion_p3(const ToolConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const SweepTable table =
        run_sweep(proposition3_spec(config.simulation, config.population, 20, config.base_seed));
    const PropositionReport rep = test_proposition3(table, config.thresholds);
    const double elapsed = seconds_since(start);
    const double gap = rep.statistics[0].value;
    const double hh_lo = rep.statistics[1].value;
    const double hh_hi = rep.statistics[2].value;
    const bool pass = gap > 0.0 && hh_hi < hh_lo && elapsed < 180.0;
    std::ostringstream out;
    out << "P3 supermodularity: gap(S=0.1)=" << gap << " (> 0), shortfall(hi,hi) " << hh_hi
        << " @S=0.9 < " << hh_lo << " @S=0.1: " << (hh_hi < hh_lo ? "yes" : "no")
        << ", runtime " << elapsed << "s (< 180s)";
    report(4, pass, out.str());
}

// ---------------------------------------------------------------------------
// 5. Reduced-form similarity regression.
void criterion_psi(const ToolConfig& config) {
    const SweepTable table =
        run_sweep(psi_spec(config.simulation, config.population, 20, config.base_seed));
    const OlsResult fit = fit_rho_reduced_form(table);
    bool pass = true;
    std::ostringstream out;
    out << "similarity reduced form: ";
    const char* names[] = {"C", "1-H", "V"};
    for (int j = 0; j < 3; ++j) {
        const double coef = fit.coefficients[static_cast<std::size_t>(j + 1)];
        const double t = fit.t_stats[static_cast<std::size_t>(j + 1)];
        if (!(coef > 0.0 && t > 2.0)) pass = false;
        out << names[j] << ": slope=" << coef << " t=" << t << (j < 2 ? ", " : "");
    }
    out << " (all slopes > 0 with t > 2)";
    report(5, pass, out.str());
}

// ---------------------------------------------------------------------------
// 6. Invariant suite.
void criterion_invariants(const ToolConfig& config) {
    bool pass = true;
    std::ostringstream notes;

    // Position limits under a stressed configuration.
    {
        PopulationConfig pop_config = config.population;
        pop_config.n_agents = 40;
        pop_config.position_limit = 3.0;
        pop_config.autonomy = {0.7, 0.3};
        SimConfig sim = config.simulation;
        sim.horizon = 600;
        sim.burn_in = 0;
        sim.outage_prob = 0.01;
        sim.stress_threshold = 0.05;
        AgentPopulation pop = build_population(pop_config, 51);
        SimState state = init_sim(sim, std::move(pop), 52);
        for (int t = 0; t < sim.horizon && pass; ++t) {
            step(state);
            for (std::size_t i = 0; i < state.positions.size(); ++i) {
                if (std::abs(state.positions[i]) >
                    state.population.agents[i].position_limit + 1e-12) {
                    pass = false;
                    notes << "position limit breached; ";
                    break;
                }
            }
        }
    }

    // Zero-autonomy null market.
    {
        PopulationConfig pop_config = config.population;
        pop_config.autonomy = {0.0, 0.0};
        SimConfig sim = config.simulation;
        sim.horizon = 400;
        sim.burn_in = 0;
        const SimResult result = simulate_run(sim, pop_config, 7);
        for (const auto& record : result.records) {
            if (record.price != sim.p0 || record.flow != 0.0) {
                pass = false;
                notes << "null market moved the price; ";
                break;
            }
        }
    }

    // Belief-error variance invariant in H over 1e5 draws.
    {
        const double sigma_m = 0.6;
        double variances[3];
        const double levels[3] = {0.0, 0.5, 1.0};
        for (int k = 0; k < 3; ++k) {
            Rng rng(600 + static_cast<std::uint64_t>(k));
            AgentSpec agent;
            agent.heterogeneity = levels[k];
            double sum = 0.0, sum_sq = 0.0;
            const int n = 100000;
            for (int i = 0; i < n; ++i) {
                EnvSnapshot env;
                env.v = 0.0;
                env.m = sigma_m * rng.normal();
                const double err = form_belief(agent, env, sigma_m, rng.normal());
                sum += err;
                sum_sq += err * err;
            }
            variances[k] = sum_sq / n - (sum / n) * (sum / n);
        }
        for (int k = 1; k < 3; ++k) {
            if (std::abs(variances[k] - variances[0]) / variances[0] >= 0.05) {
                pass = false;
                notes << "belief variance drifts with H; ";
            }
        }
    }

    // Similarity bounds on a live run.
    {
        const SimResult result = simulate_run(config.simulation, config.population, 7);
        const std::size_t n_agents = result.records.front().trades.size();
        std::vector<std::vector<double>> actions(n_agents,
                                                 std::vector<double>(result.records.size()));
        for (std::size_t t = 0; t < result.records.size(); ++t) {
            for (std::size_t i = 0; i < n_agents; ++i) {
                actions[i][t] = result.records[t].trades[i];
            }
        }
        const auto pairs = sample_rho_pairs(static_cast<int>(n_agents), 100, 3);
        for (const auto& point :
             action_similarity(actions, config.simulation.rho_window, pairs)) {
            if (point.rho < -1.0 || point.rho > 1.0) {
                pass = false;
                notes << "similarity out of [-1,1]; ";
                break;
            }
        }
    }

    // CAR additivity (exact), estimation-window mean AR, OLS orthogonality.
    {
        Rng rng(61);
        std::vector<double> factor(120), ones;
        for (auto& f : factor) f = 0.004 * rng.normal();
        std::vector<double> firm(factor.size());
        for (std::size_t i = 0; i < factor.size(); ++i) {
            firm[i] = 0.0004 + 1.3 * factor[i] + 0.002 * rng.normal();
        }
        ones.assign(factor.size(), 1.0);
        const OlsResult fit = ols_fit(firm, {ones, factor});

        double mean_ar = 0.0;
        for (std::size_t i = 0; i < firm.size(); ++i) {
            mean_ar += firm[i] - fit.coefficients[0] - fit.coefficients[1] * factor[i];
        }
        mean_ar /= static_cast<double>(firm.size());
        if (std::abs(mean_ar) > 1e-10) {
            pass = false;
            notes << "estimation-window mean abnormal return nonzero; ";
        }
        for (const auto& col : {ones, factor}) {
            double dot = 0.0;
            for (std::size_t i = 0; i < firm.size(); ++i) dot += col[i] * fit.residuals[i];
            if (std::abs(dot) > 1e-8 * static_cast<double>(firm.size())) {
                pass = false;
                notes << "OLS residuals not orthogonal; ";
            }
        }

        MarketModelFit model;
        model.ticker = "X";
        model.alpha = fit.coefficients[0];
        model.beta = fit.coefficients[1];
        ReturnSeries firm_series, bench_series;
        char date[20];
        for (std::size_t i = 0; i < firm.size(); ++i) {
            std::snprintf(date, sizeof(date), "2026-%02d-%02d",
                          1 + static_cast<int>(i) / 28, 1 + static_cast<int>(i) % 28);
            firm_series.dates.emplace_back(date);
            firm_series.values.push_back(firm[i]);
            bench_series.dates.emplace_back(date);
            bench_series.values.push_back(factor[i]);
        }
        const std::vector<std::string> whole(firm_series.dates.begin() + 20,
                                             firm_series.dates.begin() + 30);
        const std::vector<std::string> left(firm_series.dates.begin() + 20,
                                            firm_series.dates.begin() + 26);
        const std::vector<std::string> right(firm_series.dates.begin() + 26,
                                             firm_series.dates.begin() + 30);
        const double whole_car = compute_car(model, firm_series, bench_series, whole);
        const double split_car = compute_car(model, firm_series, bench_series, left) +
                                 compute_car(model, firm_series, bench_series, right);
        if (whole_car != split_car) {
            pass = false;
            notes << "CAR additivity violated; ";
        }
    }

    report(6, pass, pass ? "invariant suite: position limits, null market, belief variance, "
                           "similarity bounds, CAR additivity, mean AR, OLS orthogonality"
                         : "invariant suite: " + notes.str());
}

// ---------------------------------------------------------------------------
// 7. Hand OLS oracle.
void criterion_hand_ols() {
    const std::vector<double> x = {0, 1, 2};
    const std::vector<double> y = {0, 1, 3};
    const std::vector<double> ones = {1, 1, 1};
    const OlsResult fit = ols_fit(y, {ones, x});
    const double slope_err = std::abs(fit.coefficients[1] - 1.5);
    const double intercept_err = std::abs(fit.coefficients[0] + 1.0 / 6.0);
    const double r2_err = std::abs(fit.r_squared - 27.0 / 28.0);
    const double t_err = std::abs(fit.t_stats[1] - std::sqrt(27.0));
    const bool pass =
        slope_err < 1e-9 && intercept_err < 1e-9 && r2_err < 1e-9 && t_err < 1e-9;
    std::ostringstream out;
    out << "hand OLS oracle: slope err " << slope_err << ", intercept err " << intercept_err
        << ", R^2 err " << r2_err << ", t err " << t_err << " (each < 1e-9)";
    report(7, pass, out.str());
}

// ---------------------------------------------------------------------------
// 8. Event-study recovery on synthetic panels.
struct RecoveryPanel {
    PricePanel panel;
    std::vector<FirmRecord> firms;
    std::vector<std::string> dates;
};

RecoveryPanel build_recovery_panel(double noise_std, std::uint64_t seed, double vendor_effect,
                                   int event_day, int n_days) {
    RecoveryPanel out;
    Rng rng(seed);
    out.dates.reserve(static_cast<std::size_t>(n_days));
    for (int i = 0; i < n_days; ++i) {
        char date[20];
        std::snprintf(date, sizeof(date), "2026-%02d-%02d", 1 + i / 28, 1 + i % 28);
        out.dates.emplace_back(date);
    }
    std::vector<double> factor(static_cast<std::size_t>(n_days), 0.0);
    for (std::size_t i = 1; i < factor.size(); ++i) factor[i] = 0.005 * rng.normal();

    const auto add_firm = [&](const std::string& ticker, FirmGroup group, double alpha,
                              double beta, double effect) {
        FirmSeries firm;
        firm.ticker = ticker;
        double price = 40.0;
        for (int i = 0; i < n_days; ++i) {
            double ret = alpha + beta * factor[static_cast<std::size_t>(i)];
            if (i == event_day) ret += effect;
            if (noise_std > 0.0) ret += noise_std * rng.normal();
            if (i > 0) price *= 1.0 + ret;
            firm.dates.push_back(out.dates[static_cast<std::size_t>(i)]);
            firm.close.push_back(price);
            double volume = 1000.0 + 40.0 * ((i * 13 + firm.ticker.back()) % 11);
            if (i == event_day || i == event_day + 1) volume *= 2.5;
            firm.volume.push_back(volume);
        }
        out.panel.firms.push_back(std::move(firm));
        FirmRecord record;
        record.ticker = ticker;
        record.group = group;
        record.exposure = rng.uniform(0.0, 4.0);
        out.firms.push_back(record);
    };

    for (int i = 0; i < 7; ++i) {
        add_firm("CT" + std::to_string(i), FirmGroup::Control, 0.0, 1.0, 0.0);
    }
    for (int i = 0; i < 8; ++i) {
        add_firm("VN" + std::to_string(i), FirmGroup::Vendor, 0.0002 * i, 0.8 + 0.1 * i,
                 vendor_effect);
    }
    for (int i = 0; i < 15; ++i) {
        add_firm("FN" + std::to_string(i), FirmGroup::Financial, 0.0001 * i, 0.7 + 0.05 * i, 0.0);
    }
    std::sort(out.panel.firms.begin(), out.panel.firms.end(),
              [](const FirmSeries& a, const FirmSeries& b) { return a.ticker < b.ticker; });
    return out;
}

void criterion_recovery() {
    const auto start = std::chrono::steady_clock::now();
    const double effect = -0.05;
    const int event_day = 160;
    bool pass = true;
    std::ostringstream out;

    // Noise-free: every firm's CAR matches its planted effect to 1e-9.
    {
        const RecoveryPanel fixture = build_recovery_panel(0.0, 1234, effect, event_day, 200);
        const std::vector<EventSpec> events = {
            {"E3", fixture.dates[static_cast<std::size_t>(event_day)], "planted"}};
        const EventWindows windows;
        const EventStudyResult result =
            run_event_study(fixture.panel, fixture.firms, events, windows, "E3");
        double max_err = 0.0;
        std::map<std::string, FirmGroup> group_of;
        for (const auto& firm : fixture.firms) group_of[firm.ticker] = firm.group;
        for (const auto& row : result.car_rows) {
            if (row.window != windows.headline) continue;
            const double planted = group_of[row.ticker] == FirmGroup::Vendor ? effect : 0.0;
            max_err = std::max(max_err, std::abs(row.car - planted));
        }
        if (max_err >= 1e-9) pass = false;
        out << "noise-free max |CAR - planted| = " << max_err << " (< 1e-9)";
    }

    // Noisy replications: vendor coefficient within 2 SE of the planted effect
    // in at least 90 of 100 seeded replications.
    {
        int covered = 0;
        for (int rep = 0; rep < 100; ++rep) {
            const RecoveryPanel fixture = build_recovery_panel(
                0.01, 5000 + static_cast<std::uint64_t>(rep), effect, event_day, 200);
            const std::vector<EventSpec> events = {
                {"E3", fixture.dates[static_cast<std::size_t>(event_day)], "planted"}};
            const EventWindows windows;
            const EventStudyResult result =
                run_event_study(fixture.panel, fixture.firms, events, windows, "E3");
            if (!result.regression) continue;
            const double coef = result.regression->fit.coefficients[2];
            const double se = result.regression->fit.standard_errors[2];
            if (std::abs(coef - effect) <= 2.0 * se) ++covered;
        }
        const double elapsed = seconds_since(start);
        if (covered < 90 || elapsed >= 30.0) pass = false;
        out << "; noisy coverage " << covered << "/100 (>= 90), runtime " << elapsed
            << "s (< 30s)";
    }
    report(8, pass, out.str());
}

// ---------------------------------------------------------------------------
// 9. Schema fidelity against golden files.
void criterion_schema(const Paths& paths, bool write_golden) {
    // Three-event deterministic fixture covering the full table layout.
    const RecoveryPanel fixture = build_recovery_panel(0.01, 99, -0.05, 150, 200);
    const std::vector<EventSpec> events = {{"E1", fixture.dates[130], "service delivery"},
                                           {"E3", fixture.dates[150], "market validation"},
                                           {"E4", fixture.dates[170], "labour market"}};
    const EventWindows windows;
    const EventStudyResult result =
        run_event_study(fixture.panel, fixture.firms, events, windows, "E3");

    std::ostringstream event_table, regression;
    write_event_table_csv(result.group_table, event_table);
    write_regression_csv(*result.regression, regression);

    const fs::path golden_dir = paths.repo / "tests" / "golden";
    if (write_golden) {
        fs::create_directories(golden_dir);
        std::ofstream(golden_dir / "event_table.csv") << event_table.str();
        std::ofstream(golden_dir / "regression.csv") << regression.str();
        report(9, true, "golden files regenerated");
        return;
    }

    const std::string golden_table = read_file(golden_dir / "event_table.csv");
    const std::string golden_regression = read_file(golden_dir / "regression.csv");

    const bool table_ok = event_table.str() == golden_table;
    const bool regression_ok = regression.str() == golden_regression;
    const bool pass = table_ok && regression_ok;
    std::ostringstream out;
    out << "schema fidelity vs golden files: event_table "
        << (table_ok ? "match" : "MISMATCH") << ", regression "
        << (regression_ok ? "match" : "MISMATCH")
        << " (reference magnitudes -0.0639 vendor CAR, t -1.95, R^2 0.1651, N 31 are "
           "illustrative targets, not asserted)";
    report(9, pass, out.str());
}

// ---------------------------------------------------------------------------
// 10. Exposure scorer hand fixtures.
void criterion_scorer() {
    const std::vector<Keyword> weighted = {{"cobol", 1.0, "legacy"}, {"mainframe", 2.0, "legacy"}};
    const double two_keyword = score_documents({"COBOL cobol mainframe"}, weighted, false);

    const std::vector<Keyword> phrase = {{"technical debt", 1.0, "modernization"}};
    const double phrase_count = score_documents({"technical debt is technical"}, phrase, false);

    const bool pass = two_keyword == 4.0 && phrase_count == 1.0;
    std::ostringstream out;
    out << "exposure scorer: weighted fixture = " << two_keyword << " (= 4), phrase fixture = "
        << phrase_count << " (= 1)";
    report(10, pass, out.str());
}

} // namespace

int main(int argc, char** argv) {
    Paths paths;
    paths.repo = argc > 1 ? fs::path(argv[1]) : fs::current_path();
    paths.work = fs::temp_directory_path() / "afmm_acceptance";
    std::error_code ec;
    fs::remove_all(paths.work, ec);
    fs::create_directories(paths.work);
    paths.config = (paths.repo / "configs" / "default.json").string();
    const bool write_golden = argc > 2 && std::string(argv[2]) == "--write-golden";

    if (write_golden) {
        criterion_schema(paths, true);
        return 0;
    }

    try {
        const ToolConfig config = load_config(paths.config);
        criterion_determinism(paths);
        criterion_p1(config);
        criterion_p2(config);
        criterion_p3(config);
        criterion_psi(config);
        criterion_invariants(config);
        criterion_hand_ols();
        criterion_recovery();
        criterion_schema(paths, false);
        criterion_scorer();
    } catch (const std::exception& e) {
        std::printf("acceptance suite aborted: %s\n", e.what());
        return 1;
    }

    std::printf("%s (%d criteria failed)\n",
                g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED", g_failures);
    return g_failures == 0 ? 0 : 1;
}
