#include "afmm/cli.hpp"
#include "afmm/config.hpp"
#include "afmm/csv.hpp"
#include "afmm/errors.hpp"
#include "afmm/eventstudy.hpp"
#include "afmm/experiments.hpp"
#include "afmm/market.hpp"
#include "afmm/svg_report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace afmm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string iso_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct ManifestWriter {
    std::string subcommand;
    std::string config_digest;
    std::uint64_t base_seed = 0;
    std::string started = iso_timestamp();
    std::vector<std::string> outputs;
    std::vector<std::string> warnings;

    void write(const fs::path& path) {
        json m;
        m["tool_version"] = kToolVersion;
        m["subcommand"] = subcommand;
        m["config_digest"] = config_digest;
        m["base_seed"] = base_seed;
        m["started"] = started;
        m["finished"] = iso_timestamp();
        m["outputs"] = outputs;
        m["warnings"] = warnings;
        std::ofstream out(path);
        if (!out) throw DataError("cannot write manifest: " + path.string());
        out << m.dump(2) << '\n';
    }
};

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write file: " + path.string());
    out << content;
}

std::string read_text_file(const std::string& path, const char* kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(std::string("cannot open ") + kind + ": " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path ensure_out_dir(const std::string& out) {
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw DataError("cannot create output directory: " + out);
    }
    return dir;
}

json metrics_json(const MetricBundle& metrics) {
    json m;
    m["pricing_error_rmse"] = metrics.pricing_error_rmse;
    m["volatility"] = metrics.volatility;
    m["liquidity_level"] = metrics.liquidity_level;
    m["expected_shortfall"] = metrics.expected_shortfall;
    if (metrics.mean_rho) m["mean_rho"] = *metrics.mean_rho;
    else m["mean_rho"] = nullptr;
    return m;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed, bool seed_given,
                 const std::string& out) {
    ToolConfig config = load_config(config_path);
    if (seed_given) config.seed = seed;
    const std::string digest = config_digest(config);
    const fs::path dir = ensure_out_dir(out);

    ManifestWriter manifest;
    manifest.subcommand = "simulate";
    manifest.config_digest = digest;
    manifest.base_seed = config.seed;

    const SimResult result = simulate_run(config.simulation, config.population, config.seed);

    std::ostringstream series;
    write_series_csv(result, series);
    write_text_file(dir / "series.csv", series.str());
    manifest.outputs.push_back("series.csv");

    json run;
    run["seed"] = result.seed;
    run["config_digest"] = digest;
    run["metrics"] = metrics_json(result.metrics);
    run["aggregates"] = {{"a_bar", result.aggregates.a_bar}, {"h_bar", result.aggregates.h_bar},
                         {"c_bar", result.aggregates.c_bar}, {"s_bar", result.aggregates.s_bar},
                         {"v_bar", result.aggregates.v_bar}};
    write_text_file(dir / "run.json", run.dump(2) + "\n");
    manifest.outputs.push_back("run.json");

    manifest.write(dir / "manifest.json");
    return 0;
}

int cmd_sweep(const std::string& config_path, std::uint64_t seed, bool seed_given,
              const std::string& out) {
    ToolConfig config = load_config(config_path);
    if (seed_given) config.base_seed = seed;
    if (config.sweep_parameters.empty()) {
        throw ConfigError("sweep: config has no sweep.parameters");
    }
    SweepSpec spec;
    spec.sim = config.simulation;
    spec.pop = config.population;
    spec.parameters = config.sweep_parameters;
    spec.seeds_per_cell = config.seeds_per_cell;
    spec.base_seed = config.base_seed;

    const fs::path dir = ensure_out_dir(out);
    ManifestWriter manifest;
    manifest.subcommand = "sweep";
    manifest.config_digest = config_digest(config);
    manifest.base_seed = config.base_seed;

    const SweepTable table = run_sweep(spec);
    std::ostringstream csv;
    write_sweep_csv(table, csv);
    write_text_file(dir / "sweep.csv", csv.str());
    manifest.outputs.push_back("sweep.csv");
    manifest.write(dir / "manifest.json");
    return 0;
}

int cmd_propositions(const std::string& config_path, std::uint64_t seed, bool seed_given,
                     const std::string& out) {
    ToolConfig config = load_config(config_path);
    if (seed_given) config.base_seed = seed;
    const fs::path dir = ensure_out_dir(out);

    ManifestWriter manifest;
    manifest.subcommand = "propositions";
    manifest.config_digest = config_digest(config);
    manifest.base_seed = config.base_seed;

    const auto emit_table = [&](const SweepTable& table, const char* name) {
        std::ostringstream csv;
        write_sweep_csv(table, csv);
        write_text_file(dir / name, csv.str());
        manifest.outputs.emplace_back(name);
    };

    const SweepTable t1 = run_sweep(proposition1_spec(config.simulation, config.population,
                                                      config.seeds_per_cell, config.base_seed));
    emit_table(t1, "p1_sweep.csv");
    const SweepTable t2 = run_sweep(proposition2_spec(config.simulation, config.population,
                                                      config.seeds_per_cell, config.base_seed));
    emit_table(t2, "p2_sweep.csv");
    const SweepTable t3 = run_sweep(proposition3_spec(config.simulation, config.population,
                                                      config.seeds_per_cell, config.base_seed));
    emit_table(t3, "p3_sweep.csv");
    const SweepTable tp = run_sweep(psi_spec(config.simulation, config.population,
                                             config.seeds_per_cell, config.base_seed));
    emit_table(tp, "psi_sweep.csv");

    std::vector<PropositionReport> reports;
    reports.push_back(test_proposition1(t1, config.thresholds));
    reports.push_back(test_proposition2(t2, config.thresholds));
    reports.push_back(test_proposition3(t3, config.thresholds));
    reports.push_back(psi_report(fit_rho_reduced_form(tp), config.thresholds));

    std::ostringstream csv;
    write_propositions_csv(reports, csv);
    write_text_file(dir / "propositions.csv", csv.str());
    manifest.outputs.emplace_back("propositions.csv");
    manifest.write(dir / "manifest.json");

    for (const auto& report : reports) {
        std::cout << report.id << ": " << to_string(report.verdict) << '\n';
    }
    return 0;
}

int cmd_score_filings(const std::string& filings_dir, const std::string& keywords_path,
                      const std::string& out, bool per_10k) {
    const auto keywords = load_keywords(keywords_path);
    int skipped = 0;
    const auto scores = score_filings_dir(filings_dir, keywords, per_10k, skipped);

    ManifestWriter manifest;
    manifest.subcommand = "score-filings";
    manifest.config_digest = fnv1a_hex(read_text_file(keywords_path, "keywords file"));
    if (skipped > 0) {
        manifest.warnings.push_back(std::to_string(skipped) +
                                    " file(s) did not match {TICKER}_{FORM}_{DATE}.txt");
    }

    std::ostringstream csv;
    write_exposure_csv(scores, per_10k, csv);
    const fs::path out_path(out);
    if (out_path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out_path.parent_path(), ec);
    }
    write_text_file(out_path, csv.str());
    manifest.outputs.push_back(out_path.filename().string());
    manifest.write(out_path.parent_path() / (out_path.stem().string() + ".manifest.json"));
    return 0;
}

int cmd_event_study(const std::string& prices, const std::string& firms_path,
                    const std::string& events_path, const std::string& exposure_path,
                    const std::string& out, const std::string& regression_event) {
    const PricePanel panel = load_price_panel(prices);
    std::vector<FirmRecord> firms = load_firms(firms_path);
    const std::vector<EventSpec> events = load_events(events_path);
    if (!exposure_path.empty()) apply_exposure_file(exposure_path, firms);

    const fs::path dir = ensure_out_dir(out);
    ManifestWriter manifest;
    manifest.subcommand = "event-study";
    manifest.config_digest = fnv1a_hex(read_text_file(prices, "prices file") +
                                       read_text_file(firms_path, "firms file") +
                                       read_text_file(events_path, "events file"));
    if (panel.dropped_rows > 0) {
        manifest.warnings.push_back(std::to_string(panel.dropped_rows) +
                                    " price row(s) dropped for missing close");
    }

    const EventWindows windows;
    EventStudyResult result = run_event_study(panel, firms, events, windows, regression_event);
    for (auto& warning : result.warnings) manifest.warnings.push_back(std::move(warning));

    std::ostringstream table_csv;
    write_event_table_csv(result.group_table, table_csv);
    write_text_file(dir / "event_table.csv", table_csv.str());
    manifest.outputs.emplace_back("event_table.csv");

    if (result.regression) {
        std::ostringstream reg_csv;
        write_regression_csv(*result.regression, reg_csv);
        write_text_file(dir / "regression.csv", reg_csv.str());
        manifest.outputs.emplace_back("regression.csv");
        manifest.warnings.push_back("regression event: " + result.regression_event +
                                    ", window [" + std::to_string(windows.headline.first) + "," +
                                    std::to_string(windows.headline.second) + "]");
    }
    manifest.write(dir / "manifest.json");
    return 0;
}

int cmd_report(const std::string& in_dir, const std::string& out) {
    const fs::path dir(in_dir);
    std::optional<SweepTable> sweep;
    std::vector<GroupTableRow> event_table;
    if (fs::exists(dir / "sweep.csv")) {
        std::ifstream in(dir / "sweep.csv");
        sweep = read_sweep_csv(in, (dir / "sweep.csv").string());
    }
    if (fs::exists(dir / "event_table.csv")) {
        std::ifstream in(dir / "event_table.csv");
        event_table = read_event_table_csv(in, (dir / "event_table.csv").string());
    }
    if (!sweep && event_table.empty()) {
        throw DataError("report: neither sweep.csv nor event_table.csv found in " + in_dir);
    }

    ManifestWriter manifest;
    manifest.subcommand = "report";
    std::string input_bytes;
    if (sweep) input_bytes += read_text_file((dir / "sweep.csv").string(), "sweep table");
    if (!event_table.empty()) {
        input_bytes += read_text_file((dir / "event_table.csv").string(), "event table");
    }
    manifest.config_digest = fnv1a_hex(input_bytes);

    const std::string svg = render_report_svg(sweep, event_table);
    const fs::path out_path(out);
    if (out_path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(out_path.parent_path(), ec);
    }
    write_text_file(out_path, svg);
    manifest.outputs.push_back(out_path.filename().string());
    manifest.write(out_path.parent_path() / (out_path.stem().string() + ".manifest.json"));
    return 0;
}

} // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Agentic market simulation and event-study toolkit"};
    app.require_subcommand(1);

    std::string config_path, out, prices, firms, events, exposure, filings, keywords, in_dir;
    std::string regression_event = "E3";
    std::uint64_t seed = 0;
    bool per_10k = false;

    auto* sim = app.add_subcommand("simulate", "Run one market simulation");
    sim->add_option("--config", config_path, "Configuration file")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "Override the config seed");
    sim->add_option("--out", out, "Output directory")->required();

    auto* sweep = app.add_subcommand("sweep", "Run the configured parameter sweep");
    sweep->add_option("--config", config_path, "Configuration file")->required();
    auto* sweep_seed = sweep->add_option("--seed", seed, "Override the config base seed");
    sweep->add_option("--out", out, "Output directory")->required();

    auto* props = app.add_subcommand("propositions",
                                     "Run the proposition sweeps and similarity regression");
    props->add_option("--config", config_path, "Configuration file")->required();
    auto* props_seed = props->add_option("--seed", seed, "Override the config base seed");
    props->add_option("--out", out, "Output directory")->required();

    auto* score = app.add_subcommand("score-filings", "Score filings for legacy exposure");
    score->add_option("--filings", filings, "Directory of filing text files")->required();
    score->add_option("--keywords", keywords, "keywords.csv")->required();
    score->add_option("--out", out, "Output exposure.csv path")->required();
    score->add_flag("--per-10k", per_10k, "Normalise counts per 10k tokens");

    auto* study = app.add_subcommand("event-study", "Run the event-study pipeline");
    study->add_option("--prices", prices, "prices.csv")->required();
    study->add_option("--firms", firms, "firms.csv")->required();
    study->add_option("--events", events, "events.csv")->required();
    study->add_option("--exposure", exposure, "exposure.csv");
    study->add_option("--out", out, "Output directory")->required();
    study->add_option("--regression-event", regression_event,
                      "Event id for the cross-sectional regression");

    auto* report = app.add_subcommand("report", "Render an SVG report from emitted tables");
    report->add_option("--in", in_dir, "Directory with sweep.csv / event_table.csv")->required();
    report->add_option("--out", out, "Output SVG path")->required();

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << e.what() << '\n' << app.help();
        return 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, seed, sim_seed->count() > 0, out);
        if (sweep->parsed()) return cmd_sweep(config_path, seed, sweep_seed->count() > 0, out);
        if (props->parsed()) {
            return cmd_propositions(config_path, seed, props_seed->count() > 0, out);
        }
        if (score->parsed()) return cmd_score_filings(filings, keywords, out, per_10k);
        if (study->parsed()) {
            return cmd_event_study(prices, firms, events, exposure, out, regression_event);
        }
        if (report->parsed()) return cmd_report(in_dir, out);
        std::cerr << app.help();
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

} // namespace afmm::cli
