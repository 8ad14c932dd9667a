#pragma once

// Event-study pipeline: price-panel ingestion, control-portfolio benchmark,
// market-model fits, CAR and abnormal log volume, filing-based exposure
// scores, group tables, and the cross-sectional regression.

#include "afmm/metrics.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace afmm {

struct FirmSeries {
    std::string ticker;
    std::vector<std::string> dates; // ISO-8601, strictly increasing
    std::vector<double> close;      // > 0
    std::vector<double> volume;     // >= 0
};

struct PricePanel {
    std::vector<FirmSeries> firms; // sorted by ticker
    int dropped_rows = 0;          // rows discarded for a missing close

    const FirmSeries* find(const std::string& ticker) const;
};

enum class FirmGroup { Vendor, Financial, Control };
const char* to_string(FirmGroup group);
FirmGroup parse_firm_group(const std::string& text);

struct FirmRecord {
    std::string ticker;
    FirmGroup group = FirmGroup::Control;
    double exposure = 0.0;
};

struct EventSpec {
    std::string id;
    std::string date; // calendar date; day 0 is the next trading day when closed
    std::string label;
};

struct EventWindows {
    std::pair<int, int> estimation{-120, -20};
    std::vector<std::pair<int, int>> event{{0, 1}, {-1, 1}, {-3, 3}};
    std::pair<int, int> headline{-1, 1};
};

// Dated daily simple returns, R_t = close_t/close_{t-1} - 1.
struct ReturnSeries {
    std::vector<std::string> dates;
    std::vector<double> values;

    std::optional<double> at(const std::string& date) const;
};

// prices.csv: date,ticker,adj_close,volume. Rows with an empty close are
// dropped (counted); duplicate (ticker,date) or nonpositive close is an error.
PricePanel load_price_panel(const std::string& path);

ReturnSeries firm_returns(const FirmSeries& firm);

// Equal-weighted mean of control-firm returns over dates where every control
// trades.
ReturnSeries build_benchmark(const PricePanel& panel, const std::vector<FirmRecord>& firms);

struct MarketModelFit {
    std::string ticker;
    double alpha = 0.0;
    double beta = 0.0;
    double residual_std = 0.0;
    int n_estimation = 0;
};

// OLS of firm return on intercept + benchmark over the estimation dates
// (their overlap); requires >= 30 overlapping observations.
MarketModelFit fit_market_model(const std::string& ticker, const ReturnSeries& firm,
                                const ReturnSeries& benchmark,
                                const std::vector<std::string>& estimation_dates);

// CAR = sum over window dates of (R_t - alpha - beta * R_mt); every window
// date must be present for both series.
double compute_car(const MarketModelFit& fit, const ReturnSeries& firm,
                   const ReturnSeries& benchmark, const std::vector<std::string>& window_dates);

// AbVol = sum over event dates of (log(1+V_t) - mean over estimation dates of
// log(1+V)).
double abnormal_log_volume(const FirmSeries& firm,
                           const std::vector<std::string>& estimation_dates,
                           const std::vector<std::string>& event_dates);

struct Keyword {
    std::string phrase;
    double weight = 1.0;
    std::string category;
};

// Lowercased alphanumeric tokens; punctuation and whitespace both separate.
std::vector<std::string> tokenize(const std::string& text);

// Weighted phrase-occurrence score across a firm's documents. Raw counts by
// default; per-10k mode divides each document's counts by tokens/10000.
double score_documents(const std::vector<std::string>& documents,
                       const std::vector<Keyword>& keywords, bool per_10k);

std::vector<Keyword> load_keywords(const std::string& path);

// Scores every {TICKER}_{FORM}_{DATE}.txt under the directory, grouped by
// ticker; files not matching the pattern are counted as skipped.
std::map<std::string, double> score_filings_dir(const std::string& dir,
                                                const std::vector<Keyword>& keywords,
                                                bool per_10k, int& skipped_files);

struct CarRow {
    std::string ticker;
    std::string event_id;
    std::pair<int, int> window{0, 0};
    double car = 0.0;
    double abvol = 0.0;
};

struct GroupTableRow {
    std::string event_id;
    FirmGroup group = FirmGroup::Control;
    int n = 0;
    double mean_car = 0.0;
    double mean_abvol = 0.0;
};

// Rows ordered event-major, groups in vendor/financial/control order; means
// taken over the headline window.
std::vector<GroupTableRow> group_event_table(const std::vector<CarRow>& rows,
                                             const std::vector<FirmRecord>& firms,
                                             const std::vector<EventSpec>& events,
                                             std::pair<int, int> headline_window);

struct CrossSectionResult {
    OlsResult fit; // coefficients: intercept, exposure, vendor, financial
    std::vector<std::string> terms{"intercept", "exposure", "vendor", "financial"};
};

// OLS of headline-window CAR on intercept, exposure score, vendor dummy,
// financial dummy (control omitted). Requires >= 5 firms spanning groups.
CrossSectionResult cross_section_regression(const std::map<std::string, double>& car_by_firm,
                                            const std::vector<FirmRecord>& firms);

struct EventStudyResult {
    std::vector<CarRow> car_rows; // headline window, all (event, firm)
    std::vector<GroupTableRow> group_table;
    std::optional<CrossSectionResult> regression;
    std::string regression_event;
    std::vector<std::string> warnings;
};

std::vector<FirmRecord> load_firms(const std::string& path);
std::vector<EventSpec> load_events(const std::string& path);
// exposure.csv: ticker,score,mode. Firms absent from the file keep score 0.
void apply_exposure_file(const std::string& path, std::vector<FirmRecord>& firms);

// Full pipeline over a loaded panel. regression_event falls back to the first
// event when the requested id is absent.
EventStudyResult run_event_study(const PricePanel& panel, std::vector<FirmRecord> firms,
                                 const std::vector<EventSpec>& events,
                                 const EventWindows& windows,
                                 const std::string& regression_event);

void write_event_table_csv(const std::vector<GroupTableRow>& table, std::ostream& out);
std::vector<GroupTableRow> read_event_table_csv(std::istream& in, const std::string& source_name);
void write_regression_csv(const CrossSectionResult& result, std::ostream& out);
void write_exposure_csv(const std::map<std::string, double>& scores, bool per_10k,
                        std::ostream& out);

} // namespace afmm
