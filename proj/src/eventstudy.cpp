#include "afmm/eventstudy.hpp"
#include "afmm/csv.hpp"
#include "afmm/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace afmm {

const FirmSeries* PricePanel::find(const std::string& ticker) const {
    const auto it = std::lower_bound(firms.begin(), firms.end(), ticker,
                                     [](const FirmSeries& f, const std::string& t) {
                                         return f.ticker < t;
                                     });
    if (it != firms.end() && it->ticker == ticker) return &*it;
    return nullptr;
}

const char* to_string(FirmGroup group) {
    switch (group) {
        case FirmGroup::Vendor: return "vendor";
        case FirmGroup::Financial: return "financial";
        case FirmGroup::Control: return "control";
    }
    return "unknown";
}

FirmGroup parse_firm_group(const std::string& text) {
    if (text == "vendor") return FirmGroup::Vendor;
    if (text == "financial") return FirmGroup::Financial;
    if (text == "control") return FirmGroup::Control;
    throw DataError("unknown firm group '" + text + "' (expected vendor|financial|control)");
}

std::optional<double> ReturnSeries::at(const std::string& date) const {
    const auto it = std::lower_bound(dates.begin(), dates.end(), date);
    if (it != dates.end() && *it == date) {
        return values[static_cast<std::size_t>(it - dates.begin())];
    }
    return std::nullopt;
}

PricePanel load_price_panel(const std::string& path) {
    const CsvTable csv = read_csv_file(path);
    const std::vector<std::string> expected = {"date", "ticker", "adj_close", "volume"};
    if (csv.header != expected) {
        throw DataError(path + ": expected header date,ticker,adj_close,volume");
    }

    struct Row {
        std::string date, ticker;
        double close, volume;
    };
    std::vector<Row> rows;
    rows.reserve(csv.rows.size());
    int dropped = 0;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& fields = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(r + 2);
        if (fields[2].empty()) { // missing close: drop the row
            ++dropped;
            continue;
        }
        Row row;
        row.date = fields[0];
        row.ticker = fields[1];
        row.close = parse_double(fields[2], ctx);
        row.volume = fields[3].empty() ? 0.0 : parse_double(fields[3], ctx);
        if (row.date.empty() || row.ticker.empty()) {
            throw DataError(ctx + ": empty date or ticker");
        }
        if (row.close <= 0.0) throw DataError(ctx + ": nonpositive close for " + row.ticker);
        if (row.volume < 0.0) throw DataError(ctx + ": negative volume for " + row.ticker);
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return a.ticker != b.ticker ? a.ticker < b.ticker : a.date < b.date;
    });

    PricePanel panel;
    panel.dropped_rows = dropped;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (panel.firms.empty() || panel.firms.back().ticker != rows[i].ticker) {
            panel.firms.push_back(FirmSeries{rows[i].ticker, {}, {}, {}});
        }
        FirmSeries& firm = panel.firms.back();
        if (!firm.dates.empty() && firm.dates.back() == rows[i].date) {
            throw DataError(path + ": duplicate (" + rows[i].ticker + ", " + rows[i].date + ")");
        }
        firm.dates.push_back(rows[i].date);
        firm.close.push_back(rows[i].close);
        firm.volume.push_back(rows[i].volume);
    }
    return panel;
}

ReturnSeries firm_returns(const FirmSeries& firm) {
    ReturnSeries series;
    if (firm.dates.size() < 2) return series;
    series.dates.reserve(firm.dates.size() - 1);
    series.values.reserve(firm.dates.size() - 1);
    for (std::size_t i = 1; i < firm.dates.size(); ++i) {
        series.dates.push_back(firm.dates[i]);
        series.values.push_back(firm.close[i] / firm.close[i - 1] - 1.0);
    }
    return series;
}

ReturnSeries build_benchmark(const PricePanel& panel, const std::vector<FirmRecord>& firms) {
    std::vector<ReturnSeries> controls;
    for (const auto& record : firms) {
        if (record.group != FirmGroup::Control) continue;
        const FirmSeries* series = panel.find(record.ticker);
        if (series) controls.push_back(firm_returns(*series));
    }
    if (controls.empty()) {
        throw ContractError("build_benchmark: no control firms with price data");
    }

    // Keep only dates on which every control has a return.
    std::map<std::string, std::pair<double, int>> by_date;
    for (const auto& series : controls) {
        for (std::size_t i = 0; i < series.dates.size(); ++i) {
            auto& slot = by_date[series.dates[i]];
            slot.first += series.values[i];
            slot.second += 1;
        }
    }
    ReturnSeries benchmark;
    const int n = static_cast<int>(controls.size());
    for (const auto& [date, slot] : by_date) {
        if (slot.second == n) {
            benchmark.dates.push_back(date);
            benchmark.values.push_back(slot.first / n);
        }
    }
    return benchmark;
}

MarketModelFit fit_market_model(const std::string& ticker, const ReturnSeries& firm,
                                const ReturnSeries& benchmark,
                                const std::vector<std::string>& estimation_dates) {
    std::vector<double> y, x;
    for (const auto& date : estimation_dates) {
        const auto rf = firm.at(date);
        const auto rm = benchmark.at(date);
        if (rf && rm) {
            y.push_back(*rf);
            x.push_back(*rm);
        }
    }
    if (y.size() < 30) {
        throw DataError("fit_market_model: " + ticker + " has " + std::to_string(y.size()) +
                        " estimation observations (need 30)");
    }
    std::vector<double> ones(y.size(), 1.0);
    const OlsResult fit = ols_fit(y, {ones, x});

    MarketModelFit model;
    model.ticker = ticker;
    model.alpha = fit.coefficients[0];
    model.beta = fit.coefficients[1];
    double ssr = 0.0;
    for (double r : fit.residuals) ssr += r * r;
    model.residual_std = std::sqrt(ssr / static_cast<double>(y.size() - 2));
    model.n_estimation = static_cast<int>(y.size());
    return model;
}

double compute_car(const MarketModelFit& fit, const ReturnSeries& firm,
                   const ReturnSeries& benchmark, const std::vector<std::string>& window_dates) {
    double car = 0.0;
    for (const auto& date : window_dates) {
        const auto rf = firm.at(date);
        if (!rf) throw DataError("compute_car: " + fit.ticker + " missing return on " + date);
        const auto rm = benchmark.at(date);
        if (!rm) throw DataError("compute_car: benchmark missing return on " + date);
        car += *rf - fit.alpha - fit.beta * *rm;
    }
    return car;
}

namespace {

std::optional<double> volume_on(const FirmSeries& firm, const std::string& date) {
    const auto it = std::lower_bound(firm.dates.begin(), firm.dates.end(), date);
    if (it != firm.dates.end() && *it == date) {
        return firm.volume[static_cast<std::size_t>(it - firm.dates.begin())];
    }
    return std::nullopt;
}

} // namespace

double abnormal_log_volume(const FirmSeries& firm,
                           const std::vector<std::string>& estimation_dates,
                           const std::vector<std::string>& event_dates) {
    double mean_log = 0.0;
    int n = 0;
    for (const auto& date : estimation_dates) {
        if (const auto v = volume_on(firm, date)) {
            if (*v < 0.0) throw DataError("abnormal_log_volume: negative volume for " + firm.ticker);
            mean_log += std::log1p(*v);
            ++n;
        }
    }
    if (n == 0 || event_dates.empty()) {
        throw ContractError("abnormal_log_volume: empty estimation or event window");
    }
    mean_log /= n;

    double abvol = 0.0;
    for (const auto& date : event_dates) {
        const auto v = volume_on(firm, date);
        if (!v) throw DataError("abnormal_log_volume: " + firm.ticker + " missing volume on " + date);
        if (*v < 0.0) throw DataError("abnormal_log_volume: negative volume for " + firm.ticker);
        abvol += std::log1p(*v) - mean_log;
    }
    return abvol;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        const auto c = static_cast<unsigned char>(raw);
        if (std::isalnum(c)) {
            current.push_back(static_cast<char>(std::tolower(c)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

double score_documents(const std::vector<std::string>& documents,
                       const std::vector<Keyword>& keywords, bool per_10k) {
    if (keywords.empty()) throw ContractError("score_documents: empty keyword list");
    std::vector<std::vector<std::string>> phrases;
    phrases.reserve(keywords.size());
    for (const auto& keyword : keywords) {
        if (keyword.weight < 0.0) {
            throw ContractError("score_documents: negative weight for '" + keyword.phrase + "'");
        }
        phrases.push_back(tokenize(keyword.phrase));
    }

    double score = 0.0;
    for (const auto& doc : documents) {
        const auto tokens = tokenize(doc);
        if (tokens.empty()) continue;
        for (std::size_t k = 0; k < keywords.size(); ++k) {
            const auto& phrase = phrases[k];
            if (phrase.empty() || phrase.size() > tokens.size()) continue;
            int count = 0;
            for (std::size_t start = 0; start + phrase.size() <= tokens.size(); ++start) {
                bool match = true;
                for (std::size_t p = 0; p < phrase.size(); ++p) {
                    if (tokens[start + p] != phrase[p]) {
                        match = false;
                        break;
                    }
                }
                if (match) ++count;
            }
            double contribution = keywords[k].weight * count;
            if (per_10k) {
                contribution /= static_cast<double>(tokens.size()) / 10000.0;
            }
            score += contribution;
        }
    }
    return score;
}

std::vector<Keyword> load_keywords(const std::string& path) {
    const CsvTable csv = read_csv_file(path);
    const std::vector<std::string> expected = {"phrase", "weight", "category"};
    if (csv.header != expected) {
        throw DataError(path + ": expected header phrase,weight,category");
    }
    std::vector<Keyword> keywords;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string ctx = path + ":" + std::to_string(r + 2);
        Keyword k;
        k.phrase = csv.rows[r][0];
        k.weight = parse_double(csv.rows[r][1], ctx);
        k.category = csv.rows[r][2];
        if (k.phrase.empty()) throw DataError(ctx + ": empty phrase");
        if (k.weight < 0.0) throw DataError(ctx + ": negative weight");
        keywords.push_back(std::move(k));
    }
    if (keywords.empty()) throw DataError(path + ": no keywords");
    return keywords;
}

std::map<std::string, double> score_filings_dir(const std::string& dir,
                                                const std::vector<Keyword>& keywords,
                                                bool per_10k, int& skipped_files) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);

    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file()) paths.push_back(entry.path());
    }
    std::sort(paths.begin(), paths.end());

    skipped_files = 0;
    std::map<std::string, std::vector<std::string>> docs_by_ticker;
    for (const auto& path : paths) {
        const std::string name = path.filename().string();
        // Expected pattern: {TICKER}_{FORM}_{YYYY-MM-DD}.txt
        const auto first = name.find('_');
        const auto last = name.rfind('_');
        if (path.extension() != ".txt" || first == std::string::npos || first == 0 ||
            last == first) {
            ++skipped_files;
            continue;
        }
        std::ifstream in(path);
        if (!in) throw DataError("cannot open filing: " + path.string());
        std::ostringstream buf;
        buf << in.rdbuf();
        docs_by_ticker[name.substr(0, first)].push_back(buf.str());
    }

    std::map<std::string, double> scores;
    for (const auto& [ticker, docs] : docs_by_ticker) {
        scores[ticker] = score_documents(docs, keywords, per_10k);
    }
    return scores;
}

std::vector<GroupTableRow> group_event_table(const std::vector<CarRow>& rows,
                                             const std::vector<FirmRecord>& firms,
                                             const std::vector<EventSpec>& events,
                                             std::pair<int, int> headline_window) {
    std::map<std::string, FirmGroup> group_of;
    for (const auto& firm : firms) group_of[firm.ticker] = firm.group;

    std::vector<GroupTableRow> table;
    for (const auto& event : events) {
        for (const FirmGroup group : {FirmGroup::Vendor, FirmGroup::Financial, FirmGroup::Control}) {
            GroupTableRow out;
            out.event_id = event.id;
            out.group = group;
            double car_sum = 0.0, abvol_sum = 0.0;
            for (const auto& row : rows) {
                if (row.event_id != event.id || row.window != headline_window) continue;
                const auto it = group_of.find(row.ticker);
                if (it == group_of.end()) {
                    throw DataError("group_event_table: unknown ticker " + row.ticker);
                }
                if (it->second != group) continue;
                ++out.n;
                car_sum += row.car;
                abvol_sum += row.abvol;
            }
            out.mean_car = out.n > 0 ? car_sum / out.n : std::nan("");
            out.mean_abvol = out.n > 0 ? abvol_sum / out.n : std::nan("");
            table.push_back(std::move(out));
        }
    }
    return table;
}

CrossSectionResult cross_section_regression(const std::map<std::string, double>& car_by_firm,
                                            const std::vector<FirmRecord>& firms) {
    std::vector<double> y, ones, exposure, vendor, financial;
    for (const auto& firm : firms) {
        const auto it = car_by_firm.find(firm.ticker);
        if (it == car_by_firm.end()) continue;
        y.push_back(it->second);
        ones.push_back(1.0);
        exposure.push_back(firm.exposure);
        vendor.push_back(firm.group == FirmGroup::Vendor ? 1.0 : 0.0);
        financial.push_back(firm.group == FirmGroup::Financial ? 1.0 : 0.0);
    }
    if (y.size() < 5) {
        throw DataError("cross_section_regression: need at least 5 firms with a CAR, got " +
                        std::to_string(y.size()));
    }
    CrossSectionResult result;
    result.fit = ols_fit(y, {ones, exposure, vendor, financial});
    return result;
}

std::vector<FirmRecord> load_firms(const std::string& path) {
    const CsvTable csv = read_csv_file(path);
    const std::vector<std::string> expected = {"ticker", "group"};
    if (csv.header != expected) throw DataError(path + ": expected header ticker,group");
    std::vector<FirmRecord> firms;
    std::set<std::string> seen;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        FirmRecord firm;
        firm.ticker = csv.rows[r][0];
        firm.group = parse_firm_group(csv.rows[r][1]);
        if (firm.ticker.empty()) {
            throw DataError(path + ":" + std::to_string(r + 2) + ": empty ticker");
        }
        if (!seen.insert(firm.ticker).second) {
            throw DataError(path + ": duplicate ticker " + firm.ticker);
        }
        firms.push_back(std::move(firm));
    }
    if (firms.empty()) throw DataError(path + ": no firms");
    return firms;
}

std::vector<EventSpec> load_events(const std::string& path) {
    const CsvTable csv = read_csv_file(path);
    const std::vector<std::string> expected = {"event_id", "date", "label"};
    if (csv.header != expected) throw DataError(path + ": expected header event_id,date,label");
    std::vector<EventSpec> events;
    for (const auto& row : csv.rows) {
        if (row[0].empty() || row[1].empty()) {
            throw DataError(path + ": event rows need id and date");
        }
        events.push_back({row[0], row[1], row[2]});
    }
    if (events.empty()) throw DataError(path + ": no events");
    return events;
}

void apply_exposure_file(const std::string& path, std::vector<FirmRecord>& firms) {
    const CsvTable csv = read_csv_file(path);
    const std::vector<std::string> expected = {"ticker", "score", "mode"};
    if (csv.header != expected) throw DataError(path + ": expected header ticker,score,mode");
    std::map<std::string, double> scores;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string ctx = path + ":" + std::to_string(r + 2);
        const double score = parse_double(csv.rows[r][1], ctx);
        if (score < 0.0) throw DataError(ctx + ": negative exposure score");
        scores[csv.rows[r][0]] = score;
    }
    for (auto& firm : firms) {
        const auto it = scores.find(firm.ticker);
        if (it != scores.end()) firm.exposure = it->second;
    }
}

namespace {

// Trading-day window on the benchmark calendar: indices day0+from .. day0+to.
std::vector<std::string> window_dates(const std::vector<std::string>& calendar, int day0,
                                      int from, int to, bool clip_start) {
    std::vector<std::string> dates;
    for (int offset = from; offset <= to; ++offset) {
        const int idx = day0 + offset;
        if (idx < 0) {
            if (clip_start) continue;
            throw DataError("window extends before the first trading day");
        }
        if (idx >= static_cast<int>(calendar.size())) {
            if (clip_start) continue; // estimation truncated by data availability
            throw DataError("window extends past the last trading day");
        }
        dates.push_back(calendar[static_cast<std::size_t>(idx)]);
    }
    return dates;
}

} // namespace

EventStudyResult run_event_study(const PricePanel& panel, std::vector<FirmRecord> firms,
                                 const std::vector<EventSpec>& events,
                                 const EventWindows& windows,
                                 const std::string& regression_event) {
    EventStudyResult result;
    const ReturnSeries benchmark = build_benchmark(panel, firms);
    if (benchmark.dates.size() < 2) {
        throw DataError("run_event_study: benchmark has fewer than 2 trading days");
    }

    std::map<std::string, ReturnSeries> returns;
    for (const auto& firm : firms) {
        const FirmSeries* series = panel.find(firm.ticker);
        if (!series) {
            result.warnings.push_back("no price data for " + firm.ticker + "; firm skipped");
            continue;
        }
        returns[firm.ticker] = firm_returns(*series);
    }

    std::map<std::string, std::map<std::string, double>> headline_car_by_event;
    for (const auto& event : events) {
        const auto it = std::lower_bound(benchmark.dates.begin(), benchmark.dates.end(), event.date);
        if (it == benchmark.dates.end()) {
            throw DataError("event " + event.id + ": no trading day on or after " + event.date);
        }
        const int day0 = static_cast<int>(it - benchmark.dates.begin());
        const auto estimation_dates =
            window_dates(benchmark.dates, day0, windows.estimation.first,
                         windows.estimation.second, true);
        if (estimation_dates.empty()) {
            throw DataError("event " + event.id + ": empty estimation window");
        }

        for (const auto& firm : firms) {
            const auto rit = returns.find(firm.ticker);
            if (rit == returns.end()) continue;
            int overlap = 0;
            for (const auto& date : estimation_dates) {
                if (rit->second.at(date)) ++overlap;
            }
            if (overlap < 30) {
                result.warnings.push_back("event " + event.id + ": " + firm.ticker + " has " +
                                          std::to_string(overlap) +
                                          " estimation observations; firm dropped");
                continue;
            }
            const MarketModelFit fit =
                fit_market_model(firm.ticker, rit->second, benchmark, estimation_dates);
            const FirmSeries* series = panel.find(firm.ticker);
            for (const auto& window : windows.event) {
                const auto event_dates =
                    window_dates(benchmark.dates, day0, window.first, window.second, false);
                CarRow row;
                row.ticker = firm.ticker;
                row.event_id = event.id;
                row.window = window;
                row.car = compute_car(fit, rit->second, benchmark, event_dates);
                row.abvol = abnormal_log_volume(*series, estimation_dates, event_dates);
                if (window == windows.headline) {
                    headline_car_by_event[event.id][firm.ticker] = row.car;
                }
                result.car_rows.push_back(std::move(row));
            }
        }
    }

    result.group_table = group_event_table(result.car_rows, firms, events, windows.headline);

    std::string chosen = regression_event;
    if (headline_car_by_event.find(chosen) == headline_car_by_event.end()) {
        chosen = events.front().id;
    }
    result.regression_event = chosen;
    const auto cars = headline_car_by_event.find(chosen);
    if (cars != headline_car_by_event.end()) {
        if (cars->second.size() >= 5) {
            result.regression = cross_section_regression(cars->second, firms);
        } else {
            result.warnings.push_back("cross-sectional regression skipped: only " +
                                      std::to_string(cars->second.size()) +
                                      " firms with a CAR (need 5)");
        }
    }
    return result;
}

void write_event_table_csv(const std::vector<GroupTableRow>& table, std::ostream& out) {
    write_csv_row(out, {"event_id", "group", "n", "mean_car", "mean_abvol"});
    for (const auto& row : table) {
        write_csv_row(out, {row.event_id, to_string(row.group), std::to_string(row.n),
                            format_double(row.mean_car), format_double(row.mean_abvol)});
    }
}

std::vector<GroupTableRow> read_event_table_csv(std::istream& in, const std::string& source_name) {
    const CsvTable csv = read_csv(in, source_name);
    const std::vector<std::string> expected = {"event_id", "group", "n", "mean_car", "mean_abvol"};
    if (csv.header != expected) {
        throw DataError(source_name + ": expected header event_id,group,n,mean_car,mean_abvol");
    }
    std::vector<GroupTableRow> table;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const std::string ctx = source_name + ":" + std::to_string(r + 2);
        GroupTableRow row;
        row.event_id = csv.rows[r][0];
        row.group = parse_firm_group(csv.rows[r][1]);
        row.n = static_cast<int>(parse_long(csv.rows[r][2], ctx));
        row.mean_car = parse_double(csv.rows[r][3], ctx);
        row.mean_abvol = parse_double(csv.rows[r][4], ctx);
        table.push_back(std::move(row));
    }
    return table;
}

void write_regression_csv(const CrossSectionResult& result, std::ostream& out) {
    write_csv_row(out, {"term", "coefficient", "t_stat"});
    // Intercept is estimated but not part of the reported schema.
    for (std::size_t j = 1; j < result.terms.size(); ++j) {
        write_csv_row(out, {result.terms[j], format_double(result.fit.coefficients[j]),
                            format_double(result.fit.t_stats[j])});
    }
    write_csv_row(out, {"r_squared", format_double(result.fit.r_squared), ""});
    write_csv_row(out, {"n", std::to_string(result.fit.n_obs), ""});
}

void write_exposure_csv(const std::map<std::string, double>& scores, bool per_10k,
                        std::ostream& out) {
    write_csv_row(out, {"ticker", "score", "mode"});
    for (const auto& [ticker, score] : scores) {
        write_csv_row(out, {ticker, format_double(score), per_10k ? "per10k" : "raw"});
    }
}

} // namespace afmm
