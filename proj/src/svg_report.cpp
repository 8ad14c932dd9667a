#include "afmm/svg_report.hpp"
#include "afmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace afmm {

namespace {

constexpr double kChartWidth = 640.0;
constexpr double kChartHeight = 240.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 34.0;
constexpr double kMarginBottom = 40.0;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c; break;
        }
    }
    return out;
}

struct Scale {
    double lo = 0.0, hi = 1.0, px_lo = 0.0, px_hi = 1.0;
    double operator()(double v) const {
        if (hi == lo) return 0.5 * (px_lo + px_hi);
        return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
    }
};

void axes(std::ostringstream& svg, double y_offset, const std::string& title,
          const Scale& x, const Scale& y) {
    svg << "<text x=\"" << num(kMarginLeft) << "\" y=\"" << num(y_offset + 18)
        << "\" font-size=\"13\" font-family=\"sans-serif\">" << xml_escape(title) << "</text>\n";
    const double x0 = kMarginLeft, x1 = kChartWidth - kMarginRight;
    const double ytop = y_offset + kMarginTop, ybot = y_offset + kChartHeight - kMarginBottom;
    svg << "<line x1=\"" << num(x0) << "\" y1=\"" << num(ybot) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(ybot) << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << num(x0) << "\" y1=\"" << num(ytop) << "\" x2=\"" << num(x0)
        << "\" y2=\"" << num(ybot) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fy = y.lo + (y.hi - y.lo) * i / 4.0;
        const double py = y(fy);
        svg << "<line x1=\"" << num(x0 - 4) << "\" y1=\"" << num(py) << "\" x2=\"" << num(x0)
            << "\" y2=\"" << num(py) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(py + 4)
            << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"end\">"
            << short_num(fy) << "</text>\n";
    }
    (void)x;
}

void line_chart(std::ostringstream& svg, double y_offset, const std::string& title,
                const std::vector<double>& xs, const std::vector<double>& ys,
                const std::string& x_label) {
    double x_lo = xs.front(), x_hi = xs.front(), y_lo = ys.front(), y_hi = ys.front();
    for (double v : xs) { x_lo = std::min(x_lo, v); x_hi = std::max(x_hi, v); }
    for (double v : ys) { y_lo = std::min(y_lo, v); y_hi = std::max(y_hi, v); }
    if (y_hi == y_lo) { y_hi += 1.0; y_lo -= 1.0; }
    const double pad = 0.05 * (y_hi - y_lo);
    Scale x{x_lo, x_hi, kMarginLeft, kChartWidth - kMarginRight};
    Scale y{y_lo - pad, y_hi + pad, y_offset + kChartHeight - kMarginBottom,
            y_offset + kMarginTop};
    axes(svg, y_offset, title, x, y);

    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double px = x(xs[i]);
        svg << "<line x1=\"" << num(px) << "\" y1=\""
            << num(y_offset + kChartHeight - kMarginBottom) << "\" x2=\"" << num(px) << "\" y2=\""
            << num(y_offset + kChartHeight - kMarginBottom + 4) << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << num(px) << "\" y=\""
            << num(y_offset + kChartHeight - kMarginBottom + 16)
            << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">"
            << short_num(xs[i]) << "</text>\n";
    }
    svg << "<text x=\"" << num(0.5 * (kMarginLeft + kChartWidth - kMarginRight)) << "\" y=\""
        << num(y_offset + kChartHeight - 8)
        << "\" font-size=\"11\" font-family=\"sans-serif\" text-anchor=\"middle\">"
        << xml_escape(x_label) << "</text>\n";

    if (xs.size() > 1) {
        svg << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) svg << ' ';
            svg << num(x(xs[i])) << ',' << num(y(ys[i]));
        }
        svg << "\"/>\n";
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        svg << "<circle class=\"point\" cx=\"" << num(x(xs[i])) << "\" cy=\"" << num(y(ys[i]))
            << "\" r=\"3\" fill=\"#1f6fb2\"/>\n";
    }
}

void bar_chart(std::ostringstream& svg, double y_offset, const std::string& title,
               const std::vector<GroupTableRow>& table, bool use_car,
               const std::string& bar_class) {
    std::vector<std::string> events;
    for (const auto& row : table) {
        if (std::find(events.begin(), events.end(), row.event_id) == events.end()) {
            events.push_back(row.event_id);
        }
    }
    double lo = 0.0, hi = 0.0;
    for (const auto& row : table) {
        const double v = use_car ? row.mean_car : row.mean_abvol;
        if (std::isnan(v)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (hi == lo) { hi += 1.0; lo -= 1.0; }
    const double pad = 0.05 * (hi - lo);
    Scale y{lo - pad, hi + pad, y_offset + kChartHeight - kMarginBottom, y_offset + kMarginTop};
    Scale x{0.0, 1.0, kMarginLeft, kChartWidth - kMarginRight};
    axes(svg, y_offset, title, x, y);

    static const char* fills[] = {"#b2451f", "#1f6fb2", "#7a7a7a"};
    const double span = (kChartWidth - kMarginLeft - kMarginRight) / events.size();
    const double bar_w = span / 5.0;
    const double base = y(0.0);
    for (std::size_t e = 0; e < events.size(); ++e) {
        const double center = kMarginLeft + span * (static_cast<double>(e) + 0.5);
        svg << "<text x=\"" << num(center) << "\" y=\""
            << num(y_offset + kChartHeight - kMarginBottom + 16)
            << "\" font-size=\"10\" font-family=\"sans-serif\" text-anchor=\"middle\">"
            << xml_escape(events[e]) << "</text>\n";
        int slot = 0;
        for (const auto& row : table) {
            if (row.event_id != events[e]) continue;
            const double v = use_car ? row.mean_car : row.mean_abvol;
            const double gx = center + (slot - 1) * bar_w - bar_w / 2.0;
            ++slot;
            if (std::isnan(v)) continue;
            const double py = y(v);
            svg << "<rect class=\"" << bar_class << "\" x=\"" << num(gx) << "\" y=\""
                << num(std::min(py, base)) << "\" width=\"" << num(bar_w) << "\" height=\""
                << num(std::abs(base - py)) << "\" fill=\"" << fills[(slot - 1) % 3]
                << "\"/>\n";
        }
    }
}

} // namespace

std::string render_report_svg(const std::optional<SweepTable>& sweep,
                              const std::vector<GroupTableRow>& event_table) {
    if ((!sweep || sweep->rows.empty()) && event_table.empty()) {
        throw DataError("render_report_svg: nothing to plot");
    }

    struct Panel {
        std::string title;
        std::vector<double> xs, ys;
    };
    std::vector<Panel> panels;
    std::string x_label;
    if (sweep && !sweep->rows.empty()) {
        x_label = sweep->parameter_names.front();
        const std::pair<const char*, double (*)(const SweepRow&)> metrics[] = {
            {"pricing_error_rmse", [](const SweepRow& r) { return r.metrics.pricing_error_rmse; }},
            {"volatility", [](const SweepRow& r) { return r.metrics.volatility; }},
            {"liquidity_level", [](const SweepRow& r) { return r.metrics.liquidity_level; }},
            {"expected_shortfall", [](const SweepRow& r) { return r.metrics.expected_shortfall; }},
            {"mean_rho",
             [](const SweepRow& r) { return r.metrics.mean_rho ? *r.metrics.mean_rho : std::nan(""); }},
        };
        for (const auto& [name, extract] : metrics) {
            const CellMeans means = cell_mean(*sweep, extract);
            Panel panel;
            panel.title = std::string(name) + " vs " + x_label + " (cell means)";
            for (std::size_t i = 0; i < means.means.size(); ++i) {
                if (std::isnan(means.means[i])) continue;
                panel.xs.push_back(means.cell_values[i].front());
                panel.ys.push_back(means.means[i]);
            }
            if (!panel.xs.empty()) panels.push_back(std::move(panel));
        }
    }

    const int n_charts = static_cast<int>(panels.size()) + (event_table.empty() ? 0 : 2);
    if (n_charts == 0) throw DataError("render_report_svg: no plottable values");

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kChartWidth)
        << "\" height=\"" << num(n_charts * kChartHeight) << "\" viewBox=\"0 0 "
        << num(kChartWidth) << ' ' << num(n_charts * kChartHeight) << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    double y_offset = 0.0;
    for (const auto& panel : panels) {
        line_chart(svg, y_offset, panel.title, panel.xs, panel.ys, x_label);
        y_offset += kChartHeight;
    }
    if (!event_table.empty()) {
        bar_chart(svg, y_offset, "mean CAR by event and group (vendor/financial/control)",
                  event_table, true, "bar-car");
        y_offset += kChartHeight;
        bar_chart(svg, y_offset, "mean abnormal log volume by event and group", event_table,
                  false, "bar-abvol");
    }
    svg << "</svg>\n";
    return svg.str();
}

} // namespace afmm
