#include "waterline/plot.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <vector>

#include "waterline/errors.hpp"

namespace waterline {

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Hinnant's civil
// calendar algorithm); keeps the date axis linear without timezone baggage.
long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long era = (y >= 0 ? y : y - 399) / 400;
    const long yoe = y - era * 400;
    const long doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const long doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

long day_number(const std::string& date) {
    if (date.size() != 10 || date[4] != '-' || date[7] != '-')
        throw Error("plot", "invalid date '" + date + "' (expected YYYY-MM-DD)");
    const int y = std::atoi(date.substr(0, 4).c_str());
    const int m = std::atoi(date.substr(5, 2).c_str());
    const int d = std::atoi(date.substr(8, 2).c_str());
    if (m < 1 || m > 12 || d < 1 || d > 31)
        throw Error("plot", "invalid date '" + date + "'");
    return days_from_civil(y, m, d);
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

void write_plot_svg(const TimeSeries& estimates, const TimeSeries* reference,
                    const std::string& path) {
    if (estimates.entries.empty()) throw Error("plot", "empty series");
    if (reference && reference->entries.empty()) throw Error("plot", "empty series");

    struct SeriesView {
        const char* label;
        const TimeSeries* data;
    };
    std::vector<SeriesView> series{{"estimate", &estimates}};
    if (reference) series.push_back({"reference", reference});

    long day_min = 0, day_max = 0;
    double val_min = 0, val_max = 0;
    bool first = true;
    for (const auto& sv : series) {
        for (const auto& e : sv.data->entries) {
            const long day = day_number(e.date);
            if (first) {
                day_min = day_max = day;
                val_min = val_max = e.value;
                first = false;
            } else {
                day_min = std::min(day_min, day);
                day_max = std::max(day_max, day);
                val_min = std::min(val_min, e.value);
                val_max = std::max(val_max, e.value);
            }
        }
    }
    if (day_min == day_max) {
        --day_min;
        ++day_max;
    }
    if (val_min == val_max) {
        val_min -= 1;
        val_max += 1;
    } else {
        const double pad = 0.05 * (val_max - val_min);
        val_min -= pad;
        val_max += pad;
    }

    constexpr double kW = 800, kH = 400;
    constexpr double kLeft = 64, kRight = 20, kTop = 24, kBottom = 44;
    const auto x_of = [&](long day) {
        return kLeft + (day - day_min) / double(day_max - day_min) * (kW - kLeft - kRight);
    };
    const auto y_of = [&](double v) {
        return kH - kBottom - (v - val_min) / (val_max - val_min) * (kH - kTop - kBottom);
    };

    std::ofstream out(path);
    if (!out) throw Error("plot", "cannot write " + path);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\""
        << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\">\n";
    out << "  <style>\n"
           "    text { font-family: sans-serif; font-size: 12px; }\n"
           "    polyline { fill: none; stroke-width: 1.5; }\n"
           "    .estimate { stroke: #1f77b4; fill: #1f77b4; }\n"
           "    .reference { stroke: #d62728; fill: #d62728; }\n"
           "    .axis { stroke: #333333; fill: none; }\n"
           "  </style>\n";

    // Axes with end labels only; the plot is a quick-look, not a report.
    out << "  <line class=\"axis\" x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kTop)
        << "\" x2=\"" << fmt(kLeft) << "\" y2=\"" << fmt(kH - kBottom) << "\"/>\n";
    out << "  <line class=\"axis\" x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kH - kBottom)
        << "\" x2=\"" << fmt(kW - kRight) << "\" y2=\"" << fmt(kH - kBottom) << "\"/>\n";
    out << "  <text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y_of(val_min) + 4)
        << "\" text-anchor=\"end\">" << fmt(val_min) << "</text>\n";
    out << "  <text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y_of(val_max) + 4)
        << "\" text-anchor=\"end\">" << fmt(val_max) << "</text>\n";
    out << "  <text x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kH - kBottom + 18)
        << "\">" << series[0].data->entries.front().date << "</text>\n";
    out << "  <text x=\"" << fmt(kW - kRight) << "\" y=\"" << fmt(kH - kBottom + 18)
        << "\" text-anchor=\"end\">" << series[0].data->entries.back().date << "</text>\n";
    out << "  <text x=\"" << fmt(16) << "\" y=\"" << fmt(kH / 2)
        << "\" transform=\"rotate(-90 16 " << fmt(kH / 2) << ")\" text-anchor=\"middle\">"
        << "level_m</text>\n";

    for (const auto& sv : series) {
        out << "  <polyline class=\"" << sv.label << "\" points=\"";
        bool first_pt = true;
        for (const auto& e : sv.data->entries) {
            if (!first_pt) out << ' ';
            out << fmt(x_of(day_number(e.date))) << ',' << fmt(y_of(e.value));
            first_pt = false;
        }
        out << "\"/>\n";
        for (const auto& e : sv.data->entries)
            out << "  <circle class=\"" << sv.label << "\" cx=\""
                << fmt(x_of(day_number(e.date))) << "\" cy=\"" << fmt(y_of(e.value))
                << "\" r=\"3\"/>\n";
    }

    double legend_y = kTop + 12;
    for (const auto& sv : series) {
        out << "  <circle class=\"" << sv.label << "\" cx=\"" << fmt(kW - kRight - 110)
            << "\" cy=\"" << fmt(legend_y - 4) << "\" r=\"4\"/>\n";
        out << "  <text class=\"legend\" x=\"" << fmt(kW - kRight - 100) << "\" y=\""
            << fmt(legend_y) << "\">" << sv.label << "</text>\n";
        legend_y += 18;
    }
    out << "</svg>\n";
    if (!out) throw Error("plot", "cannot write " + path);
}

}  // namespace waterline
