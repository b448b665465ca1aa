#include "ltest/report.hpp"

#include "ltest/version.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>
#include <string>

namespace ltest
{
namespace
{

std::string fmt(const char* spec, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::string xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

void write_report_csv(const ExperimentReport& report, std::ostream& out, bool include_timing)
{
    out << "# ltest " << kVersion << ' ' << report.kind << '\n';
    out << "# config " << report.config.dump() << '\n';
    if (include_timing)
        out << "# wall_clock_seconds " << fmt("%.3f", report.wall_seconds) << '\n';
    out << "method,n,p,dist,m,s,alpha,estimate,stderr\n";
    for (const auto& r : report.rows) {
        out << r.method << ',' << r.n << ',' << r.p << ',' << r.dist << ',' << r.m << ',' << r.s << ','
            << fmt("%g", r.alpha) << ',' << fmt("%.6f", r.estimate) << ',' << fmt("%.6f", r.stderr_) << '\n';
    }
}

void write_power_svg(const ExperimentReport& report, std::ostream& out, double alpha)
{
    constexpr double width = 720, height = 440;
    constexpr double left = 60, right = 170, top = 30, bottom = 50;
    constexpr double plot_w = width - left - right, plot_h = height - top - bottom;
    static constexpr std::array<const char*, 10> palette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

    // Series in first-appearance order; points sorted by s.
    std::vector<std::string> order;
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    double max_s = 0.0;
    for (const auto& r : report.rows) {
        if (std::abs(r.alpha - alpha) > 1e-12)
            continue;
        if (!series.count(r.method))
            order.push_back(r.method);
        series[r.method].emplace_back(static_cast<double>(r.s), r.estimate);
        max_s = std::max(max_s, static_cast<double>(r.s));
    }
    if (max_s <= 0.0)
        max_s = 1.0;
    auto sx = [&](double s) { return left + plot_w * s / max_s; };
    auto sy = [&](double v) { return top + plot_h * (1.0 - v); };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
        << "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double v = t / 5.0;
        const double y = sy(v);
        out << "<line x1=\"" << left - 4 << "\" y1=\"" << fmt("%.2f", y) << "\" x2=\"" << left << "\" y2=\""
            << fmt("%.2f", y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << left - 8 << "\" y=\"" << fmt("%.2f", y + 4) << "\" text-anchor=\"end\">"
            << fmt("%.1f", v) << "</text>\n";
        const double s = max_s * t / 5.0;
        const double x = sx(s);
        out << "<line x1=\"" << fmt("%.2f", x) << "\" y1=\"" << top + plot_h << "\" x2=\"" << fmt("%.2f", x)
            << "\" y2=\"" << top + plot_h + 4 << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fmt("%.2f", x) << "\" y=\"" << top + plot_h + 18 << "\" text-anchor=\"middle\">"
            << fmt("%g", std::round(s * 10) / 10) << "</text>\n";
    }
    out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 10
        << "\" text-anchor=\"middle\">sparsity s</text>\n";
    out << "<text x=\"16\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << top + plot_h / 2 << ")\">" << (report.kind == "power" ? "size-corrected power" : "rejection rate")
        << "</text>\n";

    for (std::size_t i = 0; i < order.size(); ++i) {
        auto pts = series[order[i]];
        std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        const char* colour = palette[i % palette.size()];
        out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < pts.size(); ++k)
            out << (k ? " " : "") << fmt("%.2f", sx(pts[k].first)) << ',' << fmt("%.2f", sy(pts[k].second));
        out << "\"/>\n";
        for (const auto& [s, v] : pts)
            out << "<circle cx=\"" << fmt("%.2f", sx(s)) << "\" cy=\"" << fmt("%.2f", sy(v)) << "\" r=\"3\" fill=\""
                << colour << "\"/>\n";
        const double ly = top + 10 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << left + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + plot_w + 35
            << "\" y2=\"" << ly << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << left + plot_w + 40 << "\" y=\"" << ly + 4 << "\">" << xml_escape(order[i])
            << "</text>\n";
    }
    out << "</g>\n</svg>\n";
}

} // namespace ltest
