// io.hpp — CSV and SVG emission with atomic file replacement

#pragma once

#include "dce/dynamics.hpp"
#include "dce/errors.hpp"
#include "dce/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace dce {

inline std::string format_sig(double v) {
    if (v == 0.0) return "0"; // folds -0
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// One header row, then rows of `t` and the requested columns. An optional
// leading key column tags each row (used by sweeps).
inline void write_series_csv(std::ostream& out, const TimeSeries& ts, const std::string& key_name = {}, double key_value = 0.0,
                             bool header = true) {
    if (header) {
        if (!key_name.empty()) out << key_name << ',';
        out << 't';
        for (const auto& n : ts.names) out << ',' << n;
        out << '\n';
    }
    for (std::size_t i = 0; i < ts.rows(); ++i) {
        if (!key_name.empty()) out << format_sig(key_value) << ',';
        out << format_sig(ts.times[i]);
        for (const auto& c : ts.columns) out << ',' << format_sig(c[i]);
        out << '\n';
    }
}

inline void write_spectrum_csv(std::ostream& out, const std::vector<SpectrumRow>& rows) {
    out << "g_over_omega,level,energy,parity\n";
    for (const auto& r : rows)
        out << format_sig(r.g_over_omega) << ',' << r.level << ',' << format_sig(r.energy) << ',' << r.parity << '\n';
}

// Write to a sibling temporary and rename, so readers never observe a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot open '" + tmp.string() + "' for writing");
        f << content;
        f.flush();
        if (!f) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw ConfigError("write to '" + tmp.string() + "' failed");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw ConfigError("cannot move output into place at '" + path + "'");
    }
}

// Minimal line plot: frame, min/max tick labels, one polyline per column.
inline std::string render_svg(const std::vector<double>& x, const std::vector<std::pair<std::string, std::vector<double>>>& series,
                              const std::string& x_label = "omega1 t") {
    const double W = 720, H = 420, L = 70, R = 160, T = 20, B = 50;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (double v : x) {
        xmin = std::min(xmin, v);
        xmax = std::max(xmax, v);
    }
    for (const auto& [name, ys] : series)
        for (double v : ys)
            if (std::isfinite(v)) {
                ymin = std::min(ymin, v);
                ymax = std::max(ymax, v);
            }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) {
        ymin = std::isfinite(ymin) ? ymin - 0.5 : 0.0;
        ymax = ymin + 1.0;
    }
    auto px = [&](double v) { return L + (v - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - ymin) / (ymax - ymin) * (H - T - B); };
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << (W - L - R) << "\" height=\"" << (H - T - B)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    s << "<text x=\"" << L << "\" y=\"" << (H - B + 16) << "\" text-anchor=\"middle\">" << format_sig(xmin) << "</text>\n";
    s << "<text x=\"" << (W - R) << "\" y=\"" << (H - B + 16) << "\" text-anchor=\"middle\">" << format_sig(xmax) << "</text>\n";
    s << "<text x=\"" << (L + (W - L - R) / 2) << "\" y=\"" << (H - 12) << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    s << "<text x=\"" << (L - 6) << "\" y=\"" << py(ymin) << "\" text-anchor=\"end\">" << format_sig(ymin) << "</text>\n";
    s << "<text x=\"" << (L - 6) << "\" y=\"" << (py(ymax) + 10) << "\" text-anchor=\"end\">" << format_sig(ymax) << "</text>\n";
    std::size_t k = 0;
    for (const auto& [name, ys] : series) {
        const char* color = palette[k % 8];
        s << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < x.size() && i < ys.size(); ++i)
            if (std::isfinite(ys[i])) s << format_sig(px(x[i])) << ',' << format_sig(py(ys[i])) << ' ';
        s << "\"/>\n";
        const double ly = T + 16 + 18 * static_cast<double>(k);
        s << "<line x1=\"" << (W - R + 10) << "\" y1=\"" << (ly - 4) << "\" x2=\"" << (W - R + 30) << "\" y2=\"" << (ly - 4)
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << (W - R + 36) << "\" y=\"" << ly << "\">" << name << "</text>\n";
        ++k;
    }
    s << "</svg>\n";
    return s.str();
}

inline std::string render_series_svg(const TimeSeries& ts) {
    std::vector<std::pair<std::string, std::vector<double>>> series;
    for (std::size_t i = 0; i < ts.names.size(); ++i) series.emplace_back(ts.names[i], ts.columns[i]);
    return render_svg(ts.times, series);
}

} // namespace dce
