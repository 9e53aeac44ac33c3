#include "spde/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace spde {

namespace {

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int palette_size = 8;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

struct Axis {
    double lo = 0.0, hi = 1.0;  // data range (already in log10 for log axes)
    double px0 = 0.0, px1 = 1.0;

    double map(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

std::string svg_header(int w, int h, const std::string& title) {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\" viewBox=\"0 0 " << w << " " << h << "\">\n"
       << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n"
       << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
          "font-family=\"sans-serif\" font-size=\"15\" fill=\"#222\">"
       << title << "</text>\n";
    return os.str();
}

void draw_frame(std::ostringstream& os, double x0, double y0, double x1, double y1) {
    os << "<rect x=\"" << fmt(x0) << "\" y=\"" << fmt(y1) << "\" width=\"" << fmt(x1 - x0)
       << "\" height=\"" << fmt(y0 - y1)
       << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";
}

std::string text(double x, double y, const std::string& s, const std::string& anchor,
                 int size = 11, const std::string& fill = "#222") {
    std::ostringstream os;
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor
       << "\" font-family=\"sans-serif\" font-size=\"" << size << "\" fill=\"" << fill << "\">"
       << s << "</text>\n";
    return os.str();
}

// Round tick spacing to 1/2/5 times a power of ten.
std::vector<double> linear_ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    double step = std::pow(10.0, std::floor(std::log10(span / target)));
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (span / (step * mult) <= target) {
            step *= mult;
            break;
        }
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
        ticks.push_back(std::abs(t) < 1e-12 * span ? 0.0 : t);
    return ticks;
}

} // namespace

std::string row_flag_name(RowFlag f) {
    switch (f) {
        case RowFlag::ok: return "ok";
        case RowFlag::zero_error: return "zero_error";
        case RowFlag::noise_floor: return "noise_floor";
    }
    return "unknown";
}

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_rate_csv(const std::string& path, const RateTable& table) {
    std::ofstream out = open_out(path);
    out << "h,err,se,n\n";
    for (const RateRow& r : table.rows)
        out << format_g17(r.h) << ',' << format_g17(r.err) << ',' << format_g17(r.se) << ','
            << r.n << '\n';
}

void write_ergodicity_csv(const std::string& path, const ErgodicitySeries& series) {
    std::ofstream out = open_out(path);
    out << "t,init_id,phi_id,mean,se\n";
    for (std::size_t a = 0; a < series.estimates.size(); ++a)
        for (std::size_t f = 0; f < series.estimates[a].size(); ++f)
            for (std::size_t r = 0; r < series.estimates[a][f].size(); ++r) {
                const MCEstimate& e = series.estimates[a][f][r];
                out << format_g17(series.times[r]) << ',' << a << ',' << f << ','
                    << format_g17(e.mean) << ',' << format_g17(e.std_error) << '\n';
            }
}

void write_rate_svg(const std::string& path, const std::string& title,
                    const std::vector<NamedTable>& tables, const std::string& x_label) {
    constexpr int width = 760, height = 520;
    constexpr double left = 80, right_pad = 210, top = 48, bottom = 56;
    const double x0 = left, x1 = width - right_pad, y0 = height - bottom, y1 = top;

    // Collect plottable points (log axes need positive values).
    double lx_min = 0.0, lx_max = 0.0, ly_min = 0.0, ly_max = 0.0;
    bool any = false;
    for (const NamedTable& nt : tables)
        for (const RateRow& r : nt.table.rows) {
            if (!(r.h > 0.0) || !(r.err > 0.0)) continue;
            const double lx = std::log10(r.h), ly = std::log10(r.err);
            if (!any) {
                lx_min = lx_max = lx;
                ly_min = ly_max = ly;
                any = true;
            } else {
                lx_min = std::min(lx_min, lx);
                lx_max = std::max(lx_max, lx);
                ly_min = std::min(ly_min, ly);
                ly_max = std::max(ly_max, ly);
            }
        }
    if (!any) {
        lx_min = ly_min = -1.0;
        lx_max = ly_max = 0.0;
    }
    const auto pad = [](double& lo, double& hi) {
        const double p = std::max(0.05 * (hi - lo), 0.2);
        lo -= p;
        hi += p;
    };
    pad(lx_min, lx_max);
    pad(ly_min, ly_max);

    Axis ax{lx_min, lx_max, x0, x1};
    Axis ay{ly_min, ly_max, y0, y1};  // inverted: larger values map upward

    std::ostringstream os;
    os << svg_header(width, height, title);

    // Decade grid and labels.
    for (int d = static_cast<int>(std::ceil(lx_min)); d <= static_cast<int>(std::floor(lx_max)); ++d) {
        const double px = ax.map(d);
        os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(px)
           << "\" y2=\"" << fmt(y1) << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        os << text(px, y0 + 18, "1e" + std::to_string(d), "middle");
    }
    for (int d = static_cast<int>(std::ceil(ly_min)); d <= static_cast<int>(std::floor(ly_max)); ++d) {
        const double py = ay.map(d);
        os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x1)
           << "\" y2=\"" << fmt(py) << "\" stroke=\"#ddd\" stroke-width=\"1\"/>\n";
        os << text(x0 - 8, py + 4, "1e" + std::to_string(d), "end");
    }
    draw_frame(os, x0, y0, x1, y1);
    os << text((x0 + x1) / 2, height - 16, x_label, "middle", 12);
    os << "<text x=\"20\" y=\"" << fmt((y0 + y1) / 2)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
          "fill=\"#222\" transform=\"rotate(-90 20 "
       << fmt((y0 + y1) / 2) << ")\">error</text>\n";

    for (std::size_t s = 0; s < tables.size(); ++s) {
        const NamedTable& nt = tables[s];
        const std::string color = palette[s % palette_size];

        // Dashed theoretical slope, anchored above the coarsest included point.
        const RateRow* anchor = nullptr;
        for (const RateRow& r : nt.table.rows)
            if (r.flag == RowFlag::ok && r.err > 0.0 && (!anchor || r.h > anchor->h)) anchor = &r;
        if (nt.has_reference && anchor) {
            const double c = std::log10(anchor->err * 2.0) - nt.reference_slope * std::log10(anchor->h);
            const double gx0 = lx_min + 0.03 * (lx_max - lx_min);
            const double gx1 = lx_max - 0.03 * (lx_max - lx_min);
            os << "<line x1=\"" << fmt(ax.map(gx0)) << "\" y1=\""
               << fmt(ay.map(nt.reference_slope * gx0 + c)) << "\" x2=\"" << fmt(ax.map(gx1))
               << "\" y2=\"" << fmt(ay.map(nt.reference_slope * gx1 + c)) << "\" stroke=\""
               << color << "\" stroke-width=\"1\" stroke-dasharray=\"6 4\" opacity=\"0.6\"/>\n";
        }

        std::ostringstream pts;
        for (const RateRow& r : nt.table.rows) {
            if (!(r.h > 0.0) || !(r.err > 0.0)) continue;
            const double px = ax.map(std::log10(r.h));
            const double py = ay.map(std::log10(r.err));
            if (r.flag == RowFlag::ok) pts << fmt(px) << ',' << fmt(py) << ' ';
            os << "<circle cx=\"" << fmt(px) << "\" cy=\"" << fmt(py) << "\" r=\"4\" fill=\""
               << (r.flag == RowFlag::ok ? color : std::string("white")) << "\" stroke=\""
               << color << "\" stroke-width=\"1.5\"/>\n";
        }
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";

        // Legend entry.
        const double ly = y1 + 16 + 34 * static_cast<double>(s);
        const double lx = x1 + 14;
        os << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(lx + 22)
           << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        os << text(lx + 28, ly + 4, nt.name, "start", 11);
        std::string slope_txt = "slope: n/a";
        if (nt.table.slope)
            slope_txt = "slope " + fmt(*nt.table.slope, "%.3f") +
                        (nt.table.slope_se ? " &#177; " + fmt(*nt.table.slope_se, "%.3f") : "");
        if (nt.has_reference) slope_txt += "  (ref " + fmt(nt.reference_slope, "%.2f") + ")";
        os << text(lx + 28, ly + 18, slope_txt, "start", 10, "#555");
    }

    os << "</svg>\n";
    open_out(path) << os.str();
}

void write_ergodicity_svg(const std::string& path, const std::string& title,
                          const ErgodicitySeries& series, int phi_index,
                          const std::vector<std::string>& init_names) {
    constexpr int width = 760, height = 520;
    constexpr double left = 80, right_pad = 190, top = 48, bottom = 56;
    const double x0 = left, x1 = width - right_pad, y0 = height - bottom, y1 = top;

    double vmin = 0.0, vmax = 0.0;
    bool any = false;
    for (const auto& per_init : series.estimates) {
        const auto& sr = per_init[static_cast<std::size_t>(phi_index)];
        for (const MCEstimate& e : sr) {
            if (!any) {
                vmin = vmax = e.mean;
                any = true;
            } else {
                vmin = std::min(vmin, e.mean);
                vmax = std::max(vmax, e.mean);
            }
        }
    }
    if (!any) {
        vmin = 0.0;
        vmax = 1.0;
    }
    const double vpad = std::max(0.08 * (vmax - vmin), 1e-6);
    vmin -= vpad;
    vmax += vpad;
    const double t_lo = series.times.front(), t_hi = series.times.back();

    Axis ax{t_lo, t_hi, x0, x1};
    Axis ay{vmin, vmax, y0, y1};

    std::ostringstream os;
    os << svg_header(width, height, title);
    for (double t : linear_ticks(t_lo, t_hi)) {
        const double px = ax.map(t);
        os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(px)
           << "\" y2=\"" << fmt(y1) << "\" stroke=\"#ddd\"/>\n";
        os << text(px, y0 + 18, fmt(t, "%.4g"), "middle");
    }
    for (double v : linear_ticks(vmin, vmax)) {
        const double py = ay.map(v);
        os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(x1)
           << "\" y2=\"" << fmt(py) << "\" stroke=\"#ddd\"/>\n";
        os << text(x0 - 8, py + 4, fmt(v, "%.4g"), "end");
    }
    draw_frame(os, x0, y0, x1, y1);
    os << text((x0 + x1) / 2, height - 16, "t", "middle", 12);

    for (std::size_t a = 0; a < series.estimates.size(); ++a) {
        const std::string color = palette[a % palette_size];
        const auto& sr = series.estimates[a][static_cast<std::size_t>(phi_index)];
        std::ostringstream pts;
        for (std::size_t r = 0; r < sr.size(); ++r)
            pts << fmt(ax.map(series.times[r])) << ',' << fmt(ay.map(sr[r].mean)) << ' ';
        os << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\"/>\n";
        const double ly = y1 + 16 + 22 * static_cast<double>(a);
        os << "<line x1=\"" << fmt(x1 + 14) << "\" y1=\"" << fmt(ly) << "\" x2=\""
           << fmt(x1 + 36) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
           << "\" stroke-width=\"2\"/>\n";
        os << text(x1 + 42, ly + 4, a < init_names.size() ? init_names[a] : std::to_string(a),
                   "start", 11);
    }
    os << "</svg>\n";
    open_out(path) << os.str();
}

namespace {

nlohmann::json config_json(const RunConfig& cfg) {
    nlohmann::json j;
    std::istringstream lines(canonical_text(cfg));
    std::string line;
    while (std::getline(lines, line)) {
        const std::size_t eq = line.find('=');
        if (eq != std::string::npos) j[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return j;
}

nlohmann::json stats_json(const SolveStats& stats) {
    return {{"max_iterations", stats.max_iterations},
            {"total_iterations", stats.total_iterations},
            {"solves", stats.solves},
            {"max_residual", stats.max_residual},
            {"any_damped", stats.any_damped}};
}

// Deliberately carries no file paths: metadata bytes must depend only on the run's
// semantics (config + seed), never on where the artifacts were written.
nlohmann::json table_json(const NamedTable& nt) {
    nlohmann::json rows = nlohmann::json::array();
    for (const RateRow& r : nt.table.rows)
        rows.push_back({{"h", r.h},
                        {"err", r.err},
                        {"se", r.se},
                        {"n", r.n},
                        {"flag", row_flag_name(r.flag)}});
    nlohmann::json j = {{"name", nt.name}, {"rows", rows}};
    if (nt.table.slope) {
        j["slope"] = *nt.table.slope;
        j["slope_se"] = *nt.table.slope_se;
    } else {
        j["slope"] = nullptr;
        j["slope_se"] = nullptr;
    }
    if (nt.has_reference) j["reference_slope"] = nt.reference_slope;
    return j;
}

} // namespace

std::vector<std::string> emit_rate_results(const RunConfig& cfg, const std::string& command,
                                           const std::vector<NamedTable>& tables,
                                           const SolveStats& stats, long long n_failed,
                                           const std::string& x_label) {
    std::vector<std::string> paths;
    nlohmann::json jtables = nlohmann::json::array();
    for (const NamedTable& nt : tables) {
        const std::string csv = cfg.out_prefix + "_" + command + "_" + nt.name + ".csv";
        write_rate_csv(csv, nt.table);
        paths.push_back(csv);
        jtables.push_back(table_json(nt));
    }
    // A plot with nothing to draw is not written: empty tables produce header-only CSVs
    // and metadata, but no SVG.
    bool any_rows = false;
    for (const NamedTable& nt : tables) any_rows = any_rows || !nt.table.rows.empty();
    if (any_rows) {
        const std::string svg = cfg.out_prefix + "_" + command + ".svg";
        write_rate_svg(svg, command + " error against " + x_label + "  [seed " +
                                std::to_string(cfg.seed) + "]",
                       tables, x_label);
        paths.push_back(svg);
    }

    nlohmann::json meta = {{"version", "0.1.0"},
                           {"command", command},
                           {"config_hash", config_hash(cfg)},
                           {"config", config_json(cfg)},
                           {"seed", cfg.seed},
                           {"failed_trajectories", n_failed},
                           {"solver", stats_json(stats)},
                           {"tables", jtables}};
    const std::string meta_path = cfg.out_prefix + "_" + command + "_meta.json";
    open_out(meta_path) << meta.dump(2) << '\n';
    paths.push_back(meta_path);
    return paths;
}

std::vector<std::string> emit_ergodicity_results(const RunConfig& cfg,
                                                 const ErgodicitySeries& series,
                                                 const std::vector<std::string>& phi_names,
                                                 const std::vector<std::string>& init_names) {
    std::vector<std::string> paths;
    const std::string csv = cfg.out_prefix + "_ergodicity.csv";
    write_ergodicity_csv(csv, series);
    paths.push_back(csv);

    for (std::size_t f = 0; f < phi_names.size(); ++f) {
        const std::string svg = cfg.out_prefix + "_ergodicity_" + phi_names[f] + ".svg";
        write_ergodicity_svg(svg, "ensemble average of " + phi_names[f] + "  [seed " +
                                      std::to_string(cfg.seed) + "]",
                             series, static_cast<int>(f), init_names);
        paths.push_back(svg);
    }

    nlohmann::json jfinal = nlohmann::json::array();
    for (std::size_t a = 0; a < series.estimates.size(); ++a)
        for (std::size_t f = 0; f < series.estimates[a].size(); ++f) {
            const MCEstimate& e = series.estimates[a][f].back();
            jfinal.push_back({{"init", init_names[a]},
                              {"phi", phi_names[f]},
                              {"mean", e.mean},
                              {"se", e.std_error},
                              {"n", e.n}});
        }
    nlohmann::json meta = {{"version", "0.1.0"},
                           {"command", "ergodicity"},
                           {"config_hash", config_hash(cfg)},
                           {"config", config_json(cfg)},
                           {"seed", cfg.seed},
                           {"failed_trajectories", series.n_failed},
                           {"solver", stats_json(series.stats)},
                           {"final_estimates", jfinal}};
    const std::string meta_path = cfg.out_prefix + "_ergodicity_meta.json";
    open_out(meta_path) << meta.dump(2) << '\n';
    paths.push_back(meta_path);
    return paths;
}

} // namespace spde
