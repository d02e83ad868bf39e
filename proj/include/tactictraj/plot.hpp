#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "tactictraj/scene.hpp"

namespace tactictraj {

namespace plot_detail {

/// Shortest round-trip-exact decimal form of a double.
inline std::string fmt(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline const char* team_color(int team) {
    switch (team) {
        case 0: return "#1f6eb4";
        case 1: return "#d62728";
        default: return "#2ca02c";  // ball
    }
}

struct CourtMap {
    double half_x, half_y, scale, margin;
    double sx(double x) const { return margin + (x + half_x) * scale; }
    double sy(double y) const { return margin + (half_y - y) * scale; }
};

}  // namespace plot_detail

/// Write an SVG (court outline, solid observed paths, dashed predicted paths,
/// teams colored) plus a CSV of every coordinate. Deterministic byte output.
/// predictions may be empty; otherwise [S, N, T_pred, 2] in court meters.
inline void plot_emit(const Scene& scene, const Tensor& predictions,
                      const std::array<double, 2>& court_extent, const std::string& svg_path,
                      const std::string& csv_path) {
    using plot_detail::fmt;
    const bool has_preds = predictions.numel() > 0;
    if (has_preds && (predictions.ndim() != 4 || predictions.shape()[1] != scene.n_agents())) {
        throw ShapeError("plot predictions must be [S,N,T,2] matching the scene");
    }

    plot_detail::CourtMap map{0.5 * court_extent[0], 0.5 * court_extent[1], 26.0, 20.0};
    const double w = 2.0 * map.margin + court_extent[0] * map.scale;
    const double h = 2.0 * map.margin + court_extent[1] * map.scale;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(w) << "\" height=\""
        << fmt(h) << "\" viewBox=\"0 0 " << fmt(w) << " " << fmt(h) << "\">\n";
    svg << "<rect x=\"" << fmt(map.margin) << "\" y=\"" << fmt(map.margin) << "\" width=\""
        << fmt(court_extent[0] * map.scale) << "\" height=\"" << fmt(court_extent[1] * map.scale)
        << "\" fill=\"#f7f3e9\" stroke=\"#444\" stroke-width=\"2\"/>\n";
    svg << "<line x1=\"" << fmt(map.sx(0.0)) << "\" y1=\"" << fmt(map.margin) << "\" x2=\""
        << fmt(map.sx(0.0)) << "\" y2=\"" << fmt(h - map.margin)
        << "\" stroke=\"#444\" stroke-width=\"1\"/>\n";
    svg << "<circle cx=\"" << fmt(map.sx(0.0)) << "\" cy=\"" << fmt(map.sy(0.0))
        << "\" r=\"" << fmt(1.8 * map.scale)
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

    auto polyline = [&](const std::string& points, const char* color, bool dashed,
                        const char* width) {
        svg << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"" << width << "\"";
        if (dashed) svg << " stroke-dasharray=\"5,4\" opacity=\"0.55\"";
        svg << "/>\n";
    };

    std::ostringstream csv;
    csv << "kind,sample,agent,frame,x,y\n";

    for (std::size_t i = 0; i < scene.n_agents(); ++i) {
        std::ostringstream pts;
        for (std::size_t f = 0; f < scene.t_obs; ++f) {
            if (f) pts << " ";
            pts << fmt(map.sx(scene.x(i, f))) << "," << fmt(map.sy(scene.y(i, f)));
            csv << "observed,-1," << i << "," << f << "," << fmt(scene.x(i, f)) << ","
                << fmt(scene.y(i, f)) << "\n";
        }
        polyline(pts.str(), plot_detail::team_color(scene.team_of[i]), false, "2");
    }

    if (has_preds) {
        const std::size_t s_count = predictions.shape()[0];
        const std::size_t t_pred = predictions.shape()[2];
        for (std::size_t s = 0; s < s_count; ++s) {
            for (std::size_t i = 0; i < scene.n_agents(); ++i) {
                std::ostringstream pts;
                for (std::size_t t = 0; t < t_pred; ++t) {
                    const double px = predictions[predictions.offset({s, i, t, 0})];
                    const double py = predictions[predictions.offset({s, i, t, 1})];
                    if (t) pts << " ";
                    pts << fmt(map.sx(px)) << "," << fmt(map.sy(py));
                    csv << "predicted," << s << "," << i << "," << t << "," << fmt(px) << ","
                        << fmt(py) << "\n";
                }
                polyline(pts.str(), plot_detail::team_color(scene.team_of[i]), true, "1");
            }
        }
    }
    svg << "</svg>\n";

    std::ofstream svg_out(svg_path);
    if (!svg_out) throw DataError("cannot write SVG: " + svg_path);
    svg_out << svg.str();
    std::ofstream csv_out(csv_path);
    if (!csv_out) throw DataError("cannot write CSV: " + csv_path);
    csv_out << csv.str();
}

}  // namespace tactictraj
