#include "armada/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "armada/types.hpp"

namespace armada {

SvgCanvas::SvgCanvas(double width, double height) : width_(width), height_(height) {}

std::string SvgCanvas::format_number(double v) {
    if (!std::isfinite(v)) v = 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    std::string s(buf);
    // Trim trailing zeros for stable compact output.
    while (s.find('.') != std::string::npos && (s.back() == '0' || s.back() == '.')) {
        const bool dot = s.back() == '.';
        s.pop_back();
        if (dot) break;
    }
    return s.empty() || s == "-0" ? "0" : s;
}

void SvgCanvas::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width) {
    body_ += "<line x1=\"" + format_number(x1) + "\" y1=\"" + format_number(y1) + "\" x2=\"" +
             format_number(x2) + "\" y2=\"" + format_number(y2) + "\" stroke=\"" + stroke +
             "\" stroke-width=\"" + format_number(stroke_width) + "\"/>\n";
}

void SvgCanvas::polyline(const std::vector<std::pair<double, double>>& points,
                         const std::string& stroke, double stroke_width) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" +
             format_number(stroke_width) + "\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) body_ += ' ';
        body_ += format_number(points[i].first) + "," + format_number(points[i].second);
    }
    body_ += "\"/>\n";
}

void SvgCanvas::rect(double x, double y, double w, double h, const std::string& fill,
                     const std::string& stroke) {
    body_ += "<rect x=\"" + format_number(x) + "\" y=\"" + format_number(y) + "\" width=\"" +
             format_number(w) + "\" height=\"" + format_number(h) + "\" fill=\"" + fill +
             "\" stroke=\"" + stroke + "\"/>\n";
}

void SvgCanvas::circle(double cx, double cy, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + format_number(cx) + "\" cy=\"" + format_number(cy) + "\" r=\"" +
             format_number(r) + "\" fill=\"" + fill + "\"/>\n";
}

void SvgCanvas::text(double x, double y, const std::string& content, double font_size,
                     const std::string& anchor, double rotate_deg) {
    std::string escaped;
    for (char c : content) {
        switch (c) {
            case '&': escaped += "&amp;"; break;
            case '<': escaped += "&lt;"; break;
            case '>': escaped += "&gt;"; break;
            default: escaped += c;
        }
    }
    body_ += "<text x=\"" + format_number(x) + "\" y=\"" + format_number(y) + "\" font-size=\"" +
             format_number(font_size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\"";
    if (rotate_deg != 0.0) {
        body_ += " transform=\"rotate(" + format_number(rotate_deg) + " " + format_number(x) + " " +
                 format_number(y) + ")\"";
    }
    body_ += ">" + escaped + "</text>\n";
}

std::string SvgCanvas::finish() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + format_number(width_) +
           "\" height=\"" + format_number(height_) + "\" viewBox=\"0 0 " + format_number(width_) + " " +
           format_number(height_) + "\">\n" + body_ + "</svg>\n";
}

void SvgCanvas::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write file: " + path);
    out << finish();
}

std::string diverging_color(double value, double limit) {
    const double t = std::clamp(value / limit, -1.0, 1.0);
    int r, g, b;
    if (t < 0) {  // blue -> white
        const double f = 1.0 + t;
        r = static_cast<int>(std::lround(33 + f * (255 - 33)));
        g = static_cast<int>(std::lround(102 + f * (255 - 102)));
        b = static_cast<int>(std::lround(172 + f * (255 - 172)));
    } else {  // white -> red
        const double f = 1.0 - t;
        r = static_cast<int>(std::lround(178 + f * (255 - 178)));
        g = static_cast<int>(std::lround(24 + f * (255 - 24)));
        b = static_cast<int>(std::lround(43 + f * (255 - 43)));
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

BoxStats box_stats(std::vector<double> values) {
    BoxStats s;
    if (values.empty()) return s;
    std::sort(values.begin(), values.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(values.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, values.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return values[lo] * (1.0 - frac) + values[hi] * frac;
    };
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    const double iqr = s.q3 - s.q1;
    s.low = values.front();
    s.high = values.back();
    // Tukey whiskers.
    for (double v : values) {
        if (v >= s.q1 - 1.5 * iqr) {
            s.low = v;
            break;
        }
    }
    for (std::size_t i = values.size(); i-- > 0;) {
        if (values[i] <= s.q3 + 1.5 * iqr) {
            s.high = values[i];
            break;
        }
    }
    return s;
}

namespace {

constexpr double kW = 640, kH = 420;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 60;

}  // namespace

void save_boxplot_svg(const std::string& path, const std::string& title,
                      const std::vector<std::string>& labels,
                      const std::vector<std::vector<double>>& series) {
    SvgCanvas canvas(kW, kH);
    canvas.text(kW / 2, 22, title, 13, "middle");
    double lo = 0.0, hi = 1.0;
    bool first = true;
    for (const auto& s : series) {
        for (double v : s) {
            if (first || v < lo) lo = v;
            if (first || v > hi) hi = v;
            first = false;
        }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto ty = [&](double v) { return kH - kBottom - (v - lo) / (hi - lo) * (kH - kTop - kBottom); };

    canvas.line(kLeft, kTop, kLeft, kH - kBottom, "#000");
    canvas.line(kLeft, kH - kBottom, kW - kRight, kH - kBottom, "#000");
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = lo + (hi - lo) * tick / 4.0;
        canvas.line(kLeft - 4, ty(v), kLeft, ty(v), "#000");
        canvas.text(kLeft - 8, ty(v) + 3, SvgCanvas::format_number(v), 9, "end");
    }

    const double slot = (kW - kLeft - kRight) / static_cast<double>(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double cx = kLeft + slot * (static_cast<double>(i) + 0.5);
        const double bw = slot * 0.4;
        const BoxStats st = box_stats(series[i]);
        canvas.line(cx, ty(st.low), cx, ty(st.q1), "#333");
        canvas.line(cx, ty(st.q3), cx, ty(st.high), "#333");
        canvas.rect(cx - bw / 2, ty(st.q3), bw, ty(st.q1) - ty(st.q3), "#9ecae1", "#333");
        canvas.line(cx - bw / 2, ty(st.median), cx + bw / 2, ty(st.median), "#000", 1.5);
        canvas.text(cx, kH - kBottom + 16, labels[i], 10, "middle");
    }
    canvas.save(path);
}

void save_curves_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<std::string>& names,
                     const std::vector<std::vector<std::pair<double, double>>>& curves) {
    static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    SvgCanvas canvas(kW, kH);
    canvas.text(kW / 2, 22, title, 13, "middle");
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool first = true;
    for (const auto& curve : curves) {
        for (const auto& [x, y] : curve) {
            if (first) {
                xlo = xhi = x;
                ylo = yhi = y;
                first = false;
            }
            xlo = std::min(xlo, x);
            xhi = std::max(xhi, x);
            ylo = std::min(ylo, y);
            yhi = std::max(yhi, y);
        }
    }
    if (xhi <= xlo) xhi = xlo + 1;
    if (yhi <= ylo) yhi = ylo + 1;
    auto tx = [&](double v) { return kLeft + (v - xlo) / (xhi - xlo) * (kW - kLeft - kRight); };
    auto ty = [&](double v) { return kH - kBottom - (v - ylo) / (yhi - ylo) * (kH - kTop - kBottom); };

    canvas.line(kLeft, kTop, kLeft, kH - kBottom, "#000");
    canvas.line(kLeft, kH - kBottom, kW - kRight, kH - kBottom, "#000");
    for (int tick = 0; tick <= 4; ++tick) {
        const double vx = xlo + (xhi - xlo) * tick / 4.0;
        const double vy = ylo + (yhi - ylo) * tick / 4.0;
        canvas.text(tx(vx), kH - kBottom + 14, SvgCanvas::format_number(vx), 9, "middle");
        canvas.text(kLeft - 8, ty(vy) + 3, SvgCanvas::format_number(vy), 9, "end");
    }
    canvas.text(kW / 2, kH - 16, x_label, 11, "middle");
    canvas.text(16, kH / 2, y_label, 11, "middle", -90);

    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::vector<std::pair<double, double>> pts;
        pts.reserve(curves[c].size());
        for (const auto& [x, y] : curves[c]) pts.emplace_back(tx(x), ty(y));
        canvas.polyline(pts, kColors[c % 6]);
        canvas.text(kW - kRight - 8, kTop + 16 + 14 * static_cast<double>(c), names[c], 10, "end");
        canvas.line(kW - kRight - 70, kTop + 12 + 14 * static_cast<double>(c), kW - kRight - 56,
                    kTop + 12 + 14 * static_cast<double>(c), kColors[c % 6], 2);
    }
    canvas.save(path);
}

}  // namespace armada
