#pragma once

#include <string>
#include <vector>

namespace armada {

// Minimal deterministic SVG writer: fixed decimal formatting, no timestamps,
// so regenerating from the same inputs is byte-identical.
class SvgCanvas {
  public:
    SvgCanvas(double width, double height);

    void line(double x1, double y1, double x2, double y2, const std::string& stroke,
              double stroke_width = 1.0);
    void polyline(const std::vector<std::pair<double, double>>& points, const std::string& stroke,
                  double stroke_width = 1.5);
    void rect(double x, double y, double w, double h, const std::string& fill,
              const std::string& stroke = "none");
    void circle(double cx, double cy, double r, const std::string& fill);
    void text(double x, double y, const std::string& content, double font_size = 10.0,
              const std::string& anchor = "start", double rotate_deg = 0.0);

    std::string finish() const;
    void save(const std::string& path) const;

    static std::string format_number(double v);

  private:
    double width_, height_;
    std::string body_;
};

// Diverging blue-white-red scale over [-limit, limit].
std::string diverging_color(double value, double limit);

struct BoxStats {
    double low = 0, q1 = 0, median = 0, q3 = 0, high = 0;
};
BoxStats box_stats(std::vector<double> values);

// Labeled side-by-side boxplots.
void save_boxplot_svg(const std::string& path, const std::string& title,
                      const std::vector<std::string>& labels,
                      const std::vector<std::vector<double>>& series);

// One or more x/y curves on shared axes.
void save_curves_svg(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     const std::vector<std::string>& names,
                     const std::vector<std::vector<std::pair<double, double>>>& curves);

}  // namespace armada
