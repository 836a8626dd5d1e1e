#include "iadp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iadp/errors.hpp"
#include "iadp/kinematics.hpp"

namespace iadp {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 600.0;
constexpr double kMarginL = 70.0, kMarginR = 20.0, kMarginT = 40.0,
                 kMarginB = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b"};

struct Range {
  double lo = 0.0, hi = 1.0;
  void include(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi - lo < 1e-30) {
      lo -= 1.0;
      hi += 1.0;
      return;
    }
    const double p = 0.05 * (hi - lo);
    lo -= p;
    hi += p;
  }
};

Range data_range(const std::vector<const std::vector<double>*>& series) {
  Range r;
  bool first = true;
  for (const auto* s : series)
    for (double v : *s) {
      if (first) {
        r.lo = r.hi = v;
        first = false;
      } else {
        r.include(v);
      }
    }
  r.pad();
  return r;
}

// Tick spacing at 1/2/5 × 10^k covering the range with ~6 intervals.
std::vector<double> nice_ticks(const Range& r) {
  const double span = r.hi - r.lo;
  const double raw = span / 6.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  const double start = std::ceil(r.lo / step) * step;
  for (double v = start; v <= r.hi + 0.5 * step; v += step)
    ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  return ticks;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

class SvgCanvas {
 public:
  SvgCanvas(const std::string& title, Range x, Range y,
            const std::string& xlabel, const std::string& ylabel)
      : x_(x), y_(y) {
    os_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    os_ << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os_ << "<text x=\"" << kWidth / 2.0
        << "\" y=\"24\" font-family=\"monospace\" font-size=\"16\" "
           "text-anchor=\"middle\">"
        << title << "</text>\n";
    // Axes box.
    os_ << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
        << plot_w() << "\" height=\"" << plot_h()
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : nice_ticks(x_)) {
      const double px = sx(t);
      if (px < kMarginL - 0.5 || px > kWidth - kMarginR + 0.5) continue;
      os_ << "<line x1=\"" << px << "\" y1=\"" << kHeight - kMarginB
          << "\" x2=\"" << px << "\" y2=\"" << kHeight - kMarginB + 5
          << "\" stroke=\"black\"/>\n";
      os_ << "<text x=\"" << px << "\" y=\"" << kHeight - kMarginB + 20
          << "\" font-family=\"monospace\" font-size=\"12\" "
             "text-anchor=\"middle\">"
          << fmt_tick(t) << "</text>\n";
    }
    for (double t : nice_ticks(y_)) {
      const double py = sy(t);
      if (py < kMarginT - 0.5 || py > kHeight - kMarginB + 0.5) continue;
      os_ << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << py << "\" x2=\""
          << kMarginL << "\" y2=\"" << py << "\" stroke=\"black\"/>\n";
      os_ << "<text x=\"" << kMarginL - 8 << "\" y=\"" << py + 4
          << "\" font-family=\"monospace\" font-size=\"12\" "
             "text-anchor=\"end\">"
          << fmt_tick(t) << "</text>\n";
    }
    os_ << "<text x=\"" << kMarginL + plot_w() / 2.0 << "\" y=\""
        << kHeight - 10
        << "\" font-family=\"monospace\" font-size=\"13\" "
           "text-anchor=\"middle\">"
        << xlabel << "</text>\n";
    os_ << "<text x=\"16\" y=\"" << kMarginT + plot_h() / 2.0
        << "\" font-family=\"monospace\" font-size=\"13\" "
           "text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << kMarginT + plot_h() / 2.0 << ")\">" << ylabel << "</text>\n";
  }

  void polyline(const std::vector<double>& x, const std::vector<double>& y,
                const std::string& color, const std::string& dash = "") {
    if (x.empty()) return;
    os_ << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1\"";
    if (!dash.empty()) os_ << " stroke-dasharray=\"" << dash << "\"";
    os_ << " points=\"";
    for (size_t i = 0; i < x.size(); ++i) {
      if (i) os_ << " ";
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3f,%.3f", sx(x[i]), sy(y[i]));
      os_ << buf;
    }
    os_ << "\"/>\n";
  }

  void legend(const std::vector<std::pair<std::string, std::string>>& items) {
    double y = kMarginT + 16.0;
    for (const auto& [label, color] : items) {
      os_ << "<line x1=\"" << kWidth - kMarginR - 140 << "\" y1=\"" << y - 4
          << "\" x2=\"" << kWidth - kMarginR - 115 << "\" y2=\"" << y - 4
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
      os_ << "<text x=\"" << kWidth - kMarginR - 110 << "\" y=\"" << y
          << "\" font-family=\"monospace\" font-size=\"12\">" << label
          << "</text>\n";
      y += 16.0;
    }
  }

  std::string finish() {
    os_ << "</svg>\n";
    return os_.str();
  }

 private:
  static double plot_w() { return kWidth - kMarginL - kMarginR; }
  static double plot_h() { return kHeight - kMarginT - kMarginB; }
  double sx(double v) const {
    return kMarginL + (v - x_.lo) / (x_.hi - x_.lo) * plot_w();
  }
  double sy(double v) const {
    return kHeight - kMarginB - (v - y_.lo) / (y_.hi - y_.lo) * plot_h();
  }

  Range x_, y_;
  std::ostringstream os_;
};

int joint_count(const Trace& trace) {
  int n = 0;
  while (trace.has_column("q" + std::to_string(n + 1))) ++n;
  return n;
}

void require_column(const Trace& trace, const std::string& name) {
  if (!trace.has_column(name))
    throw std::runtime_error("trace is missing required column '" + name +
                             "' for this plot");
}

std::vector<PlotFile> per_joint_plot(const Trace& trace, int n,
                                     const std::string& stem,
                                     const std::string& ylabel,
                                     const std::vector<std::string>& suffixes) {
  std::vector<PlotFile> files;
  const bool empty = trace.rows() == 0;
  static const std::vector<double> kEmpty;
  for (int i = 1; i <= n; ++i) {
    const std::string s = std::to_string(i);
    std::vector<const std::vector<double>*> series;
    for (const std::string& suf : suffixes) {
      require_column(trace, suf.empty() ? stem + s : stem + s + suf);
      series.push_back(&trace.col(suf.empty() ? stem + s : stem + s + suf));
    }
    const std::vector<double>& t = empty ? kEmpty : trace.col("t");
    Range xr = empty ? Range{0.0, 1.0} : data_range({&t});
    Range yr = empty ? Range{-1.0, 1.0} : data_range(series);
    SvgCanvas canvas(stem + s, xr, yr, "t [s]", ylabel);
    std::vector<std::pair<std::string, std::string>> legend;
    for (size_t k = 0; k < series.size(); ++k) {
      canvas.polyline(t, *series[k], kPalette[k % 6]);
      legend.emplace_back(suffixes[k].empty() ? stem + s : stem + s + suffixes[k],
                          kPalette[k % 6]);
    }
    if (series.size() > 1) canvas.legend(legend);
    files.push_back(PlotFile{stem + s + ".svg", canvas.finish()});
  }
  return files;
}

PlotFile taskspace_plot(const Trace& trace, int n) {
  ExperimentConfig cfg = config_from_json(trace.config);
  if (n != 3)
    throw std::runtime_error("taskspace plot needs a 3-joint trace");
  // Achieved end-effector path from FK of the logged joint angles.
  std::vector<double> xs, ys;
  for (size_t r = 0; r < trace.rows(); ++r) {
    Eigen::Vector3d q(trace.col("q1")[r], trace.col("q2")[r],
                      trace.col("q3")[r]);
    const Eigen::Vector2d p =
        planar_fk(q, cfg.plant.lengths) + cfg.plant.base_offset;
    xs.push_back(p.x());
    ys.push_back(p.y());
  }
  // Commanded circles from the config.
  std::vector<std::vector<double>> cx, cy;
  for (const Segment& s : cfg.segments) {
    const auto* c = std::get_if<CircleSegment>(&s.gen);
    if (c == nullptr) continue;
    std::vector<double> px, py;
    for (int k = 0; k <= 360; ++k) {
      const double th = 2.0 * M_PI * k / 360.0;
      px.push_back(c->center.x() + c->radius * std::cos(th));
      py.push_back(c->center.y() + c->radius * std::sin(th));
    }
    cx.push_back(std::move(px));
    cy.push_back(std::move(py));
  }
  std::vector<const std::vector<double>*> allx{&xs}, ally{&ys};
  for (const auto& v : cx) allx.push_back(&v);
  for (const auto& v : cy) ally.push_back(&v);
  Range xr = trace.rows() || !cx.empty() ? data_range(allx) : Range{-1.0, 1.0};
  Range yr = trace.rows() || !cy.empty() ? data_range(ally) : Range{-1.0, 1.0};
  SvgCanvas canvas("taskspace", xr, yr, "x [m]", "y [m]");
  std::vector<std::pair<std::string, std::string>> legend;
  for (size_t k = 0; k < cx.size(); ++k) {
    canvas.polyline(cx[k], cy[k], kPalette[(k + 1) % 6], "6,4");
    legend.emplace_back("commanded " + std::to_string(k + 1),
                        kPalette[(k + 1) % 6]);
  }
  canvas.polyline(xs, ys, kPalette[0]);
  legend.emplace_back("achieved", kPalette[0]);
  canvas.legend(legend);
  return PlotFile{"taskspace.svg", canvas.finish()};
}

}  // namespace

PlotKind plot_kind_from_name(const std::string& name) {
  if (name == "errors") return PlotKind::kErrors;
  if (name == "weights") return PlotKind::kWeights;
  if (name == "xi") return PlotKind::kXi;
  if (name == "taskspace") return PlotKind::kTaskspace;
  throw ValidationError("unknown plot kind '" + name +
                        "'; expected errors|weights|xi|taskspace");
}

std::vector<PlotFile> render_plots(const Trace& trace, PlotKind kind) {
  const int n = joint_count(trace);
  switch (kind) {
    case PlotKind::kErrors: {
      std::vector<PlotFile> files;
      for (int i = 1; i <= n; ++i) {
        const std::string s = std::to_string(i);
        require_column(trace, "e" + s + "_1");
        require_column(trace, "e" + s + "_2");
        static const std::vector<double> kEmpty;
        const bool empty = trace.rows() == 0;
        const std::vector<double>& t = empty ? kEmpty : trace.col("t");
        const std::vector<double>& e1 = empty ? kEmpty : trace.col("e" + s + "_1");
        const std::vector<double>& e2 = empty ? kEmpty : trace.col("e" + s + "_2");
        Range xr = empty ? Range{0.0, 1.0} : data_range({&t});
        Range yr = empty ? Range{-1.0, 1.0} : data_range({&e1, &e2});
        SvgCanvas canvas("errors joint " + s, xr, yr, "t [s]", "tracking error");
        canvas.polyline(t, e1, kPalette[0]);
        canvas.polyline(t, e2, kPalette[1]);
        canvas.legend({{"e" + s + "_1 [rad]", kPalette[0]},
                       {"e" + s + "_2 [rad/s]", kPalette[1]}});
        files.push_back(PlotFile{"errors" + s + ".svg", canvas.finish()});
      }
      return files;
    }
    case PlotKind::kWeights:
      return per_joint_plot(trace, n, "What", "critic weights",
                            {"_1", "_2", "_3", "_4"});
    case PlotKind::kXi:
      return per_joint_plot(trace, n, "xi", "TDE error", {""});
    case PlotKind::kTaskspace:
      return {taskspace_plot(trace, n)};
  }
  return {};
}

}  // namespace iadp
