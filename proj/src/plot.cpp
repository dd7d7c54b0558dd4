#include "gradbench/bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace gradbench {
namespace {

struct Curve {
  std::string label;
  std::vector<std::pair<double, double>> points;  // (epoch, val_loss), all finite and positive
  bool diverged = false;
  std::size_t last_epoch = 0;
};

struct Chart {
  std::string title;
  std::vector<Curve> curves;
};

constexpr std::array<const char*, 12> kPalette{
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string xml_escape(std::string_view s) {
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

std::string curve_label(const CsvRow& r, bool with_optimizer) {
  std::ostringstream s;
  if (with_optimizer) s << r.optimizer << ' ';
  s << "lr=" << r.lr;
  if (r.momentum) s << " m=" << *r.momentum;
  s << " B=" << r.batch_size;
  return s.str();
}

// Groups rows by run id; rows are expected in (run_id, epoch) order but
// this does not rely on it.
std::map<std::string, std::vector<const CsvRow*>> by_run(const std::vector<CsvRow>& rows) {
  std::map<std::string, std::vector<const CsvRow*>> runs;
  for (const CsvRow& r : rows) runs[r.run_id].push_back(&r);
  for (auto& [id, v] : runs)
    std::stable_sort(v.begin(), v.end(), [](auto* a, auto* b) { return a->epoch < b->epoch; });
  return runs;
}

Curve make_curve(const std::vector<const CsvRow*>& run, bool with_optimizer) {
  Curve c;
  c.label = curve_label(*run.front(), with_optimizer);
  for (const CsvRow* r : run) {
    c.last_epoch = std::max(c.last_epoch, r->epoch);
    if (r->diverged) {
      c.diverged = true;
      break;
    }
    if (std::isfinite(r->val_loss) && r->val_loss > 0.0) {
      c.points.emplace_back(static_cast<double>(r->epoch), r->val_loss);
    }
  }
  if (c.diverged) c.label += " (diverged)";
  return c;
}

void render(const Chart& chart, const std::filesystem::path& path) {
  constexpr double kPlotW = 720, kLeft = 80, kTop = 50, kPlotH = 460, kLegendW = 300;
  const double legend_h = 30.0 + 15.0 * static_cast<double>(chart.curves.size());
  const double height = std::max(kTop + kPlotH + 60, kTop + legend_h + 20);
  const double width = kLeft + kPlotW + 30 + kLegendW;

  double x_max = 1, y_lo = INFINITY, y_hi = -INFINITY;
  for (const Curve& c : chart.curves) {
    x_max = std::max(x_max, static_cast<double>(c.last_epoch));
    for (auto [x, y] : c.points) {
      y_lo = std::min(y_lo, std::log10(y));
      y_hi = std::max(y_hi, std::log10(y));
    }
  }
  if (!(y_lo <= y_hi)) {
    y_lo = -1;
    y_hi = 1;
  }
  y_lo = std::floor(y_lo);
  y_hi = std::ceil(y_hi);
  if (y_hi - y_lo < 1) y_hi = y_lo + 1;

  auto px = [&](double x) { return kLeft + (x - 1) / std::max(x_max - 1, 1.0) * kPlotW; };
  auto py = [&](double y) { return kTop + (y_hi - std::log10(y)) / (y_hi - y_lo) * kPlotH; };

  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot open '" + path.string() + "' for writing");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << fmt(kLeft + kPlotW / 2) << "\" y=\"25\" font-size=\"15\" "
      << "text-anchor=\"middle\">" << xml_escape(chart.title) << "</text>\n";

  // Axes, decade grid lines on the loss axis, five ticks on the epoch axis.
  out << "<g stroke=\"#ddd\">\n";
  for (double e = y_lo; e <= y_hi; e += 1) {
    const double y = kTop + (y_hi - e) / (y_hi - y_lo) * kPlotH;
    out << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(kLeft + kPlotW)
        << "\" y2=\"" << fmt(y) << "\"/>\n";
  }
  out << "</g>\n";
  for (double e = y_lo; e <= y_hi; e += 1) {
    const double y = kTop + (y_hi - e) / (y_hi - y_lo) * kPlotH;
    out << "<text x=\"" << fmt(kLeft - 6) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\">1e" << static_cast<int>(e) << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double epoch = 1 + (x_max - 1) * i / 4.0;
    out << "<text x=\"" << fmt(px(epoch)) << "\" y=\"" << fmt(kTop + kPlotH + 16)
        << "\" text-anchor=\"middle\">" << static_cast<long>(std::lround(epoch)) << "</text>\n";
  }
  out << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(kPlotW)
      << "\" height=\"" << fmt(kPlotH) << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << fmt(kLeft + kPlotW / 2) << "\" y=\"" << fmt(kTop + kPlotH + 36)
      << "\" text-anchor=\"middle\">epoch</text>\n"
      << "<text transform=\"translate(20," << fmt(kTop + kPlotH / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">validation MSE (log scale)</text>\n";

  const double legend_x = kLeft + kPlotW + 30;
  for (std::size_t i = 0; i < chart.curves.size(); ++i) {
    const Curve& c = chart.curves[i];
    const char* color = kPalette[i % kPalette.size()];
    const char* dash = (i / kPalette.size()) % 2 == 1 ? " stroke-dasharray=\"5,3\"" : "";
    if (!c.points.empty()) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\"" << dash
          << " points=\"";
      for (auto [x, y] : c.points) out << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
      out << "\"/>\n";
    }
    if (c.diverged) {
      // Cross at the last plotted point, or on the top edge when nothing was plotted.
      const double cx = c.points.empty() ? px(static_cast<double>(c.last_epoch))
                                         : px(c.points.back().first);
      const double cy = c.points.empty() ? kTop : py(c.points.back().second);
      out << "<path class=\"diverged\" d=\"M" << fmt(cx - 5) << ',' << fmt(cy - 5) << " L"
          << fmt(cx + 5) << ',' << fmt(cy + 5) << " M" << fmt(cx - 5) << ',' << fmt(cy + 5)
          << " L" << fmt(cx + 5) << ',' << fmt(cy - 5) << "\" stroke=\"" << color
          << "\" stroke-width=\"2\"/>\n";
    }
    const double ly = kTop + 10 + 15.0 * static_cast<double>(i);
    out << "<line x1=\"" << fmt(legend_x) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(legend_x + 20) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << dash << "/>\n"
        << "<text x=\"" << fmt(legend_x + 26) << "\" y=\"" << fmt(ly + 4) << "\">"
        << xml_escape(c.label) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw CsvError("write to '" + path.string() + "' failed");
}

}  // namespace

GroupBy parse_group_by(std::string_view name) {
  if (name == "optimizer") return GroupBy::Optimizer;
  if (name == "batch") return GroupBy::Batch;
  throw std::invalid_argument("unknown group-by '" + std::string(name) + "'");
}

std::vector<std::filesystem::path> plot_curves(const std::filesystem::path& csv_path,
                                               const std::filesystem::path& out_dir,
                                               GroupBy group_by) {
  const std::vector<CsvRow> rows = read_csv(csv_path);
  const auto runs = by_run(rows);
  std::filesystem::create_directories(out_dir);

  std::vector<std::filesystem::path> written;
  auto emit = [&](const Chart& chart, const std::string& file) {
    const auto path = out_dir / file;
    render(chart, path);
    written.push_back(path);
  };

  if (group_by == GroupBy::Batch) {
    std::map<std::size_t, Chart> charts;
    for (const auto& [id, run] : runs) {
      Chart& c = charts[run.front()->batch_size];
      c.title = "Validation MSE, batch size " + std::to_string(run.front()->batch_size);
      c.curves.push_back(make_curve(run, true));
    }
    for (const auto& [b, chart] : charts) emit(chart, "batch_" + std::to_string(b) + ".svg");
    return written;
  }

  // Optimizer charts follow the canonical optimizer order.
  std::map<OptimizerKind, Chart> per_opt;
  for (const auto& [id, run] : runs) {
    const OptimizerKind kind = parse_optimizer_kind(run.front()->optimizer);
    Chart& c = per_opt[kind];
    c.title = "Validation MSE, " + run.front()->optimizer;
    c.curves.push_back(make_curve(run, false));
  }
  for (const auto& [kind, chart] : per_opt) emit(chart, std::string(to_string(kind)) + ".svg");

  auto family = [&](std::string title, std::initializer_list<OptimizerKind> members,
                    std::size_t min_present, const std::string& file) {
    Chart chart;
    chart.title = std::move(title);
    std::size_t present = 0;
    for (OptimizerKind k : members) {
      if (!per_opt.contains(k)) continue;
      ++present;
      for (const auto& [id, run] : runs)
        if (run.front()->optimizer == to_string(k)) chart.curves.push_back(make_curve(run, true));
    }
    if (present >= min_present) emit(chart, file);
  };
  family("Validation MSE across constant LR optimizers",
         {OptimizerKind::SGD, OptimizerKind::Momentum, OptimizerKind::NAG}, 2, "constant_lr.svg");
  family("Validation MSE across adaptive LR optimizers",
         {OptimizerKind::Adagrad, OptimizerKind::RMSProp, OptimizerKind::Adadelta,
          OptimizerKind::Adam},
         2, "adaptive_lr.svg");
  family("Validation MSE across Adam and Nesterov", {OptimizerKind::Adam, OptimizerKind::NAG}, 2,
         "adam_vs_nesterov.svg");
  return written;
}

}  // namespace gradbench
