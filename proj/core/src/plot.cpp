#include "parafrac/plot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "parafrac/errors.hpp"
#include "parafrac/stats.hpp"

namespace parafrac {
namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 600.0;
constexpr double kLeft = 90.0;
constexpr double kRight = 40.0;
constexpr double kTop = 60.0;
constexpr double kBottom = 70.0;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string xml(std::string_view s) {
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

std::string num(double v) { return fmt::format("{:.2f}", v); }

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (hi - lo < 1e-12) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double m = 0.05 * (hi - lo);
    lo -= m;
    hi += m;
  }
};

}  // namespace

std::string render_svg(const PlotSpec& spec) {
  Range xr, yr;
  bool any = false;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xr.add(s.x[i]);
        yr.add(s.y[i]);
        any = true;
      }
    }
  }
  if (!any) throw ParameterError("plot needs at least one finite point");
  if (spec.horizontal) yr.add(*spec.horizontal);
  xr.pad();
  yr.pad();
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"#ffffff\"/>\n";
  s += fmt::format("<text x=\"400\" y=\"32\" font-family=\"sans-serif\" font-size=\"18\" "
                   "text-anchor=\"middle\">{}</text>\n", xml(spec.title));
  s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
                   num(kLeft), num(kTop), num(pw), num(ph));
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#000000\"/>\n", num(px(fx)),
                     num(kTop + ph), num(kTop + ph + 6));
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
                     "text-anchor=\"middle\">{}</text>\n", num(px(fx)), num(kTop + ph + 22), num(fx));
    s += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#000000\"/>\n",
                     num(kLeft - 6), num(py(fy)), num(kLeft));
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
                     "text-anchor=\"end\">{}</text>\n", num(kLeft - 10), num(py(fy) + 4), num(fy));
  }
  s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" "
                   "text-anchor=\"middle\">{}</text>\n", num(kLeft + pw / 2), num(kHeight - 20),
                   xml(spec.x_label));
  s += fmt::format("<text x=\"24\" y=\"{0}\" font-family=\"sans-serif\" font-size=\"14\" "
                   "text-anchor=\"middle\" transform=\"rotate(-90 24 {0})\">{1}</text>\n",
                   num(kTop + ph / 2), xml(spec.y_label));

  if (spec.horizontal) {
    s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#555555\" "
                     "stroke-dasharray=\"6 4\"/>\n", num(kLeft), num(py(*spec.horizontal)),
                     num(kLeft + pw), num(py(*spec.horizontal)));
  }
  if (spec.fit) {
    const auto& f = *spec.fit;
    s += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\" "
                     "stroke-width=\"1.5\"/>\n", num(px(xr.lo)), num(py(f.intercept + f.slope * xr.lo)),
                     num(px(xr.hi)), num(py(f.intercept + f.slope * xr.hi)));
  }
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const auto& ser = spec.series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    std::string poly;
    for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
      if (!std::isfinite(ser.x[i]) || !std::isfinite(ser.y[i])) continue;
      s += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"3.5\" fill=\"{}\"/>\n", num(px(ser.x[i])),
                       num(py(ser.y[i])), color);
      poly += fmt::format("{}{},{}", poly.empty() ? "" : " ", num(px(ser.x[i])), num(py(ser.y[i])));
    }
    if (ser.connect && !poly.empty()) {
      s += fmt::format("<polyline points=\"{}\" fill=\"none\" stroke=\"{}\"/>\n", poly, color);
    }
    if (!ser.label.empty()) {
      const double ly = kTop + 18.0 + 16.0 * static_cast<double>(k);
      s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" "
                       "fill=\"{}\">{}</text>\n", num(kLeft + 12), num(ly), color, xml(ser.label));
    }
  }
  if (!spec.annotation.empty()) {
    s += fmt::format("<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\" "
                     "text-anchor=\"end\">{}</text>\n", num(kLeft + pw - 10), num(kTop + ph - 12),
                     xml(spec.annotation));
  }
  s += "</svg>\n";
  return s;
}

std::string plot_ledger(const ScalingLedger& ledger) {
  if (ledger.levels.empty()) throw ParameterError("plot needs a non-empty ledger");
  PlotSeries ser{"N_k", {}, {}, false};
  for (std::size_t i = 0; i < ledger.levels.size(); ++i) {
    ser.x.push_back(ledger.levels[i]);
    ser.y.push_back(std::log2(static_cast<double>(ledger.counts[i])));
  }
  PlotSpec spec;
  spec.title = fmt::format("occupancy, alpha = {}", ledger.alpha);
  spec.x_label = "level k";
  spec.y_label = "log2 N_k";
  const double gauge = std::max(ledger.alpha, 1.0);
  double value = 0.0;
  try {
    value = estimate_dimension(ledger).value;
  } catch (const InsufficientDataError&) {
    value = ser.x.size() >= 2 ? stats::least_squares(ser.x, ser.y).slope * gauge : 0.0;
  }
  if (ser.x.size() >= 2) {
    const auto f = stats::least_squares(ser.x, ser.y);
    spec.fit = PlotLine{f.slope, f.intercept};
  }
  spec.annotation = fmt::format("slope {:.2f}", value);
  spec.series.push_back(std::move(ser));
  return render_svg(spec);
}

std::string plot_energy(std::span<const EnergyReport> reports) {
  if (reports.empty()) throw ParameterError("plot needs at least one energy report");
  PlotSpec spec;
  spec.title = "energy partial sums";
  spec.x_label = "mesh level";
  spec.y_label = "log10 partial sum";
  for (const auto& r : reports) {
    PlotSeries ser{fmt::format("beta {:.3f} ({})", r.beta, to_string(r.verdict)), {}, {}, true};
    for (std::size_t i = 0; i < r.levels.size(); ++i) {
      ser.x.push_back(r.levels[i]);
      ser.y.push_back(r.partial_sums[i] > 0.0 ? std::log10(r.partial_sums[i]) : NAN);
    }
    spec.series.push_back(std::move(ser));
  }
  return render_svg(spec);
}

std::string plot_run(const RunRecord& run) {
  if (run.kind == ExperimentKind::energy_threshold && !run.energy.empty()) return plot_energy(run.energy);
  PlotSpec spec;
  spec.title = fmt::format("{} replicas", to_string(run.kind));
  spec.x_label = "replica";
  spec.y_label = "estimate";
  PlotSeries ser{"estimate", {}, {}, false};
  for (const auto& r : run.replicas) {
    if (!r.ok) continue;
    ser.x.push_back(static_cast<double>(r.index));
    ser.y.push_back(r.value);
  }
  if (ser.x.empty()) throw ParameterError("plot needs at least one successful replica");
  if (run.oracle && run.oracle->is_value()) {
    spec.horizontal = run.oracle->value();
    spec.annotation = fmt::format("mean {:.3f}, oracle {:.3f}", run.mean, run.oracle->value());
  } else {
    spec.annotation = fmt::format("mean {:.3f}", run.mean);
  }
  spec.series.push_back(std::move(ser));
  return render_svg(spec);
}

std::string plot_csv(const CsvTable& table) {
  if (table.empty()) throw ParameterError("plot needs a non-empty table");
  auto col = [&](std::string_view name) {
    std::vector<double> v;
    const auto c = table.column(name);
    for (const auto& r : table.rows()) v.push_back(std::stod(r[c]));
    return v;
  };
  if (table.has_column("k") && table.has_column("N_k")) {
    // First replica only.
    ScalingLedger ledger;
    const auto kc = table.column("k");
    const auto nc = table.column("N_k");
    const auto ac = table.column("alpha");
    const bool has_rep = table.has_column("replica");
    const std::string first = has_rep ? table.rows().front()[table.column("replica")] : "";
    ledger.alpha = std::stod(table.rows().front()[ac]);
    for (const auto& r : table.rows()) {
      if (has_rep && r[table.column("replica")] != first) continue;
      ledger.levels.push_back(std::stoi(r[kc]));
      ledger.counts.push_back(std::stoull(r[nc]));
    }
    return plot_ledger(ledger);
  }
  if (table.has_column("beta") && table.has_column("level") && table.has_column("partial_sum")) {
    std::map<double, EnergyReport> by_beta;
    const auto bc = table.column("beta");
    const auto lc = table.column("level");
    const auto sc = table.column("partial_sum");
    const bool has_v = table.has_column("verdict");
    for (const auto& r : table.rows()) {
      auto& rep = by_beta[std::stod(r[bc])];
      rep.beta = std::stod(r[bc]);
      rep.levels.push_back(std::stoi(r[lc]));
      rep.partial_sums.push_back(std::stod(r[sc]));
      if (has_v) {
        const auto& v = r[table.column("verdict")];
        rep.verdict = v == "converging" ? Verdict::converging
                      : v == "diverging" ? Verdict::diverging
                                         : Verdict::inconclusive;
      }
    }
    std::vector<EnergyReport> reps;
    for (auto& [b, r] : by_beta) reps.push_back(std::move(r));
    return plot_energy(reps);
  }
  if (table.has_column("estimate") && (table.has_column("tau") || table.has_column("delta_norm"))) {
    const bool tau = table.has_column("variable") && table.rows().front()[table.column("variable")] == "tau";
    auto xs = col(tau ? "tau" : "delta_norm");
    auto ys = col("estimate");
    PlotSeries ser{"kernel", {}, {}, true};
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ser.x.push_back(std::log2(xs[i]));
      ser.y.push_back(std::log2(ys[i]));
    }
    PlotSpec spec;
    spec.title = "kernel sweep";
    spec.x_label = tau ? "log2 |tau|" : "log2 ||delta||";
    spec.y_label = "log2 estimate";
    const auto f = stats::least_squares(ser.x, ser.y);
    spec.fit = PlotLine{f.slope, f.intercept};
    spec.annotation = fmt::format("slope {:.2f}", f.slope);
    spec.series.push_back(std::move(ser));
    return render_svg(spec);
  }
  if (table.has_column("replica") && table.has_column("value") && table.has_column("status")) {
    PlotSpec spec;
    spec.title = "replica estimates";
    spec.x_label = "replica";
    spec.y_label = "estimate";
    PlotSeries ser{"estimate", {}, {}, false};
    const auto rc = table.column("replica");
    const auto vc = table.column("value");
    const auto stc = table.column("status");
    for (const auto& r : table.rows()) {
      if (r[stc] != "ok") continue;
      ser.x.push_back(std::stod(r[rc]));
      ser.y.push_back(std::stod(r[vc]));
    }
    spec.series.push_back(std::move(ser));
    return render_svg(spec);
  }
  throw InputError("csv columns do not match any known plot");
}

}  // namespace parafrac
