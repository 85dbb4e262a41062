#pragma once

// Deterministic SVG plots with a fixed 800x600 view box.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parafrac/csv.hpp"
#include "parafrac/energy_probe.hpp"
#include "parafrac/experiment.hpp"
#include "parafrac/parabolic_cover.hpp"

namespace parafrac {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool connect = false;
};

struct PlotLine {
  double slope = 0.0;
  double intercept = 0.0;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::optional<PlotLine> fit;
  std::optional<double> horizontal;  // reference level, e.g. an oracle value
  std::string annotation;
};

/// Throws ParameterError when no series holds a finite point.
std::string render_svg(const PlotSpec& spec);

/// log2 N_k against k with the fitted line; annotated with the estimated dimension.
std::string plot_ledger(const ScalingLedger& ledger);

/// log10 partial sum against mesh level, one curve per beta.
std::string plot_energy(std::span<const EnergyReport> reports);

/// Per-replica estimates with the oracle value; energy runs plot their curves.
std::string plot_run(const RunRecord& run);

/// Chooses a plot from the columns of a CSV written by the toolkit
/// (ledger, energy, results or kernel sweep tables).
std::string plot_csv(const CsvTable& table);

}  // namespace parafrac
