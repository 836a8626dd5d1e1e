#pragma once

#include <string>
#include <vector>

#include "iadp/harness.hpp"

namespace iadp {

enum class PlotKind { kErrors, kWeights, kXi, kTaskspace };

PlotKind plot_kind_from_name(const std::string& name);

struct PlotFile {
  std::string filename;
  std::string svg;
};

/// Renders deterministic SVG plots from a trace: fixed canvas, fixed fonts,
/// fixed tick policy, data formatted with the trace's own number formatter.
/// errors/weights/xi produce one file per joint, taskspace a single overlay
/// of the commanded circles and the achieved end-effector path.
std::vector<PlotFile> render_plots(const Trace& trace, PlotKind kind);

}  // namespace iadp
