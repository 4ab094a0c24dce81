#pragma once

#include <string>

#include "waterline/metrics.hpp"

namespace waterline {

// Renders one or two level series as a static SVG: shared date axis, meter
// axis, polyline + circle markers per series, legend. Output depends only on
// the inputs (no timestamps), so reruns are byte-identical.
void write_plot_svg(const TimeSeries& estimates, const TimeSeries* reference,
                    const std::string& path);

}  // namespace waterline
