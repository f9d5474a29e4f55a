// SPDX-License-Identifier: Apache-2.0
//
// Plot-ready output: 2-D slices of partitions and simple line charts, both
// as standalone SVG documents.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mpcert/bnb_cert.hpp"
#include "mpcert/problem.hpp"

namespace mpcert {

using Point2 = std::pair<double, double>;

/// The slice of a region on the plane through `anchor` spanned by parameter
/// axes (ax, ay), clipped to the box. Curved (quadratic) boundaries become
/// chords between their crossings of the clipped polygon's edges, after the
/// edges are subdivided `refine` times. Empty when the slice has no area.
std::vector<Point2> SlicePolygon(const Region& region, const Box& box, int ax, int ay,
                                 const Vector& anchor, int refine = 6);

struct SliceOptions {
  int ax = 0;
  int ay = 1;
  Vector anchor;  // values of the fixed parameters; empty selects the box center
  bool color_by_nodes = true;
  int width = 640;
};

/// SVG with one polygon per region meeting the slice. Throws
/// std::invalid_argument for fewer than two parameters or bad axes.
std::string SliceSvg(const MpProblem& problem, const CertPartition& partition,
                     const SliceOptions& options, int* polygons = nullptr);

struct Series {
  std::string name;
  std::vector<Point2> points;
  bool dashed = false;
};

std::string LineChartSvg(const std::string& title, const std::string& x_label,
                         const std::string& y_label, const std::vector<Series>& series);

}  // namespace mpcert
