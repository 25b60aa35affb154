#pragma once

// Small polygons with known descriptors, shared by descriptor tests.

#include <vector>

#include "mapalign/geometry.hpp"

namespace mapalign::testing {

Polygon rectangle(double w, double h, const Point2& at = Point2::Zero());

// Closed polygon from edge directions (degrees) and lengths, walked from the
// origin.
Polygon walk(const std::vector<double>& directions_deg, const std::vector<double>& lengths);

// Hexagon turning 90 and 30 degrees in turn (interior angles 90, 150, ...),
// with edge lengths chosen so it closes yet has no rotational symmetry.
Polygon alternating_hexagon();

// Equilateral pentagon: a unit square with an equilateral roof.
Polygon house();

Polygon regular_pentagon();

}  // namespace mapalign::testing
