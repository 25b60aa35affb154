#pragma once

// Hypothesis generation: face matching by shape descriptor, or by oriented
// minimum bounding box followed by rejection of non-similarity transforms.

#include <optional>
#include <string>
#include <vector>

#include "mapalign/arrangement.hpp"
#include "mapalign/geometry.hpp"

namespace mapalign {

struct DescriptorEntry {
  double corner_angle;  // interior angle, radians in (0, 2*pi)
  double edge_ratio;    // length of the edge leaving this corner / perimeter
};

// Corners of a face in counter-clockwise order with their descriptor
// entries. Vertices whose interior angle is within the corner tolerance of pi
// are not corners.
struct ShapeDescriptor {
  std::vector<DescriptorEntry> entries;
  std::vector<Point2> corners;

  std::size_t size() const { return entries.size(); }
};

struct MatchTolerances {
  double angle = 10.0 * kPi / 180.0;
  double ratio = 0.1;
  double corner = 5.0 * kPi / 180.0;
  bool use_angle = true;
  bool use_ratio = true;
};

enum class HypothesisKind { kExact, kOmbb };

// Maps map-1 coordinates into map-2 coordinates.
struct Hypothesis {
  Transform2 transform = Transform2::Identity();
  int source_face = 0;  // face in map 1
  int target_face = 0;  // face in map 2
  int shift = 0;
  HypothesisKind kind = HypothesisKind::kOmbb;
  std::optional<double> score;
};

ShapeDescriptor shape_descriptor(const Polygon& face, double corner_tolerance = 5.0 * kPi / 180.0);

// Cyclic shifts s with a[(k + s) % n] matching b[k] for every k. Empty when
// the corner counts differ.
std::vector<int> match_descriptors(const ShapeDescriptor& a, const ShapeDescriptor& b,
                                   const MatchTolerances& tol = {});

// Similarity hypotheses from corner correspondences of every matching face
// pair and shift, ordered by (source_face, target_face, shift).
std::vector<Hypothesis> generate_hypotheses_exact(const Arrangement& a1, const Arrangement& a2,
                                                  const MatchTolerances& tol = {},
                                                  unsigned threads = 1);

// Affine hypotheses from the four bounding-box corners of f_i, cyclically
// shifted by s, onto those of f_j: 4 * |F1| * |F2| of them unless a face is
// degenerate. Skipped faces are reported through `warnings` when given.
std::vector<Hypothesis> generate_hypotheses_ombb(const Arrangement& a1, const Arrangement& a2,
                                                 unsigned threads = 1,
                                                 std::vector<std::string>* warnings = nullptr);

// True when 1/thr_s < s_x/s_y < thr_s and the transform does not mirror.
bool is_acceptable_similarity(const Transform2& t, double thr_s);

// Keeps the acceptable hypotheses, preserving order.
std::vector<Hypothesis> reject_false_positives(const std::vector<Hypothesis>& hyps, double thr_s);

}  // namespace mapalign
