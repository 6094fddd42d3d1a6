#pragma once

#include "ifcmcp/geometry.hpp"

#include <span>
#include <vector>

namespace ifcmcp {

/// Roof surface generated by a weighted straight skeleton.
///
/// Every outline edge spawns a plane rising into the polygon; an edge weight
/// of 1 gives the full slope, 0 a vertical gable end. The wavefront is
/// advanced event by event (edge collapses and reflex-vertex splits) and the
/// strip each wavefront edge sweeps between two events is emitted as roof
/// surface. The result is a closed, outward-oriented TriMesh whose base face
/// lies at `base_z`.
///
/// Throws SlopeOutOfRange unless 5 <= slope_deg <= 85 and SkeletonFailure
/// when the wavefront does not collapse cleanly.
TriMesh hip_roof_solid(const Polygon2& outline, double slope_deg, double base_z);

TriMesh weighted_roof_solid(const Polygon2& outline, std::span<const double> edge_weights,
                            double slope_deg, double base_z);

/// Gable ends: edges perpendicular to the longest outline edge get weight 0.
std::vector<double> gable_edge_weights(const Polygon2& outline);

/// Flat prism over the outline from base_z up by `thickness`.
TriMesh flat_roof_solid(const Polygon2& outline, double base_z, double thickness);

} // namespace ifcmcp
