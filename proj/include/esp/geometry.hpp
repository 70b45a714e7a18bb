#pragma once

#include <array>
#include <optional>
#include <span>

#include "esp/types.hpp"

namespace esp {

/// Normalize an angle to [-pi, pi).
double wrap_angle(double a);

/// Bounding box placed at a pose: a convex quadrilateral whose centroid is
/// the pose position and whose long axis follows the pose heading.
struct OrientedFootprint {
  // CCW order: front-left, rear-left, rear-right, front-right.
  std::array<Point2, 4> corners;
};

OrientedFootprint footprint_at(const FrameState& pose, const BoundingBox2D& box);

/// True iff the closed segments a1-a2 and b1-b2 share at least one point.
/// Collinear overlap counts as intersecting.
bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2);

/// Strict interior test (boundary points are not "inside").
bool point_in_footprint(const OrientedFootprint& fp, Point2 p);

/// True iff any footprint edge intersects any polyline segment, or a
/// polyline vertex lies strictly inside the footprint.
bool footprint_crosses_polyline(const OrientedFootprint& fp, const Polyline& poly);

/// Lane Match Time: the t of the earliest frame whose footprint crosses the
/// target boundary. Frame resolution, no sub-frame interpolation; frames
/// with valid = false are skipped, never interpolated. Absence of a
/// crossing is a value, not an error.
std::optional<double> lamt(std::span<const FrameState> traj, const BoundingBox2D& box,
                           const Polyline& target_boundary);

struct PolylineProjection {
  double station = 0.0;         // arc length along the polyline to the closest point
  double signed_lateral = 0.0;  // signed offset, positive left of polyline direction
  double distance = 0.0;        // unsigned distance to the closest point
  Point2 closest;
  Point2 tangent;  // unit tangent of the closest segment
};

PolylineProjection project_to_polyline(const Polyline& poly, Point2 p);

/// Id of the lane whose boundary pair encloses p; the one with the closest
/// centerline when p sits on a shared boundary. Lanes with fewer than two
/// adjacent boundaries are never reported.
std::optional<int> lane_containing(const LaneSet& lanes, Point2 p);

/// The boundary separating two lane ids, or nullptr when they are not
/// adjacent.
const LaneBoundary* boundary_between(const LaneSet& lanes, int lane1, int lane2);

/// Dead-band under which a trajectory's net lateral drift is treated as
/// noise and the nearer boundary is chosen instead.
constexpr double kDriftDeadBand = 0.2;

/// The boundary of the lane containing the trajectory start, on the side
/// toward which the trajectory's net lateral displacement points; the
/// nearer boundary when the net displacement is under kDriftDeadBand.
/// Throws std::runtime_error when the start pose lies outside every lane
/// (malformed token).
const LaneBoundary& select_target_boundary(std::span<const FrameState> traj,
                                           const LaneSet& lanes);

/// Proper rigid motion: rotate by theta about the origin, then translate.
struct RigidTransform {
  double dx = 0.0;
  double dy = 0.0;
  double theta = 0.0;

  Point2 apply(Point2 p) const;
  FrameState apply(const FrameState& f) const;

  /// Transform taking world coordinates into the frame anchored at the
  /// given pose (pose maps to the origin with heading 0).
  static RigidTransform to_frame_of(double x, double y, double heading);
};

Polyline transformed(const Polyline& poly, const RigidTransform& rt);
LaneSet transformed(const LaneSet& lanes, const RigidTransform& rt);
std::vector<FrameState> transformed(std::span<const FrameState> traj, const RigidTransform& rt);
Token transformed(const Token& token, const RigidTransform& rt);

}  // namespace esp
