#include "esp/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace esp {

namespace {

constexpr double kPi = 3.14159265358979323846;

double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(Point2 a, Point2 b, Point2 p) {
  // p assumed collinear with a-b; checks the closed bounding range.
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // (-pi, pi]
  if (w >= kPi) w -= 2.0 * kPi;
  return w;
}

OrientedFootprint footprint_at(const FrameState& pose, const BoundingBox2D& box) {
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  const double hl = box.length / 2.0;
  const double hw = box.width / 2.0;
  auto corner = [&](double dl, double dw) {
    return Point2{pose.x + dl * c - dw * s, pose.y + dl * s + dw * c};
  };
  return OrientedFootprint{{corner(hl, hw), corner(-hl, hw), corner(-hl, -hw), corner(hl, -hw)}};
}

bool segments_intersect(Point2 a1, Point2 a2, Point2 b1, Point2 b2) {
  const double d1 = cross(b1, b2, a1);
  const double d2 = cross(b1, b2, a2);
  const double d3 = cross(a1, a2, b1);
  const double d4 = cross(a1, a2, b2);

  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
      ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) {
    return true;
  }
  if (d1 == 0 && on_segment(b1, b2, a1)) return true;
  if (d2 == 0 && on_segment(b1, b2, a2)) return true;
  if (d3 == 0 && on_segment(a1, a2, b1)) return true;
  if (d4 == 0 && on_segment(a1, a2, b2)) return true;
  return false;
}

bool point_in_footprint(const OrientedFootprint& fp, Point2 p) {
  // Corners are CCW by construction; strict interior only.
  for (int i = 0; i < 4; ++i) {
    if (cross(fp.corners[i], fp.corners[(i + 1) % 4], p) <= 0.0) return false;
  }
  return true;
}

bool footprint_crosses_polyline(const OrientedFootprint& fp, const Polyline& poly) {
  for (size_t i = 0; i + 1 < poly.size(); ++i) {
    for (int e = 0; e < 4; ++e) {
      if (segments_intersect(fp.corners[e], fp.corners[(e + 1) % 4], poly[i], poly[i + 1])) {
        return true;
      }
    }
  }
  for (const Point2& v : poly) {
    if (point_in_footprint(fp, v)) return true;
  }
  return false;
}

std::optional<double> lamt(std::span<const FrameState> traj, const BoundingBox2D& box,
                           const Polyline& target_boundary) {
  for (const FrameState& f : traj) {
    if (!f.valid) continue;
    if (footprint_crosses_polyline(footprint_at(f, box), target_boundary)) {
      return f.t;
    }
  }
  return std::nullopt;
}

PolylineProjection project_to_polyline(const Polyline& poly, Point2 p) {
  PolylineProjection best;
  best.distance = std::numeric_limits<double>::infinity();

  double cumulative = 0.0;
  for (size_t i = 0; i + 1 < poly.size(); ++i) {
    const Point2 a = poly[i];
    const Point2 b = poly[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    const double len = std::sqrt(len2);
    double u = 0.0;
    if (len2 > 0.0) {
      u = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
      u = std::clamp(u, 0.0, 1.0);
    }
    const Point2 q{a.x + u * dx, a.y + u * dy};
    const double d = std::hypot(p.x - q.x, p.y - q.y);
    if (d < best.distance) {
      best.distance = d;
      best.closest = q;
      best.station = cumulative + u * len;
      best.tangent = len > 0.0 ? Point2{dx / len, dy / len} : Point2{1.0, 0.0};
      const double side = dx * (p.y - a.y) - dy * (p.x - a.x);  // cross(dir, p-a)
      best.signed_lateral = sign_of(side) * d;
    }
    cumulative += len;
  }
  return best;
}

namespace {

// Signed lateral offsets (relative to a lane centerline) of a point and of
// the lane's adjacent boundaries near that point.
struct LaneLateral {
  double point_offset = 0.0;
  double lo = 0.0;  // smaller boundary offset
  double hi = 0.0;  // larger boundary offset
  int lo_index = -1;
  int hi_index = -1;
  bool ok = false;
};

LaneLateral lane_lateral(const LaneSet& lanes, int lane, Point2 p) {
  LaneLateral out;
  const Polyline& center = lanes.centerlines[static_cast<size_t>(lane)];
  const PolylineProjection proj = project_to_polyline(center, p);
  out.point_offset = proj.signed_lateral;

  bool have_first = false;
  for (size_t b = 0; b < lanes.boundaries.size(); ++b) {
    const LaneBoundary& lb = lanes.boundaries[b];
    if (lb.lane_a != lane && lb.lane_b != lane) continue;
    const PolylineProjection bp = project_to_polyline(lb.points, p);
    const double off = project_to_polyline(center, bp.closest).signed_lateral;
    if (!have_first) {
      out.lo = out.hi = off;
      out.lo_index = out.hi_index = static_cast<int>(b);
      have_first = true;
    } else if (off < out.lo) {
      out.lo = off;
      out.lo_index = static_cast<int>(b);
    } else if (off > out.hi) {
      out.hi = off;
      out.hi_index = static_cast<int>(b);
    }
  }
  out.ok = have_first && out.lo_index != out.hi_index;
  return out;
}

}  // namespace

std::optional<int> lane_containing(const LaneSet& lanes, Point2 p) {
  std::optional<int> best;
  double best_abs = std::numeric_limits<double>::infinity();
  for (int lane = 0; lane < static_cast<int>(lanes.centerlines.size()); ++lane) {
    const LaneLateral ll = lane_lateral(lanes, lane, p);
    if (!ll.ok) continue;
    if (ll.point_offset < ll.lo - 1e-9 || ll.point_offset > ll.hi + 1e-9) continue;
    const double a = std::abs(ll.point_offset);
    if (a < best_abs) {
      best_abs = a;
      best = lane;
    }
  }
  return best;
}

const LaneBoundary* boundary_between(const LaneSet& lanes, int lane1, int lane2) {
  for (const LaneBoundary& b : lanes.boundaries) {
    if ((b.lane_a == lane1 && b.lane_b == lane2) || (b.lane_a == lane2 && b.lane_b == lane1)) {
      return &b;
    }
  }
  return nullptr;
}

const LaneBoundary& select_target_boundary(std::span<const FrameState> traj,
                                           const LaneSet& lanes) {
  if (lanes.empty()) throw std::runtime_error("select_target_boundary: empty lane set");

  const FrameState* first = nullptr;
  const FrameState* last = nullptr;
  for (const FrameState& f : traj) {
    if (!f.valid) continue;
    if (!first) first = &f;
    last = &f;
  }
  if (!first) throw std::runtime_error("select_target_boundary: no valid frames");

  const Point2 start{first->x, first->y};
  const std::optional<int> lane = lane_containing(lanes, start);
  if (!lane) {
    throw std::runtime_error("select_target_boundary: start pose outside every lane");
  }

  const Polyline& center = lanes.centerlines[static_cast<size_t>(*lane)];
  const double off_first = project_to_polyline(center, start).signed_lateral;
  const double off_last = project_to_polyline(center, Point2{last->x, last->y}).signed_lateral;
  const double drift = off_last - off_first;

  const LaneLateral ll = lane_lateral(lanes, *lane, start);
  // lane_containing succeeded, so both boundary sides exist
  const int left = ll.hi_index;
  const int right = ll.lo_index;

  if (std::abs(drift) >= kDriftDeadBand) {
    return lanes.boundaries[static_cast<size_t>(drift > 0 ? left : right)];
  }
  const double d_left = project_to_polyline(lanes.boundaries[left].points, start).distance;
  const double d_right = project_to_polyline(lanes.boundaries[right].points, start).distance;
  return lanes.boundaries[static_cast<size_t>(d_left <= d_right ? left : right)];
}

Point2 RigidTransform::apply(Point2 p) const {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return Point2{p.x * c - p.y * s + dx, p.x * s + p.y * c + dy};
}

FrameState RigidTransform::apply(const FrameState& f) const {
  FrameState out = f;
  const Point2 p = apply(Point2{f.x, f.y});
  out.x = p.x;
  out.y = p.y;
  out.heading = wrap_angle(f.heading + theta);
  return out;
}

RigidTransform RigidTransform::to_frame_of(double x, double y, double heading) {
  RigidTransform rt;
  rt.theta = -heading;
  const double c = std::cos(rt.theta);
  const double s = std::sin(rt.theta);
  rt.dx = -(x * c - y * s);
  rt.dy = -(x * s + y * c);
  return rt;
}

Polyline transformed(const Polyline& poly, const RigidTransform& rt) {
  Polyline out;
  out.reserve(poly.size());
  for (Point2 p : poly) out.push_back(rt.apply(p));
  return out;
}

LaneSet transformed(const LaneSet& lanes, const RigidTransform& rt) {
  LaneSet out;
  out.centerlines.reserve(lanes.centerlines.size());
  for (const Polyline& c : lanes.centerlines) out.centerlines.push_back(transformed(c, rt));
  out.boundaries.reserve(lanes.boundaries.size());
  for (const LaneBoundary& b : lanes.boundaries) {
    out.boundaries.push_back(LaneBoundary{transformed(b.points, rt), b.lane_a, b.lane_b});
  }
  out.road_edges.reserve(lanes.road_edges.size());
  for (const Polyline& e : lanes.road_edges) out.road_edges.push_back(transformed(e, rt));
  return out;
}

std::vector<FrameState> transformed(std::span<const FrameState> traj, const RigidTransform& rt) {
  std::vector<FrameState> out;
  out.reserve(traj.size());
  for (const FrameState& f : traj) out.push_back(rt.apply(f));
  return out;
}

namespace {

AgentTrack transformed_track(const AgentTrack& track, const RigidTransform& rt) {
  AgentTrack out = track;
  out.history = transformed(track.history, rt);
  if (track.future) out.future = transformed(*track.future, rt);
  return out;
}

}  // namespace

Token transformed(const Token& token, const RigidTransform& rt) {
  Token out = token;
  out.lanes = transformed(token.lanes, rt);
  out.ego = transformed_track(token.ego, rt);
  out.tv = transformed_track(token.tv, rt);
  for (size_t i = 0; i < token.evs.size(); ++i) out.evs[i] = transformed_track(token.evs[i], rt);
  for (RareObject& ro : out.infra.rare_objects) {
    const Point2 p = rt.apply(Point2{ro.x, ro.y});
    ro.x = p.x;
    ro.y = p.y;
  }
  return out;
}

}  // namespace esp
