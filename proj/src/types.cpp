#include "esp/types.hpp"

#include <cmath>
#include <sstream>

#include "esp/geometry.hpp"
#include "esp/miner.hpp"

namespace esp {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kGridTol = 1e-6;
// Stored t_c is advisory; it must agree with the recomputed LaMT to within
// one frame, matching the file-format contract.
constexpr double kTcTol = 0.1 + 1e-9;

void check_frames(const std::vector<FrameState>& frames, int expected_count, double t_first,
                  const std::string& path, std::vector<std::string>& out) {
  if (static_cast<int>(frames.size()) != expected_count) {
    out.push_back(path + ": expected " + std::to_string(expected_count) + " frames");
    return;
  }
  for (size_t i = 0; i < frames.size(); ++i) {
    const FrameState& f = frames[i];
    const double expected_t = t_first + static_cast<double>(i) / 10.0;
    if (std::abs(f.t - expected_t) > kGridTol) {
      out.push_back(path + "[" + std::to_string(i) + "].t: off the 0.1 s grid");
      break;
    }
  }
  for (size_t i = 0; i < frames.size(); ++i) {
    const FrameState& f = frames[i];
    const std::string at = path + "[" + std::to_string(i) + "]";
    if (!(f.speed >= 0.0)) out.push_back(at + ".speed: negative");
    if (!(f.heading >= -kPi && f.heading < kPi)) out.push_back(at + ".heading: outside [-pi, pi)");
    if (!std::isfinite(f.x) || !std::isfinite(f.y)) out.push_back(at + ": non-finite position");
  }
}

void check_track(const AgentTrack& track, const std::string& path, bool future_required,
                 std::vector<std::string>& out) {
  if (!(track.bbox.length > 0.0)) out.push_back(path + ".bbox.length: must be > 0");
  if (!(track.bbox.width > 0.0)) out.push_back(path + ".bbox.width: must be > 0");

  check_frames(track.history, kHistoryFrames, -kHistoryHorizon, path + ".history", out);
  bool any_valid = false;
  for (const FrameState& f : track.history) any_valid = any_valid || f.valid;
  if (!any_valid) out.push_back(path + ".history: no valid frame");

  if (future_required && !track.future) {
    out.push_back(path + ".future: required for TV");
  }
  if (!future_required && track.future) {
    out.push_back(path + ".future: only the TV carries a ground-truth future");
  }
  if (track.future) {
    check_frames(*track.future, kFutureFrames, kFrameDt, path + ".future", out);
  }
}

void check_polyline(const Polyline& poly, const std::string& path,
                    std::vector<std::string>& out) {
  if (poly.size() < 2) {
    out.push_back(path + ": needs at least 2 points");
    return;
  }
  for (size_t i = 0; i + 1 < poly.size(); ++i) {
    if (std::hypot(poly[i + 1].x - poly[i].x, poly[i + 1].y - poly[i].y) <= 1e-9) {
      out.push_back(path + ": consecutive points coincide at index " + std::to_string(i));
      return;
    }
  }
}

}  // namespace

const AgentTrack* Token::cipv() const {
  for (const AgentTrack& t : evs) {
    if (t.role == AgentRole::CIPV) return &t;
  }
  return nullptr;
}

std::vector<std::string> validate_token(const Token& token) {
  std::vector<std::string> out;

  if (token.ego.role != AgentRole::Ego) out.push_back("ego.role: must be Ego");
  if (token.tv.role != AgentRole::TV) out.push_back("tv.role: must be TV");
  int cipv_count = 0;
  for (size_t i = 0; i < token.evs.size(); ++i) {
    const AgentTrack& t = token.evs[i];
    if (t.role == AgentRole::CIPV) {
      ++cipv_count;
    } else if (t.role != AgentRole::EV) {
      out.push_back("evs[" + std::to_string(i) + "].role: must be CIPV or EV");
    }
  }
  if (cipv_count > 1) out.push_back("evs: more than one CIPV");

  check_track(token.ego, "ego", false, out);
  check_track(token.tv, "tv", true, out);
  for (size_t i = 0; i < token.evs.size(); ++i) {
    check_track(token.evs[i], "evs[" + std::to_string(i) + "]", false, out);
  }

  const int lane_count = static_cast<int>(token.lanes.centerlines.size());
  for (size_t i = 0; i < token.lanes.centerlines.size(); ++i) {
    check_polyline(token.lanes.centerlines[i], "lanes.centerlines[" + std::to_string(i) + "]",
                   out);
  }
  for (size_t i = 0; i < token.lanes.boundaries.size(); ++i) {
    const LaneBoundary& b = token.lanes.boundaries[i];
    const std::string path = "lanes.boundaries[" + std::to_string(i) + "]";
    check_polyline(b.points, path, out);
    for (int lane : {b.lane_a, b.lane_b}) {
      if (lane != -1 && (lane < 0 || lane >= lane_count)) {
        out.push_back(path + ": references unknown lane id " + std::to_string(lane));
      }
    }
    if (b.lane_a == -1 && b.lane_b == -1) {
      out.push_back(path + ": separates no lanes");
    }
  }
  for (size_t i = 0; i < token.lanes.road_edges.size(); ++i) {
    check_polyline(token.lanes.road_edges[i], "lanes.road_edges[" + std::to_string(i) + "]", out);
  }

  for (size_t i = 0; i < token.infra.speed_monitors.size(); ++i) {
    const SpeedMonitor& m = token.infra.speed_monitors[i];
    const std::string path = "infra.speed_monitors[" + std::to_string(i) + "]";
    if (!(m.position_along_route >= 0.0)) out.push_back(path + ".position_along_route: negative");
    if (!(m.limit > 0.0)) out.push_back(path + ".limit: must be > 0");
  }
  for (size_t i = 0; i < token.infra.junctions.size(); ++i) {
    if (!(token.infra.junctions[i].distance_ahead >= 0.0)) {
      out.push_back("infra.junctions[" + std::to_string(i) + "].distance_ahead: negative");
    }
  }

  if (token.scene.vehicle_count < 0) out.push_back("scene.vehicle_count: negative");
  const int track_count = 2 + static_cast<int>(token.evs.size());
  if (token.scene.vehicle_count != track_count) {
    out.push_back("scene.vehicle_count: " + std::to_string(token.scene.vehicle_count) +
                  " does not match the " + std::to_string(track_count) + " agent tracks");
  }

  if (token.t_c) {
    if (!(*token.t_c > 0.0 && *token.t_c <= kFutureHorizon)) {
      out.push_back("t_c: outside (0, 5]");
    } else if (token.tv.future && out.empty()) {
      // t_c is a computed label, never free: recompute from geometry.
      const std::optional<double> recomputed =
          label_cutin_moment(*token.tv.future, token.tv.bbox, token.lanes);
      if (!recomputed) {
        out.push_back("t_c: present but the TV future never crosses the target boundary");
      } else if (std::abs(*recomputed - *token.t_c) > kTcTol) {
        std::ostringstream msg;
        msg << "t_c: stored " << *token.t_c << " but geometry gives " << *recomputed;
        out.push_back(msg.str());
      }
    }
  }

  return out;
}

std::vector<std::string> validate_prediction(const Prediction& pred) {
  std::vector<std::string> out;
  if (pred.modes.empty()) out.push_back("modes: K must be >= 1");
  for (size_t k = 0; k < pred.modes.size(); ++k) {
    const PredictionMode& m = pred.modes[k];
    const std::string path = "modes[" + std::to_string(k) + "]";
    if (static_cast<int>(m.trajectory.size()) != kFutureFrames) {
      out.push_back(path + ".trajectory: expected " + std::to_string(kFutureFrames) + " frames");
    }
    if (m.score && !(*m.score >= 0.0 && *m.score <= 1.0)) {
      out.push_back(path + ".score: outside [0, 1]");
    }
  }
  return out;
}

std::string to_string(AgentCategory c) {
  switch (c) {
    case AgentCategory::car: return "car";
    case AgentCategory::truck: return "truck";
    case AgentCategory::other: return "other";
  }
  return "other";
}

std::string to_string(AgentRole r) {
  switch (r) {
    case AgentRole::Ego: return "ego";
    case AgentRole::TV: return "tv";
    case AgentRole::CIPV: return "cipv";
    case AgentRole::EV: return "ev";
  }
  return "ev";
}

std::string to_string(JunctionKind k) {
  switch (k) {
    case JunctionKind::off_ramp: return "off_ramp";
    case JunctionKind::on_ramp: return "on_ramp";
    case JunctionKind::merge: return "merge";
  }
  return "merge";
}

std::string to_string(RareObjectKind k) {
  switch (k) {
    case RareObjectKind::cone: return "cone";
    case RareObjectKind::barrier: return "barrier";
    case RareObjectKind::debris: return "debris";
    case RareObjectKind::other: return "other";
  }
  return "other";
}

std::string to_string(LaneType t) {
  switch (t) {
    case LaneType::mainline: return "mainline";
    case LaneType::ramp: return "ramp";
    case LaneType::merge_zone: return "merge_zone";
  }
  return "mainline";
}

std::string to_string(Weather w) {
  switch (w) {
    case Weather::clear: return "clear";
    case Weather::rain: return "rain";
    case Weather::fog: return "fog";
    case Weather::other: return "other";
  }
  return "other";
}

std::string to_string(ScenarioType s) {
  switch (s) {
    case ScenarioType::merge: return "merge";
    case ScenarioType::lane_change: return "lane_change";
    case ScenarioType::ramp_out: return "ramp_out";
    case ScenarioType::cone_block: return "cone_block";
    case ScenarioType::zip_lane: return "zip_lane";
    case ScenarioType::front_blocking: return "front_blocking";
  }
  return "front_blocking";
}

std::optional<AgentCategory> category_from_string(std::string_view s) {
  if (s == "car") return AgentCategory::car;
  if (s == "truck") return AgentCategory::truck;
  if (s == "other") return AgentCategory::other;
  return std::nullopt;
}

std::optional<AgentRole> role_from_string(std::string_view s) {
  if (s == "ego") return AgentRole::Ego;
  if (s == "tv") return AgentRole::TV;
  if (s == "cipv") return AgentRole::CIPV;
  if (s == "ev") return AgentRole::EV;
  return std::nullopt;
}

std::optional<JunctionKind> junction_kind_from_string(std::string_view s) {
  if (s == "off_ramp") return JunctionKind::off_ramp;
  if (s == "on_ramp") return JunctionKind::on_ramp;
  if (s == "merge") return JunctionKind::merge;
  return std::nullopt;
}

std::optional<RareObjectKind> rare_object_kind_from_string(std::string_view s) {
  if (s == "cone") return RareObjectKind::cone;
  if (s == "barrier") return RareObjectKind::barrier;
  if (s == "debris") return RareObjectKind::debris;
  if (s == "other") return RareObjectKind::other;
  return std::nullopt;
}

std::optional<LaneType> lane_type_from_string(std::string_view s) {
  if (s == "mainline") return LaneType::mainline;
  if (s == "ramp") return LaneType::ramp;
  if (s == "merge_zone") return LaneType::merge_zone;
  return std::nullopt;
}

std::optional<Weather> weather_from_string(std::string_view s) {
  if (s == "clear") return Weather::clear;
  if (s == "rain") return Weather::rain;
  if (s == "fog") return Weather::fog;
  if (s == "other") return Weather::other;
  return std::nullopt;
}

std::optional<ScenarioType> scenario_type_from_string(std::string_view s) {
  if (s == "merge") return ScenarioType::merge;
  if (s == "lane_change") return ScenarioType::lane_change;
  if (s == "ramp_out") return ScenarioType::ramp_out;
  if (s == "cone_block") return ScenarioType::cone_block;
  if (s == "zip_lane") return ScenarioType::zip_lane;
  if (s == "front_blocking") return ScenarioType::front_blocking;
  return std::nullopt;
}

}  // namespace esp
