#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace esp {

// 10 Hz annotation cadence; a token spans 3 s of history (t = 0 included)
// and 5 s of ground-truth future, 8 s total.
constexpr double kFrameDt = 0.1;
constexpr int kHistoryFrames = 31;  // t in [-3.0, 0.0]
constexpr int kFutureFrames = 50;   // t in (0.0, 5.0]
constexpr double kHistoryHorizon = 3.0;
constexpr double kFutureHorizon = 5.0;

// Long-range perception limit; doubles as the "beyond perception" sentinel
// distance for invalid pairwise feature entries.
constexpr double kSentinelDistance = 200.0;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Polyline = std::vector<Point2>;

/// One observation on the 0.1 s grid, in the token-local frame (origin at
/// the ego pose at t = 0, +x along the ego heading at t = 0). Missing
/// observations keep their grid slot with valid = false so tracks stay
/// index-aligned.
struct FrameState {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, CCW from +x, in [-pi, pi)
  double speed = 0.0;    // m/s, non-negative
  bool valid = true;
};

struct BoundingBox2D {
  double length = 0.0;  // along heading
  double width = 0.0;   // across heading
};

enum class AgentCategory { car, truck, other };
enum class AgentRole { Ego, TV, CIPV, EV };

struct AgentTrack {
  std::string id;
  AgentCategory category = AgentCategory::car;
  AgentRole role = AgentRole::EV;
  BoundingBox2D bbox;
  std::vector<FrameState> history;                // exactly kHistoryFrames
  std::optional<std::vector<FrameState>> future;  // exactly kFutureFrames; TV only
};

/// Lane boundary polyline with adjacency labels: the ids of the two lanes it
/// separates. -1 marks "no lane on that side" (outermost boundaries).
struct LaneBoundary {
  Polyline points;
  int lane_a = -1;
  int lane_b = -1;
};

struct LaneSet {
  std::vector<Polyline> centerlines;  // index doubles as the lane id
  std::vector<LaneBoundary> boundaries;
  std::vector<Polyline> road_edges;

  bool empty() const { return centerlines.empty(); }
};

struct SpeedMonitor {
  double position_along_route = 0.0;  // meters
  double limit = 0.0;                 // m/s
};

enum class JunctionKind { off_ramp, on_ramp, merge };

struct Junction {
  JunctionKind kind = JunctionKind::off_ramp;
  double distance_ahead = 0.0;  // meters
};

enum class RareObjectKind { cone, barrier, debris, other };

struct RareObject {
  RareObjectKind kind = RareObjectKind::cone;
  double x = 0.0;
  double y = 0.0;
};

struct SemanticInfrastructure {
  std::vector<SpeedMonitor> speed_monitors;
  std::vector<Junction> junctions;
  std::vector<RareObject> rare_objects;

  bool empty() const {
    return speed_monitors.empty() && junctions.empty() && rare_objects.empty();
  }
};

enum class LaneType { mainline, ramp, merge_zone };
enum class Weather { clear, rain, fog, other };

struct Scene {
  LaneType lane_type = LaneType::mainline;
  Weather weather = Weather::clear;
  int vehicle_count = 0;  // counts every track in the owning token, ego included
};

enum class ScenarioType { merge, lane_change, ramp_out, cone_block, zip_lane, front_blocking };

/// One mined scenario: scene context, lanes, agent tracks and semantic
/// infrastructure, plus the ground-truth cut-in moment t_c when the TV's
/// future crosses the target lane boundary.
struct Token {
  std::string id;
  Scene scene;
  LaneSet lanes;
  AgentTrack ego;
  AgentTrack tv;
  std::vector<AgentTrack> evs;  // at most one CIPV, any number of EVs
  SemanticInfrastructure infra;
  ScenarioType scenario_type = ScenarioType::front_blocking;
  std::optional<double> t_c;  // in (0, 5]; equals LaMT of the TV future

  // Unknown top-level record keys seen under lax parsing, kept as raw JSON
  // and re-emitted verbatim on write.
  std::map<std::string, std::string> extras;

  const AgentTrack* cipv() const;
};

struct PredictionMode {
  std::vector<FrameState> trajectory;  // kFutureFrames over (0, 5]
  std::optional<double> score;
};

struct Prediction {
  std::string token_id;
  std::vector<PredictionMode> modes;  // K >= 1
};

/// Checks every structural invariant of the token and returns one message
/// per breach, "<field>: <rule>". Empty list iff the token is well formed.
/// Pure and idempotent; violations are data, not failures.
std::vector<std::string> validate_token(const Token& token);

std::vector<std::string> validate_prediction(const Prediction& pred);

// Wire names shared by the file formats and the prompt renderer.
std::string to_string(AgentCategory c);
std::string to_string(AgentRole r);
std::string to_string(JunctionKind k);
std::string to_string(RareObjectKind k);
std::string to_string(LaneType t);
std::string to_string(Weather w);
std::string to_string(ScenarioType s);

std::optional<AgentCategory> category_from_string(std::string_view s);
std::optional<AgentRole> role_from_string(std::string_view s);
std::optional<JunctionKind> junction_kind_from_string(std::string_view s);
std::optional<RareObjectKind> rare_object_kind_from_string(std::string_view s);
std::optional<LaneType> lane_type_from_string(std::string_view s);
std::optional<Weather> weather_from_string(std::string_view s);
std::optional<ScenarioType> scenario_type_from_string(std::string_view s);

}  // namespace esp
