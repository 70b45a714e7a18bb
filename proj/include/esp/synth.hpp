#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "esp/miner.hpp"
#include "esp/rng.hpp"
#include "esp/types.hpp"

namespace esp {

struct SpeedSegment {
  double duration = 0.0;  // s
  double accel = 0.0;     // m/s^2, constant over the segment
};

struct LateralManeuver {
  double start_t = 0.0;
  double duration = 0.0;
  int target_lane = 0;  // must be adjacent to the lane occupied at start_t
};

struct AgentScript {
  std::string id;
  AgentCategory category = AgentCategory::car;
  BoundingBox2D bbox{4.6, 1.9};
  int initial_lane = 0;
  double initial_station = 0.0;  // m along the route
  double initial_speed = 0.0;    // m/s, longitudinal
  std::vector<SpeedSegment> speed_profile;  // zero acceleration after the last segment
  std::optional<LateralManeuver> maneuver;
};

/// Straight multi-lane highway along +x. Lane i is centered at
/// i * lane_width; boundary b sits at (b - 0.5) * lane_width separating
/// lanes b-1 and b.
struct ScenarioScript {
  std::string stream_id = "s";
  int lane_count = 3;
  double lane_width = 3.75;  // m
  std::string ego_id = "ego";
  Weather weather = Weather::clear;
  std::vector<AgentScript> agents;  // ego included
  SemanticInfrastructure infra;     // route-frame stations, as in FrameStream
};

/// Closed-form kinematic state of one scripted agent at an arbitrary time.
struct ScriptState {
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;  // longitudinal speed from the speed profile
  double vy = 0.0;  // lateral speed from the maneuver profile
  double heading = 0.0;
  double speed = 0.0;  // hypot(vx, vy)
};

ScriptState eval_agent_script(const ScenarioScript& script, const AgentScript& agent, double t);

double lane_center_y(const ScenarioScript& script, int lane);
double boundary_y(const ScenarioScript& script, int boundary_index);
LaneSet build_lane_set(const ScenarioScript& script, double x_min, double x_max);

/// Exact boundary-crossing time of a scripted lane change: the first time
/// the heading-tilted box edge reaches the boundary between the start and
/// target lanes, found on the analytic profile (1 kHz bracket + bisection
/// to 1e-9). None when the agent never crosses within [0, t_end].
std::optional<double> solve_crossing_time(const ScenarioScript& script, const AgentScript& agent,
                                          double t_end);

struct AgentCrossingOracle {
  std::string agent_id;
  int boundary_index = 0;   // index into the script's boundary layout
  double crossing_time = 0.0;  // s, stream time base
  int from_lane = 0;
  int to_lane = 0;
};

struct StreamOracle {
  std::vector<AgentCrossingOracle> crossings;
};

/// 10 Hz kinematic rollout of a script: N = round(duration * 10) frames at
/// t = k / 10. Deterministic given (script, seed); the seed only feeds
/// stochastic extensions and leaves fully scripted scenes untouched.
/// Throws std::runtime_error when a scripted longitudinal speed goes
/// negative.
FrameStream gen_stream(const ScenarioScript& script, double duration_s, uint64_t seed,
                       StreamOracle* oracle = nullptr);

/// One randomized cut-in scene with its construction-time expectations.
struct SuiteCase {
  ScenarioScript script;
  double duration = 0.0;
  FrameStream stream;
  std::string tv_id;
  int expected_trigger_frame = 0;  // earliest probe frame satisfying all clauses
  double crossing_time = 0.0;      // analytic, stream time base
};

/// n streams whose parameters are drawn to satisfy the front-blocking
/// trigger clauses with margin; the expected token timing is recorded from
/// the construction.
std::vector<SuiteCase> gen_cutin_suite(int n, uint64_t seed);

/// n control streams violating one trigger clause each by construction
/// (TTC kept high / ego deceleration kept gentle / no cut-in and no
/// dangerous-zone entry). A correct miner finds zero tokens.
std::vector<FrameStream> gen_negative_suite(int n, uint64_t seed);

enum class PredictorKind { oracle, delayed, offset, no_cross };

std::string to_string(PredictorKind k);
std::optional<PredictorKind> predictor_kind_from_string(std::string_view s);

/// Metric test fixtures built from a token's ground truth: oracle copies
/// the GT, delayed shifts the lateral phase so LaMT moves by exactly
/// param seconds, offset translates laterally by param meters, no_cross
/// projects onto lane keeping. All K modes carry descending scores.
Prediction scripted_predictor(const Token& token, PredictorKind kind, double param, int k);

}  // namespace esp
