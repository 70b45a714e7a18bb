#pragma once

// Shared token / trajectory builders for the test suites. Constructions
// are closed-form so expected values (crossing times, distances) are known
// exactly, independent of the code under test.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "esp/geometry.hpp"
#include "esp/miner.hpp"
#include "esp/rng.hpp"
#include "esp/synth.hpp"
#include "esp/types.hpp"

namespace esp::testing {

inline double grid_t(int k) { return static_cast<double>(k) / 10.0; }

// Straight multi-lane map, lane i centered at i * width.
inline LaneSet straight_lanes(int lane_count, double width = 3.75, double x_min = -500.0,
                              double x_max = 1500.0) {
  ScenarioScript script;
  script.lane_count = lane_count;
  script.lane_width = width;
  return build_lane_set(script, x_min, x_max);
}

inline std::vector<FrameState> const_speed_history(double x0, double y, double speed,
                                                   double heading = 0.0) {
  std::vector<FrameState> out;
  for (int k = 0; k < kHistoryFrames; ++k) {
    const double t = grid_t(k - (kHistoryFrames - 1));
    out.push_back(FrameState{t, x0 + speed * t, y, heading, speed, true});
  }
  return out;
}

inline std::vector<FrameState> const_speed_future(double x0, double y, double speed,
                                                  double heading = 0.0) {
  std::vector<FrameState> out;
  for (int k = 1; k <= kFutureFrames; ++k) {
    const double t = grid_t(k);
    out.push_back(FrameState{t, x0 + speed * t, y, heading, speed, true});
  }
  return out;
}

struct RampTrajectory {
  std::vector<FrameState> frames;  // 50 future frames
  double contact_time = 0.0;       // exact corner-contact time
  double lateral_rate = 0.0;       // signed lateral speed
  double heading = 0.0;
};

// Future trajectory with a linear lateral ramp whose heading-tilted box
// edge first touches boundary_y at exactly contact_time. The lateral rate
// solving the contact equation is found by fixed point (the tilt extent
// depends on the heading, which depends on the rate).
inline RampTrajectory ramp_future(double start_x, double lane_center, double boundary_y,
                                  double forward_speed, const BoundingBox2D& box,
                                  double contact_time) {
  const double dir = boundary_y > lane_center ? 1.0 : -1.0;
  const double span = std::abs(boundary_y - lane_center);
  double rate = (span - box.width / 2.0) / contact_time;
  for (int i = 0; i < 60; ++i) {
    const double h = std::atan2(rate, forward_speed);
    const double extent =
        (box.width / 2.0) * std::cos(h) + (box.length / 2.0) * std::abs(std::sin(h));
    rate = (span - extent) / contact_time;
  }
  RampTrajectory out;
  out.contact_time = contact_time;
  out.lateral_rate = dir * rate;
  out.heading = std::atan2(dir * rate, forward_speed);
  const double speed = std::hypot(forward_speed, rate);
  for (int k = 1; k <= kFutureFrames; ++k) {
    const double t = grid_t(k);
    out.frames.push_back(FrameState{t, start_x + forward_speed * t,
                                    lane_center + dir * rate * t, out.heading, speed, true});
  }
  return out;
}

struct ExtraAgent {
  std::string id;
  AgentRole role = AgentRole::EV;
  AgentCategory category = AgentCategory::car;
  BoundingBox2D bbox{4.6, 1.9};
  int lane = 0;
  double x0 = 0.0;  // position at t = 0
  double speed = 20.0;
  std::vector<int> invalid_history_frames;
};

// Valid-by-construction token on a straight map; the TV either keeps its
// lane or ramps toward the ego lane with an exact corner-contact time.
struct TokenBuilder {
  std::string id = "tok1";
  int lane_count = 3;
  double lane_width = 3.75;
  int ego_lane = 0;
  double ego_speed = 24.0;
  BoundingBox2D ego_box{10.0, 2.5};
  AgentCategory ego_category = AgentCategory::truck;
  int tv_lane = 1;
  double tv_speed = 14.0;
  double tv_x0 = 40.0;  // ahead of ego at t = 0, world x
  BoundingBox2D tv_box{4.6, 1.9};
  AgentCategory tv_category = AgentCategory::car;
  std::optional<double> crossing_contact_time;  // corner contact toward ego lane
  std::vector<ExtraAgent> extras;
  SemanticInfrastructure infra;
  Weather weather = Weather::clear;
  LaneType lane_type = LaneType::mainline;

  Token build() const {
    ScenarioScript script;
    script.lane_count = lane_count;
    script.lane_width = lane_width;

    Token token;
    token.id = id;
    token.lanes = build_lane_set(script, -600.0, 1600.0);
    token.infra = infra;
    token.scene.weather = weather;
    token.scene.lane_type = lane_type;

    const double ego_y = lane_center_y(script, ego_lane);

    token.ego.id = "ego";
    token.ego.role = AgentRole::Ego;
    token.ego.category = ego_category;
    token.ego.bbox = ego_box;
    token.ego.history = const_speed_history(0.0, ego_y, ego_speed);

    const double tv_y = lane_center_y(script, tv_lane);
    token.tv.id = "tv1";
    token.tv.role = AgentRole::TV;
    token.tv.category = tv_category;
    token.tv.bbox = tv_box;
    token.tv.history = const_speed_history(tv_x0, tv_y, tv_speed);
    if (crossing_contact_time) {
      const double target_y = boundary_y(script, std::max(tv_lane, ego_lane));
      token.tv.future =
          ramp_future(tv_x0, tv_y, target_y, tv_speed, tv_box, *crossing_contact_time).frames;
    } else {
      token.tv.future = const_speed_future(tv_x0, tv_y, tv_speed);
    }

    for (const ExtraAgent& e : extras) {
      AgentTrack track;
      track.id = e.id;
      track.role = e.role;
      track.category = e.category;
      track.bbox = e.bbox;
      track.history = const_speed_history(e.x0, lane_center_y(script, e.lane), e.speed);
      for (int k : e.invalid_history_frames) {
        track.history[static_cast<size_t>(k)] =
            FrameState{grid_t(k - (kHistoryFrames - 1)), 0.0, 0.0, 0.0, 0.0, false};
      }
      token.evs.push_back(std::move(track));
    }

    token.scene.vehicle_count = 2 + static_cast<int>(token.evs.size());

    // Anchor the token frame at the ego pose at t = 0.
    Token local = transformed(token, RigidTransform::to_frame_of(0.0, ego_y, 0.0));
    local.t_c = label_cutin_moment(*local.tv.future, local.tv.bbox, local.lanes);
    return local;
  }
};

// Randomized valid token for round-trip and property sweeps.
inline Token random_token(Rng& rng, const std::string& id) {
  TokenBuilder b;
  b.id = id;
  b.lane_count = rng.uniform_int(2, 4);
  b.lane_width = rng.uniform(3.4, 4.0);
  b.ego_lane = rng.uniform_int(0, b.lane_count - 1);
  b.ego_speed = rng.uniform(16.0, 30.0);
  b.tv_lane = b.ego_lane + (b.ego_lane + 1 < b.lane_count ? 1 : -1);
  b.tv_speed = rng.uniform(9.0, 22.0);
  b.tv_x0 = rng.uniform(20.0, 70.0);
  b.tv_box = BoundingBox2D{rng.uniform(4.0, 5.2), rng.uniform(1.7, 2.1)};
  if (rng.uniform(0.0, 1.0) < 0.6) {
    b.crossing_contact_time = rng.uniform(0.6, 4.4);
  }
  const int n_extra = rng.uniform_int(0, 3);
  for (int i = 0; i < n_extra; ++i) {
    ExtraAgent e;
    e.id = "x" + std::to_string(i);
    e.role = i == 0 && rng.uniform(0.0, 1.0) < 0.5 ? AgentRole::CIPV : AgentRole::EV;
    e.category = rng.uniform(0.0, 1.0) < 0.3 ? AgentCategory::truck : AgentCategory::car;
    e.lane = rng.uniform_int(0, b.lane_count - 1);
    e.x0 = rng.uniform(-60.0, 90.0);
    e.speed = rng.uniform(8.0, 30.0);
    if (rng.uniform(0.0, 1.0) < 0.3) {
      e.invalid_history_frames.push_back(rng.uniform_int(0, kHistoryFrames - 2));
    }
    b.extras.push_back(std::move(e));
  }
  if (rng.uniform(0.0, 1.0) < 0.4) {
    b.infra.junctions.push_back(
        Junction{static_cast<JunctionKind>(rng.uniform_int(0, 2)), rng.uniform(50.0, 800.0)});
  }
  if (rng.uniform(0.0, 1.0) < 0.3) {
    b.infra.speed_monitors.push_back(SpeedMonitor{rng.uniform(0.0, 500.0), rng.uniform(20.0, 33.0)});
  }
  if (rng.uniform(0.0, 1.0) < 0.3) {
    b.infra.rare_objects.push_back(RareObject{static_cast<RareObjectKind>(rng.uniform_int(0, 3)),
                                              rng.uniform(10.0, 120.0), rng.uniform(-6.0, 6.0)});
  }
  return b.build();
}

inline RigidTransform random_rigid(Rng& rng) {
  RigidTransform rt;
  rt.dx = rng.uniform(-800.0, 800.0);
  rt.dy = rng.uniform(-800.0, 800.0);
  rt.theta = rng.uniform(-3.1, 3.1);
  return rt;
}

}  // namespace esp::testing
