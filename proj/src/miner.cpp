#include "esp/miner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "esp/geometry.hpp"
#include "esp/rng.hpp"

namespace esp {

const StreamAgentState* FrameStream::agent_at(int frame, std::string_view agent_id) const {
  if (frame < 0 || frame >= static_cast<int>(frames.size())) return nullptr;
  for (const StreamAgentState& a : frames[static_cast<size_t>(frame)].agents) {
    if (a.id == agent_id) return &a;
  }
  return nullptr;
}

double compute_ttc(double gap, double closing_speed) {
  if (closing_speed > 0.0) return gap / closing_speed;
  return std::numeric_limits<double>::infinity();
}

namespace {

Point2 position_of(const StreamAgentState& a) { return Point2{a.x, a.y}; }

double longitudinal_speed(const StreamAgentState& a, Point2 tangent) {
  return a.speed * (std::cos(a.heading) * tangent.x + std::sin(a.heading) * tangent.y);
}

// Central finite difference of the ego speed over +-probe frames, clamped
// at the stream ends. nullopt when the ego is unobserved at a probe frame.
std::optional<double> ego_accel(const FrameStream& stream, int i, int probe) {
  const int n = static_cast<int>(stream.frames.size());
  const int lo = std::max(i - probe, 0);
  const int hi = std::min(i + probe, n - 1);
  if (hi <= lo) return std::nullopt;
  const StreamAgentState* a_lo = stream.agent_at(lo, stream.ego_id);
  const StreamAgentState* a_hi = stream.agent_at(hi, stream.ego_id);
  if (!a_lo || !a_hi) return std::nullopt;
  const double dt = stream.frames[static_cast<size_t>(hi)].timestamp -
                    stream.frames[static_cast<size_t>(lo)].timestamp;
  return (a_hi->speed - a_lo->speed) / dt;
}

// World-frame track of one agent over [from, to], with t anchored at
// t0_frame. Missing observations become valid = false placeholders so the
// track stays index-aligned.
std::vector<FrameState> track_frames(const FrameStream& stream, std::string_view agent_id,
                                     int from, int to, int t0_frame) {
  std::vector<FrameState> out;
  out.reserve(static_cast<size_t>(to - from + 1));
  for (int j = from; j <= to; ++j) {
    FrameState f;
    f.t = static_cast<double>(j - t0_frame) / 10.0;
    const StreamAgentState* a = stream.agent_at(j, agent_id);
    if (a) {
      f.x = a->x;
      f.y = a->y;
      f.heading = a->heading;
      f.speed = a->speed;
      f.valid = true;
    } else {
      f.valid = false;
    }
    out.push_back(f);
  }
  return out;
}

struct EgoContext {
  const StreamAgentState* state = nullptr;
  int lane = -1;
  double station = 0.0;
  double v_long = 0.0;
  Point2 tangent;
};

std::optional<EgoContext> ego_context(const FrameStream& stream, int at) {
  EgoContext ctx;
  ctx.state = stream.agent_at(at, stream.ego_id);
  if (!ctx.state) return std::nullopt;
  const std::optional<int> lane = lane_containing(stream.lanes, position_of(*ctx.state));
  if (!lane) return std::nullopt;
  ctx.lane = *lane;
  const PolylineProjection proj =
      project_to_polyline(stream.lanes.centerlines[static_cast<size_t>(ctx.lane)],
                          position_of(*ctx.state));
  ctx.station = proj.station;
  ctx.tangent = proj.tangent;
  ctx.v_long = longitudinal_speed(*ctx.state, proj.tangent);
  return ctx;
}

double bumper_gap(double ds, const BoundingBox2D& lead, const BoundingBox2D& ego) {
  return std::max(0.0, ds - (lead.length + ego.length) / 2.0);
}

bool in_dangerous_zone_window(const FrameStream& stream, int at, const std::string& agent_id,
                              const MiningConfig& cfg) {
  for (int j = at; j <= at + kFutureFrames; ++j) {
    const StreamAgentState* ego = stream.agent_at(j, stream.ego_id);
    const StreamAgentState* a = stream.agent_at(j, agent_id);
    if (!ego || !a) continue;
    const std::optional<int> ego_lane = lane_containing(stream.lanes, position_of(*ego));
    if (!ego_lane) continue;
    const std::optional<int> a_lane = lane_containing(stream.lanes, position_of(*a));
    if (!a_lane || *a_lane != *ego_lane) continue;
    const Polyline& center = stream.lanes.centerlines[static_cast<size_t>(*ego_lane)];
    const double ds = project_to_polyline(center, position_of(*a)).station -
                      project_to_polyline(center, position_of(*ego)).station;
    if (ds <= 0.0) continue;
    const double gap = bumper_gap(ds, a->bbox, ego->bbox);
    if (gap < cfg.dangerous_headway * ego->speed) return true;
  }
  return false;
}

}  // namespace

std::optional<TriggerRecord> detect_front_blocking(const FrameStream& stream, int at,
                                                   const MiningConfig& cfg) {
  const int n = static_cast<int>(stream.frames.size());
  if (at < 0 || at + kFutureFrames > n - 1) return std::nullopt;

  const std::optional<EgoContext> ego = ego_context(stream, at);
  if (!ego) return std::nullopt;

  // (b) the ego brakes hard at some point, or firmly on average, over the
  // coming 5 s.
  double min_accel = std::numeric_limits<double>::infinity();
  double accel_sum = 0.0;
  int accel_count = 0;
  for (int i = at; i <= at + kFutureFrames; ++i) {
    const std::optional<double> a = ego_accel(stream, i, cfg.probe_offset);
    if (!a) continue;
    min_accel = std::min(min_accel, *a);
    accel_sum += *a;
    ++accel_count;
  }
  if (accel_count == 0) return std::nullopt;
  const double avg_accel = accel_sum / accel_count;
  if (!(min_accel < cfg.min_decel_threshold || avg_accel < cfg.avg_decel_threshold)) {
    return std::nullopt;
  }

  std::optional<TriggerRecord> best;
  double best_gap = std::numeric_limits<double>::infinity();

  for (const StreamAgentState& a : stream.frames[static_cast<size_t>(at)].agents) {
    if (a.id == stream.ego_id) continue;
    const std::optional<int> a_lane = lane_containing(stream.lanes, position_of(a));
    if (!a_lane) continue;
    const bool same_lane = *a_lane == ego->lane;
    if (!same_lane && !boundary_between(stream.lanes, *a_lane, ego->lane)) continue;

    const Polyline& center = stream.lanes.centerlines[static_cast<size_t>(ego->lane)];
    const PolylineProjection proj = project_to_polyline(center, position_of(a));
    const double ds = proj.station - ego->station;
    if (ds <= 0.0 || ds > cfg.candidate_range) continue;

    // (a) closing on the lead fast enough.
    const double gap = bumper_gap(ds, a.bbox, ego->state->bbox);
    const double ttc = compute_ttc(gap, ego->v_long - longitudinal_speed(a, proj.tangent));
    if (!(ttc < cfg.ttc_threshold)) continue;

    // (c) the lead cuts into the ego lane or enters the dangerous zone.
    std::optional<TriggerClause> clause;
    if (!same_lane) {
      const LaneBoundary* boundary = boundary_between(stream.lanes, *a_lane, ego->lane);
      const std::vector<FrameState> future =
          track_frames(stream, a.id, at + 1, at + kFutureFrames, at);
      if (boundary && lamt(future, a.bbox, boundary->points)) {
        clause = TriggerClause::cut_in;
      }
    }
    if (!clause && in_dangerous_zone_window(stream, at, a.id, cfg)) {
      clause = TriggerClause::dangerous_zone;
    }
    if (!clause) continue;

    if (gap < best_gap) {
      best_gap = gap;
      best = TriggerRecord{at, a.id, *clause, ttc};
    }
  }
  return best;
}

RoleMap assign_roles(const FrameStream& stream, int at, const TriggerRecord& trigger,
                     const MiningConfig& cfg) {
  RoleMap roles;
  roles.tv_id = trigger.tv_id;

  const std::optional<EgoContext> ego = ego_context(stream, at);
  if (!ego) return roles;

  const Polyline& center = stream.lanes.centerlines[static_cast<size_t>(ego->lane)];
  double best_ds = std::numeric_limits<double>::infinity();
  const StreamAgentState* cipv = nullptr;
  for (const StreamAgentState& a : stream.frames[static_cast<size_t>(at)].agents) {
    if (a.id == stream.ego_id) continue;
    const double dist =
        std::hypot(a.x - ego->state->x, a.y - ego->state->y);
    if (dist > cfg.ev_radius) continue;
    const std::optional<int> a_lane = lane_containing(stream.lanes, position_of(a));
    if (!a_lane || *a_lane != ego->lane) continue;
    const double ds = project_to_polyline(center, position_of(a)).station - ego->station;
    if (ds <= 0.0) continue;
    if (ds < best_ds) {
      best_ds = ds;
      cipv = &a;
    }
  }
  if (cipv && cipv->id != trigger.tv_id) roles.cipv_id = cipv->id;

  for (const StreamAgentState& a : stream.frames[static_cast<size_t>(at)].agents) {
    if (a.id == stream.ego_id || a.id == trigger.tv_id) continue;
    if (roles.cipv_id && a.id == *roles.cipv_id) continue;
    if (std::hypot(a.x - ego->state->x, a.y - ego->state->y) <= cfg.ev_radius) {
      roles.ev_ids.push_back(a.id);
    }
  }
  return roles;
}

std::optional<double> label_cutin_moment(std::span<const FrameState> tv_future,
                                         const BoundingBox2D& box, const LaneSet& lanes) {
  try {
    const LaneBoundary& boundary = select_target_boundary(tv_future, lanes);
    return lamt(tv_future, box, boundary.points);
  } catch (const std::runtime_error&) {
    return std::nullopt;  // off-map or degenerate start: no crossing label
  }
}

namespace {

std::vector<FrameState> localized(const std::vector<FrameState>& world,
                                  const RigidTransform& rt) {
  std::vector<FrameState> out;
  out.reserve(world.size());
  for (const FrameState& f : world) {
    if (f.valid) {
      out.push_back(rt.apply(f));
    } else {
      out.push_back(FrameState{f.t, 0.0, 0.0, 0.0, 0.0, false});
    }
  }
  return out;
}

AgentTrack build_track(const FrameStream& stream, const std::string& agent_id, AgentRole role,
                       int at, bool with_future, const RigidTransform& rt) {
  AgentTrack track;
  track.id = agent_id;
  track.role = role;
  const StreamAgentState* now = stream.agent_at(at, agent_id);
  if (now) {
    track.category = now->category;
    track.bbox = now->bbox;
  }
  track.history = localized(track_frames(stream, agent_id, at - (kHistoryFrames - 1), at, at), rt);
  if (with_future) {
    track.future = localized(track_frames(stream, agent_id, at + 1, at + kFutureFrames, at), rt);
  }
  return track;
}

bool junction_within(const SemanticInfrastructure& infra, JunctionKind kind, double range) {
  for (const Junction& j : infra.junctions) {
    if (j.kind == kind && j.distance_ahead >= 0.0 && j.distance_ahead <= range) return true;
  }
  return false;
}

// Net lateral drift of a world-frame trajectory relative to the centerline
// of its starting lane; 0 when the start is off-map.
double net_lateral_drift(const LaneSet& lanes, std::span<const FrameState> traj) {
  const FrameState* first = nullptr;
  const FrameState* last = nullptr;
  for (const FrameState& f : traj) {
    if (!f.valid) continue;
    if (!first) first = &f;
    last = &f;
  }
  if (!first) return 0.0;
  const std::optional<int> lane = lane_containing(lanes, Point2{first->x, first->y});
  if (!lane) return 0.0;
  const Polyline& center = lanes.centerlines[static_cast<size_t>(*lane)];
  return project_to_polyline(center, Point2{last->x, last->y}).signed_lateral -
         project_to_polyline(center, Point2{first->x, first->y}).signed_lateral;
}

bool lane_is_outermost(const LaneSet& lanes, int lane) {
  for (const LaneBoundary& b : lanes.boundaries) {
    if ((b.lane_a == lane && b.lane_b == -1) || (b.lane_b == lane && b.lane_a == -1)) return true;
  }
  return false;
}

bool cone_blocks_tv(const FrameStream& stream, int at, const std::string& tv_id) {
  const StreamAgentState* tv = stream.agent_at(at, tv_id);
  if (!tv) return false;
  const std::optional<int> tv_lane = lane_containing(stream.lanes, position_of(*tv));
  if (!tv_lane) return false;
  const Polyline& center = stream.lanes.centerlines[static_cast<size_t>(*tv_lane)];
  const double tv_station = project_to_polyline(center, position_of(*tv)).station;
  for (const RareObject& ro : stream.infra.rare_objects) {
    if (ro.kind != RareObjectKind::cone) continue;
    const Point2 p{ro.x, ro.y};
    const std::optional<int> cone_lane = lane_containing(stream.lanes, p);
    if (!cone_lane || *cone_lane != *tv_lane) continue;
    const double ds = project_to_polyline(center, p).station - tv_station;
    if (ds >= 0.0 && ds <= 50.0) return true;
  }
  return false;
}

ScenarioType label_scenario_type(const FrameStream& stream, int at, const std::string& tv_id,
                                 const SemanticInfrastructure& local_infra, bool crossed,
                                 double tv_drift, int tv_lane_at_trigger) {
  const bool from_outermost =
      tv_lane_at_trigger >= 0 && lane_is_outermost(stream.lanes, tv_lane_at_trigger);
  if (crossed && from_outermost &&
      (junction_within(local_infra, JunctionKind::merge, 300.0) ||
       junction_within(local_infra, JunctionKind::on_ramp, 300.0))) {
    return ScenarioType::merge;
  }
  // Exits leave to the right; rightward drift is negative lateral.
  if (crossed && tv_drift < 0.0 && junction_within(local_infra, JunctionKind::off_ramp, 300.0)) {
    return ScenarioType::ramp_out;
  }
  if (cone_blocks_tv(stream, at, tv_id)) return ScenarioType::cone_block;
  if (crossed) return ScenarioType::lane_change;
  return ScenarioType::front_blocking;
}

Token cut_token(const FrameStream& stream, int at, const TriggerRecord& trigger,
                const MiningConfig& cfg) {
  const StreamAgentState* ego_now = stream.agent_at(at, stream.ego_id);
  const RigidTransform rt = RigidTransform::to_frame_of(ego_now->x, ego_now->y, ego_now->heading);
  const RoleMap roles = assign_roles(stream, at, trigger, cfg);

  Token token;
  {
    std::ostringstream id;
    id << stream.id << "_f" << at << "_" << trigger.tv_id;
    token.id = id.str();
  }
  token.lanes = transformed(stream.lanes, rt);
  token.ego = build_track(stream, stream.ego_id, AgentRole::Ego, at, false, rt);
  token.tv = build_track(stream, roles.tv_id, AgentRole::TV, at, true, rt);
  if (roles.cipv_id) {
    token.evs.push_back(build_track(stream, *roles.cipv_id, AgentRole::CIPV, at, false, rt));
  }
  for (const std::string& id : roles.ev_ids) {
    token.evs.push_back(build_track(stream, id, AgentRole::EV, at, false, rt));
  }

  const std::optional<EgoContext> ego_ctx = ego_context(stream, at);
  const double ego_station = ego_ctx ? ego_ctx->station : 0.0;
  for (const Junction& j : stream.infra.junctions) {
    const double ahead = j.distance_ahead - ego_station;
    if (ahead >= 0.0) token.infra.junctions.push_back(Junction{j.kind, ahead});
  }
  for (const SpeedMonitor& m : stream.infra.speed_monitors) {
    const double ahead = m.position_along_route - ego_station;
    if (ahead >= 0.0) token.infra.speed_monitors.push_back(SpeedMonitor{ahead, m.limit});
  }
  for (const RareObject& ro : stream.infra.rare_objects) {
    const Point2 p = rt.apply(Point2{ro.x, ro.y});
    token.infra.rare_objects.push_back(RareObject{ro.kind, p.x, p.y});
  }

  token.scene.weather = stream.weather;
  if (junction_within(token.infra, JunctionKind::merge, 300.0)) {
    token.scene.lane_type = LaneType::merge_zone;
  } else if (junction_within(token.infra, JunctionKind::on_ramp, 150.0) ||
             junction_within(token.infra, JunctionKind::off_ramp, 150.0)) {
    token.scene.lane_type = LaneType::ramp;
  } else {
    token.scene.lane_type = LaneType::mainline;
  }
  token.scene.vehicle_count = 2 + static_cast<int>(token.evs.size());

  token.t_c = label_cutin_moment(*token.tv.future, token.tv.bbox, token.lanes);

  const std::vector<FrameState> tv_future_world =
      track_frames(stream, roles.tv_id, at + 1, at + kFutureFrames, at);
  const double drift = net_lateral_drift(stream.lanes, tv_future_world);
  const StreamAgentState* tv_now = stream.agent_at(at, roles.tv_id);
  int tv_lane = -1;
  if (tv_now) {
    if (const std::optional<int> l = lane_containing(stream.lanes, position_of(*tv_now))) {
      tv_lane = *l;
    }
  }
  token.scenario_type = label_scenario_type(stream, at, roles.tv_id, token.infra,
                                            token.t_c.has_value(), drift, tv_lane);
  return token;
}

}  // namespace

std::vector<Token> mine_tokens(const FrameStream& stream, const MiningConfig& cfg) {
  const int n = static_cast<int>(stream.frames.size());
  for (int i = 1; i < n; ++i) {
    const double dt = stream.frames[static_cast<size_t>(i)].timestamp -
                      stream.frames[static_cast<size_t>(i - 1)].timestamp;
    if (std::abs(dt - kFrameDt) > 1e-6) {
      throw std::runtime_error("mine_tokens: frame spacing deviates from 0.1 s at frame " +
                               std::to_string(i));
    }
  }

  std::vector<Token> tokens;
  std::map<std::string, int> last_emitted;  // TV id -> trigger frame
  for (int at = kHistoryFrames - 1; at + kFutureFrames <= n - 1; at += cfg.detection_stride) {
    const std::optional<TriggerRecord> trigger = detect_front_blocking(stream, at, cfg);
    if (!trigger) continue;
    const auto it = last_emitted.find(trigger->tv_id);
    if (it != last_emitted.end() &&
        static_cast<double>(at - it->second) * kFrameDt <= 3.0 + 1e-9) {
      continue;  // same event seen again within the dedup window; keep the earliest
    }
    tokens.push_back(cut_token(stream, at, *trigger, cfg));
    last_emitted[trigger->tv_id] = at;
  }
  return tokens;
}

DatasetSplit split_dataset(std::vector<Token> tokens, uint64_t seed) {
  if (tokens.empty()) throw std::invalid_argument("split_dataset: no tokens");

  std::sort(tokens.begin(), tokens.end(),
            [](const Token& a, const Token& b) { return a.id < b.id; });

  // Fisher-Yates on indices; Rng keeps the permutation platform-independent.
  std::vector<size_t> order(tokens.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[static_cast<size_t>(rng.bounded(i))]);
  }

  const auto n = static_cast<long long>(tokens.size());
  long long n_train = std::llround(0.8 * static_cast<double>(n));
  long long n_val = std::llround(0.1 * static_cast<double>(n));
  n_train = std::min(n_train, n);
  n_val = std::min(n_val, n - n_train);

  DatasetSplit split;
  for (long long i = 0; i < n; ++i) {
    Token& t = tokens[order[static_cast<size_t>(i)]];
    if (i < n_train) {
      split.train.push_back(std::move(t));
    } else if (i < n_train + n_val) {
      split.val.push_back(std::move(t));
    } else {
      split.test.push_back(std::move(t));
    }
  }
  return split;
}

}  // namespace esp
