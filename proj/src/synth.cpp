#include "esp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "esp/geometry.hpp"

namespace esp {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Longitudinal {
  double x = 0.0;
  double v = 0.0;
};

Longitudinal longitudinal_at(const AgentScript& a, double t) {
  double x = a.initial_station;
  double v = a.initial_speed;
  double elapsed = 0.0;
  for (const SpeedSegment& seg : a.speed_profile) {
    const double dt = std::clamp(t - elapsed, 0.0, seg.duration);
    x += v * dt + 0.5 * seg.accel * dt * dt;
    v += seg.accel * dt;
    elapsed += seg.duration;
    if (t <= elapsed) return {x, v};
  }
  x += v * std::max(0.0, t - elapsed);
  return {x, v};
}

struct Lateral {
  double y = 0.0;
  double vy = 0.0;
};

Lateral lateral_at(const ScenarioScript& script, const AgentScript& a, double t) {
  const double y0 = lane_center_y(script, a.initial_lane);
  if (!a.maneuver) return {y0, 0.0};
  const LateralManeuver& m = *a.maneuver;
  const double y1 = lane_center_y(script, m.target_lane);
  if (t <= m.start_t) return {y0, 0.0};
  if (t >= m.start_t + m.duration) return {y1, 0.0};
  const double tau = (t - m.start_t) / m.duration;
  // Sinusoidal ease: zero lateral speed at both ends, closed-form inverse.
  const double y = y0 + (y1 - y0) * 0.5 * (1.0 - std::cos(kPi * tau));
  const double vy = (y1 - y0) * kPi / (2.0 * m.duration) * std::sin(kPi * tau);
  return {y, vy};
}

void check_speed_profile(const AgentScript& a) {
  double v = a.initial_speed;
  if (v < 0.0) {
    throw std::runtime_error("gen_stream: agent " + a.id + " starts with negative speed");
  }
  for (const SpeedSegment& seg : a.speed_profile) {
    v += seg.accel * seg.duration;
    if (v < -1e-9) {
      throw std::runtime_error("gen_stream: scripted speed goes negative for agent " + a.id);
    }
  }
}

}  // namespace

ScriptState eval_agent_script(const ScenarioScript& script, const AgentScript& agent, double t) {
  const Longitudinal lon = longitudinal_at(agent, t);
  const Lateral lat = lateral_at(script, agent, t);
  ScriptState s;
  s.x = lon.x;
  s.y = lat.y;
  s.vx = lon.v;
  s.vy = lat.vy;
  s.heading = (s.vx == 0.0 && s.vy == 0.0) ? 0.0 : wrap_angle(std::atan2(s.vy, s.vx));
  s.speed = std::hypot(s.vx, s.vy);
  return s;
}

double lane_center_y(const ScenarioScript& script, int lane) {
  return static_cast<double>(lane) * script.lane_width;
}

double boundary_y(const ScenarioScript& script, int boundary_index) {
  return (static_cast<double>(boundary_index) - 0.5) * script.lane_width;
}

LaneSet build_lane_set(const ScenarioScript& script, double x_min, double x_max) {
  const double step = 20.0;
  const int n_pts = std::max(2, static_cast<int>(std::ceil((x_max - x_min) / step)) + 1);
  auto line_at = [&](double y) {
    Polyline p;
    p.reserve(static_cast<size_t>(n_pts));
    for (int i = 0; i < n_pts - 1; ++i) p.push_back(Point2{x_min + i * step, y});
    p.push_back(Point2{x_max, y});
    return p;
  };

  LaneSet lanes;
  for (int lane = 0; lane < script.lane_count; ++lane) {
    lanes.centerlines.push_back(line_at(lane_center_y(script, lane)));
  }
  for (int b = 0; b <= script.lane_count; ++b) {
    LaneBoundary lb;
    lb.points = line_at(boundary_y(script, b));
    lb.lane_a = b - 1 >= 0 ? b - 1 : -1;
    lb.lane_b = b < script.lane_count ? b : -1;
    lanes.boundaries.push_back(std::move(lb));
  }
  lanes.road_edges.push_back(line_at(boundary_y(script, 0) - 0.3));
  lanes.road_edges.push_back(line_at(boundary_y(script, script.lane_count) + 0.3));
  return lanes;
}

std::optional<double> solve_crossing_time(const ScenarioScript& script, const AgentScript& agent,
                                          double t_end) {
  if (!agent.maneuver) return std::nullopt;
  const LateralManeuver& m = *agent.maneuver;
  const double y0 = lane_center_y(script, agent.initial_lane);
  const double y1 = lane_center_y(script, m.target_lane);
  if (y1 == y0) return std::nullopt;
  const double dir = y1 > y0 ? 1.0 : -1.0;
  const double yb = boundary_y(script, std::max(agent.initial_lane, m.target_lane));

  // Signed reach of the leading box edge past the boundary; contact at f >= 0.
  auto f = [&](double t) {
    const ScriptState s = eval_agent_script(script, agent, t);
    const double extent = 0.5 * agent.bbox.width * std::abs(std::cos(s.heading)) +
                          0.5 * agent.bbox.length * std::abs(std::sin(s.heading));
    return dir * (s.y - yb) + extent;
  };

  const double t_from = std::max(0.0, m.start_t);
  const double t_to = std::min(t_end, m.start_t + m.duration);
  if (t_to <= t_from) return std::nullopt;
  if (f(t_from) >= 0.0) return t_from;

  const double dt = 1e-3;
  double prev = t_from;
  for (double t = t_from + dt; t <= t_to + dt / 2; t += dt) {
    const double tc = std::min(t, t_to);
    if (f(tc) >= 0.0) {
      double lo = prev, hi = tc;
      for (int i = 0; i < 60; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= 0.0 ? hi : lo) = mid;
      }
      return hi;
    }
    prev = tc;
  }
  return std::nullopt;
}

FrameStream gen_stream(const ScenarioScript& script, double duration_s, uint64_t seed,
                       StreamOracle* oracle) {
  (void)seed;  // reserved for stochastic extensions; fully scripted scenes ignore it

  for (const AgentScript& a : script.agents) check_speed_profile(a);

  FrameStream stream;
  stream.id = script.stream_id;
  stream.ego_id = script.ego_id;
  stream.weather = script.weather;
  stream.infra = script.infra;

  const int n = static_cast<int>(std::llround(duration_s * 10.0));
  stream.frames.reserve(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) {
    StreamFrame frame;
    frame.timestamp = static_cast<double>(k) / 10.0;
    for (const AgentScript& a : script.agents) {
      const ScriptState s = eval_agent_script(script, a, frame.timestamp);
      StreamAgentState st;
      st.id = a.id;
      st.category = a.category;
      st.x = s.x;
      st.y = s.y;
      st.heading = s.heading;
      st.speed = s.speed;
      st.bbox = a.bbox;
      frame.agents.push_back(std::move(st));
    }
    stream.frames.push_back(std::move(frame));
  }

  double x_min = 0.0, x_max = 0.0;
  bool first = true;
  for (const AgentScript& a : script.agents) {
    const double x0 = a.initial_station;
    const double x1 = longitudinal_at(a, duration_s).x;
    if (first) {
      x_min = std::min(x0, x1);
      x_max = std::max(x0, x1);
      first = false;
    } else {
      x_min = std::min(x_min, std::min(x0, x1));
      x_max = std::max(x_max, std::max(x0, x1));
    }
  }
  stream.lanes = build_lane_set(script, x_min - 200.0, x_max + 200.0);

  if (oracle) {
    for (const AgentScript& a : script.agents) {
      if (!a.maneuver) continue;
      const std::optional<double> t = solve_crossing_time(script, a, duration_s);
      if (!t) continue;
      AgentCrossingOracle c;
      c.agent_id = a.id;
      c.boundary_index = std::max(a.initial_lane, a.maneuver->target_lane);
      c.crossing_time = *t;
      c.from_lane = a.initial_lane;
      c.to_lane = a.maneuver->target_lane;
      oracle->crossings.push_back(std::move(c));
    }
  }
  return stream;
}

namespace {

// Randomized front-blocking cut-in parameters. All trigger clauses are met
// with margin, and margins are wide enough that no second trigger survives
// the dedup window (the TTC clause recovers once the ego has shed its
// speed advantage, and the post-cut-in gap stays above the dangerous zone).
struct CutinDesign {
  int lane_count = 3;
  double lane_width = 3.75;
  int ego_lane = 0;
  int tv_lane = 1;
  double v_tv = 0.0;
  double closing = 0.0;        // v_ego0 - v_tv
  double maneuver_start = 0.0;
  double maneuver_duration = 0.0;
  double brake_start = 0.0;
  double brake_decel = 0.0;    // negative
  double brake_duration = 0.0;
  double ttc_target_lead = 0.0;  // s between TTC onset and the crossing
  BoundingBox2D tv_box;
  BoundingBox2D ego_box;
  bool with_cipv_lead = false;
  bool with_rear_ev = false;
};

CutinDesign draw_cutin_design(Rng& rng) {
  CutinDesign d;
  const int side = rng.uniform_int(0, 1);  // 0: TV cuts in from the left, 1: from the right
  if (side == 0) {
    d.ego_lane = rng.uniform_int(0, 1);
    d.tv_lane = d.ego_lane + 1;
  } else {
    d.ego_lane = rng.uniform_int(1, 2);
    d.tv_lane = d.ego_lane - 1;
  }
  d.v_tv = rng.uniform(11.0, 14.0);
  d.closing = rng.uniform(7.5, 8.5);
  d.maneuver_start = rng.uniform(9.0, 12.0);
  d.maneuver_duration = rng.uniform(3.0, 3.4);
  d.brake_start = d.maneuver_start + rng.uniform(0.55, 0.7);
  d.brake_decel = -rng.uniform(3.4, 3.9);
  d.brake_duration = (d.closing + 2.0) / -d.brake_decel;  // ego ends 2 m/s under the TV
  d.ttc_target_lead = rng.uniform(1.9, 2.4);
  d.tv_box = BoundingBox2D{rng.uniform(4.2, 4.9), rng.uniform(1.8, 2.0)};
  d.ego_box = BoundingBox2D{rng.uniform(8.0, 12.0), 2.5};
  d.with_cipv_lead = rng.uniform(0.0, 1.0) < 0.7;
  d.with_rear_ev = rng.uniform(0.0, 1.0) < 0.7;
  return d;
}

struct BuiltCutin {
  ScenarioScript script;
  double duration = 0.0;
  double crossing_time = 0.0;
};

BuiltCutin build_cutin_script(const CutinDesign& d, const std::string& stream_id, Rng& rng) {
  ScenarioScript script;
  script.stream_id = stream_id;
  script.lane_count = d.lane_count;
  script.lane_width = d.lane_width;
  script.ego_id = "ego";

  const double v_ego0 = d.v_tv + d.closing;
  const double ego_station0 = 50.0;

  AgentScript tv;
  tv.id = "tv1";
  tv.category = AgentCategory::car;
  tv.bbox = d.tv_box;
  tv.initial_lane = d.tv_lane;
  tv.initial_speed = d.v_tv;
  tv.maneuver = LateralManeuver{d.maneuver_start, d.maneuver_duration, d.ego_lane};

  // Land the crossing mid-frame-bucket so the 10 Hz crossing frame is
  // unambiguous: with a constant TV speed the crossing shifts linearly with
  // the maneuver start.
  double tau = 0.0;
  {
    ScenarioScript probe = script;
    probe.agents.push_back(tv);
    const std::optional<double> t = solve_crossing_time(probe, probe.agents.back(), 1e9);
    if (!t) throw std::logic_error("cutin suite: scripted maneuver never crosses");
    tau = *t;
    const double target = (std::floor(tau * 10.0) + 0.5) / 10.0;
    tv.maneuver->start_t += target - tau;
    probe.agents.back() = tv;
    const std::optional<double> t2 = solve_crossing_time(probe, probe.agents.back(), 1e9);
    if (!t2) throw std::logic_error("cutin suite: crossing lost after phase adjustment");
    tau = *t2;
  }

  // TTC drops below the threshold ttc_target_lead seconds before the
  // crossing; that clause binds the trigger time.
  const double t_a = tau - d.ttc_target_lead;
  const double bumper_gap0 = d.closing * (t_a + 5.0);
  tv.initial_station =
      ego_station0 + bumper_gap0 + (tv.bbox.length + d.ego_box.length) / 2.0;

  AgentScript ego;
  ego.id = "ego";
  ego.category = AgentCategory::truck;
  ego.bbox = d.ego_box;
  ego.initial_lane = d.ego_lane;
  ego.initial_station = ego_station0;
  ego.initial_speed = v_ego0;
  // brake_start was drawn relative to the original maneuver start; keep the
  // reaction delay after the phase adjustment.
  const double brake_at = tv.maneuver->start_t + (d.brake_start - d.maneuver_start);
  ego.speed_profile = {SpeedSegment{brake_at, 0.0},
                       SpeedSegment{d.brake_duration, d.brake_decel}};

  script.agents.push_back(ego);
  script.agents.push_back(tv);

  if (d.with_cipv_lead) {
    AgentScript lead;
    lead.id = "lead1";
    lead.category = rng.uniform(0.0, 1.0) < 0.5 ? AgentCategory::truck : AgentCategory::car;
    lead.bbox = lead.category == AgentCategory::truck ? BoundingBox2D{10.0, 2.5}
                                                      : BoundingBox2D{4.6, 1.9};
    lead.initial_lane = d.ego_lane;
    lead.initial_station = ego_station0 + rng.uniform(65.0, 85.0);
    lead.initial_speed = v_ego0 - rng.uniform(2.0, 3.0);
    script.agents.push_back(lead);
  }
  if (d.with_rear_ev) {
    AgentScript rear;
    rear.id = "ev1";
    rear.category = AgentCategory::car;
    rear.bbox = BoundingBox2D{4.4, 1.8};
    rear.initial_lane = 2 * d.ego_lane - d.tv_lane;  // mirror lane of the TV side
    if (rear.initial_lane < 0 || rear.initial_lane >= d.lane_count) {
      rear.initial_lane = d.tv_lane;
      rear.initial_station = ego_station0 - rng.uniform(25.0, 40.0);
    } else {
      rear.initial_station = ego_station0 - rng.uniform(15.0, 30.0);
    }
    rear.initial_speed = v_ego0 - rng.uniform(0.0, 1.5);
    script.agents.push_back(rear);
  }

  BuiltCutin out;
  out.script = std::move(script);
  out.crossing_time = tau;
  out.duration = std::ceil((tau + 7.0) * 10.0) / 10.0;
  return out;
}

// By-construction expectation of the miner's probe outcome, evaluated on
// the script's closed forms rather than on frames.
int expected_trigger_frame(const ScenarioScript& script, const BuiltCutin& built,
                           const MiningConfig& cfg) {
  const AgentScript* ego = nullptr;
  const AgentScript* tv = nullptr;
  for (const AgentScript& a : script.agents) {
    if (a.id == script.ego_id) ego = &a;
    if (a.maneuver) tv = &a;
  }
  if (!ego || !tv) throw std::logic_error("cutin suite: script lacks ego or tv");

  const int n = static_cast<int>(std::llround(built.duration * 10.0));
  const double half_lengths = (ego->bbox.length + tv->bbox.length) / 2.0;
  const int k_cross = static_cast<int>(std::ceil(built.crossing_time * 10.0 - 1e-9));
  const double ego_center = lane_center_y(script, ego->initial_lane);

  auto v_ego = [&](int k) { return longitudinal_at(*ego, k / 10.0).v; };

  auto clause_a = [&](int k) {
    const double t = k / 10.0;
    const Longitudinal le = longitudinal_at(*ego, t);
    const Longitudinal lt = longitudinal_at(*tv, t);
    const double gap = std::max(0.0, lt.x - le.x - half_lengths);
    const double ttc = compute_ttc(gap, le.v - lt.v);
    return ttc < cfg.ttc_threshold;
  };
  auto clause_b = [&](int k) {
    double min_a = 1e9, sum = 0.0;
    int count = 0;
    for (int i = k; i <= k + kFutureFrames; ++i) {
      const int lo = std::max(i - cfg.probe_offset, 0);
      const int hi = std::min(i + cfg.probe_offset, n - 1);
      if (hi <= lo) continue;
      const double a = (v_ego(hi) - v_ego(lo)) / ((hi - lo) / 10.0);
      min_a = std::min(min_a, a);
      sum += a;
      ++count;
    }
    if (count == 0) return false;
    return min_a < cfg.min_decel_threshold || sum / count < cfg.avg_decel_threshold;
  };
  auto clause_c = [&](int k) {
    if (k_cross > k && k_cross <= k + kFutureFrames) return true;  // cut-in arm
    for (int j = k; j <= k + kFutureFrames; ++j) {                 // dangerous-zone arm
      const double t = j / 10.0;
      const Lateral lat = lateral_at(script, *tv, t);
      if (std::abs(lat.y - ego_center) >= script.lane_width / 2.0) continue;
      const Longitudinal le = longitudinal_at(*ego, t);
      const Longitudinal lt = longitudinal_at(*tv, t);
      const double gap = std::max(0.0, lt.x - le.x - half_lengths);
      if (gap < cfg.dangerous_headway * le.v) return true;
    }
    return false;
  };

  for (int at = kHistoryFrames - 1; at + kFutureFrames <= n - 1; at += cfg.detection_stride) {
    if (clause_a(at) && clause_b(at) && clause_c(at)) return at;
  }
  throw std::logic_error("cutin suite: no probe frame satisfies all clauses");
}

}  // namespace

std::vector<SuiteCase> gen_cutin_suite(int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_cutin_suite: n must be >= 1");
  std::vector<SuiteCase> cases;
  cases.reserve(static_cast<size_t>(n));
  const MiningConfig cfg;
  for (int i = 0; i < n; ++i) {
    Rng rng(seed * 1000003ull + static_cast<uint64_t>(i));
    const CutinDesign design = draw_cutin_design(rng);
    std::ostringstream sid;
    sid << "cutin_" << seed << "_" << i;
    BuiltCutin built = build_cutin_script(design, sid.str(), rng);

    SuiteCase sc;
    sc.tv_id = "tv1";
    sc.crossing_time = built.crossing_time;
    sc.expected_trigger_frame = expected_trigger_frame(built.script, built, cfg);
    sc.duration = built.duration;
    sc.stream = gen_stream(built.script, built.duration, seed);
    sc.script = std::move(built.script);
    cases.push_back(std::move(sc));
  }
  return cases;
}

std::vector<FrameStream> gen_negative_suite(int n, uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_negative_suite: n must be >= 1");
  std::vector<FrameStream> streams;
  streams.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(seed * 2000003ull + static_cast<uint64_t>(i));
    ScenarioScript script;
    std::ostringstream sid;
    sid << "negctl_" << seed << "_" << i;
    script.stream_id = sid.str();
    script.ego_id = "ego";

    const int mode = i % 3;
    const double v_lead = rng.uniform(11.0, 14.0);
    const double closing = rng.uniform(7.5, 8.5);

    AgentScript ego;
    ego.id = "ego";
    ego.category = AgentCategory::truck;
    ego.bbox = BoundingBox2D{10.0, 2.5};
    ego.initial_lane = 1;
    ego.initial_station = 50.0;

    AgentScript other;
    other.id = "a1";
    other.category = AgentCategory::car;
    other.bbox = BoundingBox2D{4.6, 1.9};

    if (mode == 0) {
      // TTC kept infinite: the cutting agent is faster than the ego.
      ego.initial_speed = rng.uniform(18.0, 22.0);
      other.initial_lane = 2;
      other.initial_station = ego.initial_station + rng.uniform(40.0, 60.0) + 7.3;
      other.initial_speed = ego.initial_speed + rng.uniform(2.0, 5.0);
      other.maneuver = LateralManeuver{rng.uniform(8.0, 10.0), 3.2, 1};
    } else if (mode == 1) {
      // Deceleration kept gentle: min and mean both above the thresholds.
      ego.initial_speed = v_lead + closing;
      other.initial_lane = 2;
      other.initial_speed = v_lead;
      const double ms = rng.uniform(9.0, 11.0);
      other.maneuver = LateralManeuver{ms, 3.2, 1};
      other.initial_station =
          ego.initial_station + closing * (ms - 0.5 + 5.0) + 7.3;
      ego.speed_profile = {SpeedSegment{ms + 0.6, 0.0}, SpeedSegment{2.0, -0.25}};
    } else {
      // No cut-in and no dangerous-zone entry: in-lane lead, hard brake,
      // but the gap never shrinks below the zone.
      ego.initial_speed = v_lead + closing;
      other.initial_lane = 1;
      other.initial_speed = v_lead;
      other.initial_station = ego.initial_station + 5.5 * closing + 7.3;
      const double bs = rng.uniform(1.5, 2.0);
      const double decel = rng.uniform(3.4, 3.9);
      ego.speed_profile = {SpeedSegment{bs, 0.0},
                           SpeedSegment{(closing + 2.0) / decel, -decel}};
    }

    script.agents.push_back(ego);
    script.agents.push_back(other);
    streams.push_back(gen_stream(script, 20.0, seed));
  }
  return streams;
}

std::string to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::oracle: return "oracle";
    case PredictorKind::delayed: return "delayed";
    case PredictorKind::offset: return "offset";
    case PredictorKind::no_cross: return "no_cross";
  }
  return "oracle";
}

std::optional<PredictorKind> predictor_kind_from_string(std::string_view s) {
  if (s == "oracle") return PredictorKind::oracle;
  if (s == "delayed") return PredictorKind::delayed;
  if (s == "offset") return PredictorKind::offset;
  if (s == "no_cross") return PredictorKind::no_cross;
  return std::nullopt;
}

namespace {

std::vector<FrameState> delayed_trajectory(const Token& token, double delta) {
  const std::vector<FrameState>& gt = *token.tv.future;
  const std::vector<FrameState>& hist = token.tv.history;
  const int shift = static_cast<int>(std::llround(delta * 10.0));

  auto lateral_source = [&](int grid) {  // grid index: future k >= 1, history k <= 0
    const int src = grid - shift;
    if (src >= 1) return gt[static_cast<size_t>(std::min(src, kFutureFrames) - 1)].y;
    const int idx = std::clamp(kHistoryFrames - 1 + src, 0, kHistoryFrames - 1);
    return hist[static_cast<size_t>(idx)].y;
  };

  std::vector<FrameState> out = gt;
  for (int i = 0; i < kFutureFrames; ++i) {
    out[static_cast<size_t>(i)].y = lateral_source(i + 1);
  }
  // Recompute heading and speed from the shifted motion.
  double prev_x = hist[kHistoryFrames - 1].x;
  double prev_y = lateral_source(0);
  for (int i = 0; i < kFutureFrames; ++i) {
    FrameState& f = out[static_cast<size_t>(i)];
    const double dx = f.x - prev_x;
    const double dy = f.y - prev_y;
    f.heading = (dx == 0.0 && dy == 0.0) ? 0.0 : wrap_angle(std::atan2(dy, dx));
    f.speed = std::hypot(dx, dy) / kFrameDt;
    prev_x = f.x;
    prev_y = f.y;
  }
  return out;
}

std::vector<FrameState> offset_trajectory(const Token& token, double d) {
  std::vector<FrameState> out = *token.tv.future;
  for (FrameState& f : out) f.y += d;
  return out;
}

std::vector<FrameState> no_cross_trajectory(const Token& token) {
  const FrameState& anchor = token.tv.history[kHistoryFrames - 1];
  std::vector<FrameState> out = *token.tv.future;
  for (FrameState& f : out) {
    f.y = anchor.y;
    f.heading = anchor.heading;
  }
  return out;
}

}  // namespace

Prediction scripted_predictor(const Token& token, PredictorKind kind, double param, int k) {
  if (!token.tv.future) {
    throw std::invalid_argument("scripted_predictor: token has no ground-truth future");
  }
  if (k < 1) throw std::invalid_argument("scripted_predictor: K must be >= 1");

  std::vector<FrameState> traj;
  switch (kind) {
    case PredictorKind::oracle: traj = *token.tv.future; break;
    case PredictorKind::delayed: traj = delayed_trajectory(token, param); break;
    case PredictorKind::offset: traj = offset_trajectory(token, param); break;
    case PredictorKind::no_cross: traj = no_cross_trajectory(token); break;
  }

  Prediction pred;
  pred.token_id = token.id;
  const double denom = static_cast<double>(k) * (k + 1) / 2.0;
  for (int i = 0; i < k; ++i) {
    PredictionMode mode;
    mode.trajectory = traj;
    mode.score = static_cast<double>(k - i) / denom;  // descending, sums to 1
    pred.modes.push_back(std::move(mode));
  }
  return pred;
}

}  // namespace esp
