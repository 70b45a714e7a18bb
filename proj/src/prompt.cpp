#include <cmath>
#include <cstdio>
#include <sstream>

#include "esp/esp_features.hpp"
#include "esp/geometry.hpp"
#include "esp/io.hpp"

namespace esp {

namespace {

std::string fmt1(double v) {
  char buf[40];
  // avoid the "-0.0" rendering
  if (v == 0.0) v = 0.0;
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

const FrameState& now_frame(const AgentTrack& t) { return t.history[kHistoryFrames - 1]; }

std::string category_word(AgentCategory c) {
  switch (c) {
    case AgentCategory::car: return "car";
    case AgentCategory::truck: return "truck";
    case AgentCategory::other: return "vehicle";
  }
  return "vehicle";
}

std::string speed_trend_phrase(const AgentTrack& t) {
  const FrameState* first = nullptr;
  const FrameState* last = nullptr;
  for (const FrameState& f : t.history) {
    if (!f.valid) continue;
    if (!first) first = &f;
    last = &f;
  }
  if (!first) return "unobserved";
  const double delta = last->speed - first->speed;
  if (delta > 0.5) return "accelerating";
  if (delta < -0.5) return "decelerating";
  return "steady";
}

std::string relative_position_phrase(const Token& token, const AgentTrack& t) {
  const FrameState& f = now_frame(t);
  const FrameState& ego = now_frame(token.ego);
  const double dx = f.x - ego.x;  // token frame: ego at origin heading +x
  std::string out = fmt1(std::abs(dx)) + " m " + (dx >= 0.0 ? "ahead of" : "behind") + " ego";

  const std::optional<int> ego_lane = lane_containing(token.lanes, Point2{ego.x, ego.y});
  const std::optional<int> lane = lane_containing(token.lanes, Point2{f.x, f.y});
  if (!lane) {
    out += ", off the mapped lanes";
  } else if (ego_lane && *lane == *ego_lane) {
    out += ", in the ego lane";
  } else if (ego_lane) {
    const double side =
        project_to_polyline(token.lanes.centerlines[static_cast<size_t>(*ego_lane)],
                            Point2{f.x, f.y})
            .signed_lateral;
    out += side > 0.0 ? ", in the left adjacent lane" : ", in the right adjacent lane";
  }
  return out;
}

std::string junction_phrase(JunctionKind k) {
  switch (k) {
    case JunctionKind::off_ramp: return "Off-ramp exit";
    case JunctionKind::on_ramp: return "On-ramp entrance";
    case JunctionKind::merge: return "Merge zone";
  }
  return "Junction";
}

std::string rare_object_word(RareObjectKind k) {
  switch (k) {
    case RareObjectKind::cone: return "Cone";
    case RareObjectKind::barrier: return "Barrier";
    case RareObjectKind::debris: return "Debris";
    case RareObjectKind::other: return "Object";
  }
  return "Object";
}

struct ChannelNames {
  const char* a;
  const char* b;
};

ChannelNames channel_names(PairKind p) {
  switch (p) {
    case PairKind::ego_tv: return {"Ego", "TV"};
    case PairKind::ego_cipv: return {"Ego", "CIPV"};
    case PairKind::ego_ev: return {"Ego", "the nearest EV"};
    case PairKind::tv_cipv: return {"TV", "CIPV"};
    case PairKind::tv_ev: return {"TV", "the nearest EV"};
  }
  return {"Ego", "TV"};
}

std::vector<std::string> extrospective_lines(const Token& token) {
  const ESPTensor tensor = extract_esp_tensor(token);
  std::vector<std::string> lines;
  for (const ESPChannel& ch : tensor.channels) {
    double sum = 0.0;
    int count = 0;
    double last_distance = 0.0;
    for (int i = 0; i < kHistoryFrames; ++i) {
      if (!ch.valid[static_cast<size_t>(i)]) continue;
      sum += ch.rel_long_vel[static_cast<size_t>(i)];
      last_distance = ch.distance[static_cast<size_t>(i)];
      ++count;
    }
    if (count == 0) continue;
    const double mean = sum / count;
    const ChannelNames names = channel_names(ch.pair);
    std::string line;
    if (mean < -0.05) {
      line = std::string(names.a) + " is closing on " + names.b + " at " + fmt1(-mean) +
             " m/s, gap " + fmt1(last_distance) + " m.";
    } else if (mean > 0.05) {
      line = std::string(names.a) + " is opening from " + names.b + " at " + fmt1(mean) +
             " m/s, gap " + fmt1(last_distance) + " m.";
    } else {
      line = std::string(names.a) + " is holding distance to " + names.b + ", gap " +
             fmt1(last_distance) + " m.";
    }
    lines.push_back(std::move(line));
  }
  if (lines.empty()) lines.push_back("none observed");
  return lines;
}

std::string lane_phrase(const Token& token, const AgentTrack& t) {
  const FrameState& f = now_frame(t);
  const std::optional<int> lane = lane_containing(token.lanes, Point2{f.x, f.y});
  if (!lane) return "off the mapped lanes";
  return "in lane " + std::to_string(*lane) + " of " +
         std::to_string(token.lanes.centerlines.size());
}

}  // namespace

std::string PromptDocument::text() const {
  std::ostringstream out;
  bool first = true;
  for (const PromptSection& s : sections) {
    if (!first) out << "\n";
    first = false;
    out << "== " << s.title << " ==\n";
    for (const std::string& line : s.lines) out << line << "\n";
  }
  return out.str();
}

PromptDocument to_prompt(const Token& token) {
  PromptDocument doc;

  doc.sections[0].title = "Scene";
  doc.sections[0].lines.push_back(
      "Lane type: " + to_string(token.scene.lane_type) + ". Weather: " +
      to_string(token.scene.weather) + ". Vehicles in scope: " +
      std::to_string(token.scene.vehicle_count) + " (ego included).");
  doc.sections[0].lines.push_back("Scenario class: " + to_string(token.scenario_type) + ".");

  doc.sections[1].title = "Ego vehicle";
  {
    const AgentTrack& ego = token.ego;
    doc.sections[1].lines.push_back(
        std::string(1, static_cast<char>(std::toupper(category_word(ego.category)[0]))) +
        category_word(ego.category).substr(1) + ", " + fmt1(ego.bbox.length) + " m x " +
        fmt1(ego.bbox.width) + " m, " + lane_phrase(token, ego) + ".");
    doc.sections[1].lines.push_back("Speed " + fmt1(now_frame(ego).speed) + " m/s, " +
                                    speed_trend_phrase(ego) + " over the last " +
                                    fmt1(kHistoryHorizon) + " s.");
  }

  doc.sections[2].title = "Target vehicle";
  {
    const AgentTrack& tv = token.tv;
    doc.sections[2].lines.push_back(category_word(tv.category) + " (" + fmt1(tv.bbox.length) +
                                    " m x " + fmt1(tv.bbox.width) + " m), " +
                                    relative_position_phrase(token, tv) + ".");
    doc.sections[2].lines.push_back("Speed " + fmt1(now_frame(tv).speed) + " m/s, " +
                                    speed_trend_phrase(tv) + " over the last " +
                                    fmt1(kHistoryHorizon) + " s.");
    doc.sections[2].lines.push_back("Future behavior over the next " + fmt1(kFutureHorizon) +
                                    " s is to be predicted.");
  }

  doc.sections[3].title = "Relative Interaction Vehicles";
  for (const AgentTrack& ev : token.evs) {
    const std::string role = ev.role == AgentRole::CIPV ? "CIPV" : "EV";
    doc.sections[3].lines.push_back(role + ": " + category_word(ev.category) + " " +
                                    relative_position_phrase(token, ev) + ", speed " +
                                    fmt1(now_frame(ev).speed) + " m/s.");
  }
  if (doc.sections[3].lines.empty()) doc.sections[3].lines.push_back("none observed");

  doc.sections[4].title = "Semantic Infrastructure";
  for (const Junction& j : token.infra.junctions) {
    doc.sections[4].lines.push_back(junction_phrase(j.kind) + " in " + fmt1(j.distance_ahead) +
                                    " m.");
  }
  for (const SpeedMonitor& m : token.infra.speed_monitors) {
    doc.sections[4].lines.push_back("Speed monitor in " + fmt1(m.position_along_route) +
                                    " m, limit " + fmt1(m.limit) + " m/s.");
  }
  for (const RareObject& ro : token.infra.rare_objects) {
    const std::string side = ro.y >= 0.0 ? "left" : "right";
    doc.sections[4].lines.push_back(rare_object_word(ro.kind) + " " + fmt1(std::abs(ro.x)) +
                                    " m " + (ro.x >= 0.0 ? "ahead" : "behind") + ", offset " +
                                    fmt1(std::abs(ro.y)) + " m " + side + ".");
  }
  if (doc.sections[4].lines.empty()) doc.sections[4].lines.push_back("none observed");

  doc.sections[5].title = "Extrospective Features";
  doc.sections[5].lines = extrospective_lines(token);

  return doc;
}

std::optional<ToolboxQuery> toolbox_query_from_string(std::string_view s) {
  if (s == "vehicle_ahead_tv") return ToolboxQuery::vehicle_ahead_tv;
  if (s == "left_lane_status_tv") return ToolboxQuery::left_lane_status_tv;
  if (s == "right_lane_status_tv") return ToolboxQuery::right_lane_status_tv;
  if (s == "distance_to_junction") return ToolboxQuery::distance_to_junction;
  if (s == "tv_speed_trend") return ToolboxQuery::tv_speed_trend;
  return std::nullopt;
}

std::string to_string(ToolboxQuery q) {
  switch (q) {
    case ToolboxQuery::vehicle_ahead_tv: return "vehicle_ahead_tv";
    case ToolboxQuery::left_lane_status_tv: return "left_lane_status_tv";
    case ToolboxQuery::right_lane_status_tv: return "right_lane_status_tv";
    case ToolboxQuery::distance_to_junction: return "distance_to_junction";
    case ToolboxQuery::tv_speed_trend: return "tv_speed_trend";
  }
  return "vehicle_ahead_tv";
}

namespace {

// Every non-TV track in the token, ego included.
std::vector<const AgentTrack*> other_tracks(const Token& token) {
  std::vector<const AgentTrack*> out;
  out.push_back(&token.ego);
  for (const AgentTrack& ev : token.evs) out.push_back(&ev);
  return out;
}

std::string answer_vehicle_ahead_tv(const Token& token) {
  const FrameState& tv = now_frame(token.tv);
  if (!tv.valid) return "none";
  const std::optional<int> tv_lane = lane_containing(token.lanes, Point2{tv.x, tv.y});
  if (!tv_lane) return "none";
  const Polyline& center = token.lanes.centerlines[static_cast<size_t>(*tv_lane)];
  const double tv_station = project_to_polyline(center, Point2{tv.x, tv.y}).station;

  const AgentTrack* lead = nullptr;
  double lead_ds = 0.0;
  for (const AgentTrack* t : other_tracks(token)) {
    const FrameState& f = now_frame(*t);
    if (!f.valid) continue;
    const std::optional<int> lane = lane_containing(token.lanes, Point2{f.x, f.y});
    if (!lane || *lane != *tv_lane) continue;
    const double ds = project_to_polyline(center, Point2{f.x, f.y}).station - tv_station;
    if (ds <= 0.0) continue;
    if (!lead || ds < lead_ds) {
      lead = t;
      lead_ds = ds;
    }
  }
  if (!lead) return "none";

  const double gap =
      std::max(0.0, lead_ds - (lead->bbox.length + token.tv.bbox.length) / 2.0);
  const bool slow = now_frame(*lead).speed + 2.0 < tv.speed;
  return std::string(slow ? "slow " : "") + category_word(lead->category) + " ahead of TV, gap " +
         fmt1(gap) + " m";
}

std::string answer_lane_status(const Token& token, bool left) {
  const FrameState& tv = now_frame(token.tv);
  if (!tv.valid) return "no adjacent lane";
  const std::optional<int> tv_lane = lane_containing(token.lanes, Point2{tv.x, tv.y});
  if (!tv_lane) return "no adjacent lane";
  const Polyline& center = token.lanes.centerlines[static_cast<size_t>(*tv_lane)];

  // Pick the adjacent lane on the requested side of the TV's lane.
  int side_lane = -1;
  for (const LaneBoundary& b : token.lanes.boundaries) {
    int other = -1;
    if (b.lane_a == *tv_lane) other = b.lane_b;
    else if (b.lane_b == *tv_lane) other = b.lane_a;
    if (other < 0) continue;
    const Point2 probe =
        project_to_polyline(token.lanes.centerlines[static_cast<size_t>(other)],
                            Point2{tv.x, tv.y})
            .closest;
    const double side = project_to_polyline(center, probe).signed_lateral;
    if ((left && side > 0.0) || (!left && side < 0.0)) side_lane = other;
  }
  if (side_lane < 0) return "no adjacent lane";

  const Polyline& side_center = token.lanes.centerlines[static_cast<size_t>(side_lane)];
  const double tv_station = project_to_polyline(side_center, Point2{tv.x, tv.y}).station;
  for (const AgentTrack* t : other_tracks(token)) {
    const FrameState& f = now_frame(*t);
    if (!f.valid) continue;
    const std::optional<int> lane = lane_containing(token.lanes, Point2{f.x, f.y});
    if (!lane || *lane != side_lane) continue;
    const double ds =
        std::abs(project_to_polyline(side_center, Point2{f.x, f.y}).station - tv_station);
    if (ds <= 30.0) return "Occupied";
  }
  return "Clear";
}

std::string answer_distance_to_junction(const Token& token) {
  const Junction* nearest = nullptr;
  for (const Junction& j : token.infra.junctions) {
    if (!nearest || j.distance_ahead < nearest->distance_ahead) nearest = &j;
  }
  if (!nearest) return "none";
  return junction_phrase(nearest->kind) + " in " + fmt1(nearest->distance_ahead) + " m";
}

std::string answer_tv_speed_trend(const Token& token) {
  const FrameState* first = nullptr;
  const FrameState* last = nullptr;
  for (const FrameState& f : token.tv.history) {
    if (!f.valid) continue;
    if (!first) first = &f;
    last = &f;
  }
  if (!first) return "unobserved";
  const double delta = last->speed - first->speed;
  if (delta > 0.5) {
    return "accelerating, from " + fmt1(first->speed) + " to " + fmt1(last->speed) +
           " m/s over the last " + fmt1(kHistoryHorizon) + " s";
  }
  if (delta < -0.5) {
    return "decelerating, from " + fmt1(first->speed) + " to " + fmt1(last->speed) +
           " m/s over the last " + fmt1(kHistoryHorizon) + " s";
  }
  return "steady at " + fmt1(last->speed) + " m/s";
}

}  // namespace

std::string toolbox_query(const Token& token, ToolboxQuery query) {
  switch (query) {
    case ToolboxQuery::vehicle_ahead_tv: return answer_vehicle_ahead_tv(token);
    case ToolboxQuery::left_lane_status_tv: return answer_lane_status(token, true);
    case ToolboxQuery::right_lane_status_tv: return answer_lane_status(token, false);
    case ToolboxQuery::distance_to_junction: return answer_distance_to_junction(token);
    case ToolboxQuery::tv_speed_trend: return answer_tv_speed_trend(token);
  }
  throw std::runtime_error("toolbox_query: unknown query");
}

}  // namespace esp
