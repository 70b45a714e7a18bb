#include <doctest.h>

#include <string>

#include "esp/io.hpp"
#include "support/fixtures.hpp"

using namespace esp;
using namespace esp::testing;

namespace {

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

// Fig. 1 flavor: ego truck on the right lane, TV stuck behind a slow truck
// one lane over, clear lane beyond, off-ramp ahead.
Token fig1_token() {
  TokenBuilder b;
  b.id = "fig1";
  b.ego_lane = 0;
  b.ego_speed = 22.0;
  b.tv_lane = 1;
  b.tv_speed = 21.0;
  b.tv_x0 = 45.0;
  b.crossing_contact_time = 2.35;
  b.extras.push_back(ExtraAgent{"slowtruck", AgentRole::EV, AgentCategory::truck,
                                BoundingBox2D{12.0, 2.5}, 1, 75.0, 14.0, {}});
  b.infra.junctions.push_back(Junction{JunctionKind::off_ramp, 200.0});
  return b.build();
}

}  // namespace

TEST_CASE("to_prompt renders all six sections in paradigm order") {
  const Token token = fig1_token();
  const PromptDocument doc = to_prompt(token);
  CHECK(doc.sections[0].title == "Scene");
  CHECK(doc.sections[1].title == "Ego vehicle");
  CHECK(doc.sections[2].title == "Target vehicle");
  CHECK(doc.sections[3].title == "Relative Interaction Vehicles");
  CHECK(doc.sections[4].title == "Semantic Infrastructure");
  CHECK(doc.sections[5].title == "Extrospective Features");
  for (const PromptSection& s : doc.sections) CHECK(!s.lines.empty());
}

TEST_CASE("off-ramp distances render verbatim-style") {
  const std::string text = to_prompt(fig1_token()).text();
  CHECK(contains(text, "Off-ramp exit in 200.0 m"));
}

TEST_CASE("empty infrastructure renders as none observed") {
  const Token token = TokenBuilder{}.build();
  const PromptDocument doc = to_prompt(token);
  REQUIRE(doc.sections[4].lines.size() == 1);
  CHECK(doc.sections[4].lines[0] == "none observed");
}

TEST_CASE("closing channel summaries carry the signed trend") {
  // CIPV 5 m/s slower than the TV: tv_cipv mean rel_long_vel = -5
  TokenBuilder b;
  b.ego_lane = 1;
  b.ego_speed = 23.0;
  b.tv_lane = 2;
  b.tv_speed = 20.0;
  b.tv_x0 = 30.0;
  b.extras.push_back(ExtraAgent{"cipv", AgentRole::CIPV, AgentCategory::truck,
                                BoundingBox2D{12.0, 2.5}, 1, 60.0, 15.0, {}});
  const std::string text = to_prompt(b.build()).text();
  CHECK(contains(text, "TV is closing on CIPV at 5.0 m/s"));
}

TEST_CASE("prompt rendering is deterministic") {
  const Token token = fig1_token();
  const std::string a = to_prompt(token).text();
  const std::string b = to_prompt(token).text();
  CHECK(a == b);
  CHECK(!a.empty());
  // one decimal everywhere: a second render of a copy is also identical
  Token copy = token;
  CHECK(to_prompt(copy).text() == a);
}

TEST_CASE("toolbox: vehicle ahead of the TV") {
  const Token token = fig1_token();
  const std::string answer = toolbox_query(token, ToolboxQuery::vehicle_ahead_tv);
  CHECK(contains(answer, "slow truck ahead of TV"));
  CHECK(contains(answer, "gap"));

  // nothing ahead of the TV in its lane
  const Token lonely = TokenBuilder{}.build();
  CHECK(toolbox_query(lonely, ToolboxQuery::vehicle_ahead_tv) == "none");
}

TEST_CASE("toolbox: lane status") {
  // fig1: TV in lane 1; lane 2 is empty, lane 0 holds the ego ~45 m behind
  const Token token = fig1_token();
  CHECK(toolbox_query(token, ToolboxQuery::left_lane_status_tv) == "Clear");
  CHECK(toolbox_query(token, ToolboxQuery::right_lane_status_tv) == "Clear");

  // park an EV right beside the TV in lane 2: left becomes occupied
  TokenBuilder b;
  b.ego_lane = 0;
  b.tv_lane = 1;
  b.tv_x0 = 45.0;
  b.extras.push_back(ExtraAgent{"beside", AgentRole::EV, AgentCategory::car,
                                BoundingBox2D{4.6, 1.9}, 2, 50.0, 24.0, {}});
  const Token busy = b.build();
  CHECK(toolbox_query(busy, ToolboxQuery::left_lane_status_tv) == "Occupied");

  // ego itself occupies the right lane when close enough
  TokenBuilder c;
  c.ego_lane = 0;
  c.tv_lane = 1;
  c.tv_x0 = 20.0;  // within the 30 m window
  const Token tail = c.build();
  CHECK(toolbox_query(tail, ToolboxQuery::right_lane_status_tv) == "Occupied");

  // no lane beyond the leftmost one
  TokenBuilder d;
  d.ego_lane = 1;
  d.tv_lane = 2;
  const Token edge = d.build();
  CHECK(toolbox_query(edge, ToolboxQuery::left_lane_status_tv) == "no adjacent lane");
}

TEST_CASE("toolbox: distance to junction") {
  const Token token = fig1_token();
  CHECK(toolbox_query(token, ToolboxQuery::distance_to_junction) ==
        "Off-ramp exit in 200.0 m");

  TokenBuilder b;
  b.infra.junctions.push_back(Junction{JunctionKind::merge, 350.0});
  b.infra.junctions.push_back(Junction{JunctionKind::on_ramp, 120.0});
  CHECK(toolbox_query(b.build(), ToolboxQuery::distance_to_junction) ==
        "On-ramp entrance in 120.0 m");

  CHECK(toolbox_query(TokenBuilder{}.build(), ToolboxQuery::distance_to_junction) == "none");
}

TEST_CASE("toolbox: tv speed trend") {
  Token token = fig1_token();
  CHECK(contains(toolbox_query(token, ToolboxQuery::tv_speed_trend), "steady"));

  // synthesize a decelerating history
  for (int k = 0; k < kHistoryFrames; ++k) {
    token.tv.history[k].speed = 24.0 - 0.1 * k;
  }
  CHECK(contains(toolbox_query(token, ToolboxQuery::tv_speed_trend), "decelerating"));

  for (int k = 0; k < kHistoryFrames; ++k) {
    token.tv.history[k].speed = 18.0 + 0.1 * k;
  }
  const std::string up = toolbox_query(token, ToolboxQuery::tv_speed_trend);
  CHECK(contains(up, "accelerating"));
  CHECK(contains(up, "18.0"));
  CHECK(contains(up, "21.0"));
}

TEST_CASE("toolbox query names round-trip; unknown names are rejected") {
  for (ToolboxQuery q :
       {ToolboxQuery::vehicle_ahead_tv, ToolboxQuery::left_lane_status_tv,
        ToolboxQuery::right_lane_status_tv, ToolboxQuery::distance_to_junction,
        ToolboxQuery::tv_speed_trend}) {
    CHECK(toolbox_query_from_string(to_string(q)) == q);
  }
  CHECK(!toolbox_query_from_string("GetVehicleAheadTV").has_value());
  CHECK(!toolbox_query_from_string("").has_value());
}
