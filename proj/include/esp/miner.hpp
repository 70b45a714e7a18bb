#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "esp/types.hpp"

namespace esp {

struct StreamAgentState {
  std::string id;
  AgentCategory category = AgentCategory::car;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  BoundingBox2D bbox;
};

struct StreamFrame {
  double timestamp = 0.0;
  std::vector<StreamAgentState> agents;  // ego included
};

/// Continuous 10 Hz recording: per-frame agent states plus a LaneSet and
/// SemanticInfrastructure valid for the whole stream. Infrastructure
/// distances are stations along the route measured from the stream origin.
struct FrameStream {
  std::string id;
  std::string ego_id;
  Weather weather = Weather::clear;
  LaneSet lanes;
  SemanticInfrastructure infra;
  std::vector<StreamFrame> frames;

  const StreamAgentState* agent_at(int frame, std::string_view agent_id) const;
};

struct MiningConfig {
  double ttc_threshold = 5.0;        // s
  double min_decel_threshold = -0.9;  // m/s^2
  double avg_decel_threshold = -0.5;  // m/s^2
  int detection_stride = 3;           // frames between probes
  int probe_offset = 3;               // accel probes use t-3 / t0 / t+3 frames
  double ev_radius = 100.0;           // m, EV role cutoff around ego
  double dangerous_headway = 0.5;     // s; dangerous zone = gap < this x ego speed
  double candidate_range = 200.0;     // m, how far ahead a lead is considered
};

enum class TriggerClause { cut_in, dangerous_zone };

struct TriggerRecord {
  int frame = 0;  // stream frame index of the trigger (token t = 0)
  std::string tv_id;
  TriggerClause clause = TriggerClause::cut_in;
  double ttc = 0.0;  // at the trigger frame
};

struct RoleMap {
  std::string tv_id;
  std::optional<std::string> cipv_id;  // absent when the CIPV is the TV itself
  std::vector<std::string> ev_ids;
};

/// gap / closing_speed when closing, +infinity otherwise.
double compute_ttc(double gap, double closing_speed);

/// Front-blocking detection at one frame. Triggers when a lead candidate
/// ahead of the ego (own or adjacent lane) has TTC below threshold, the ego
/// decelerates hard over the following 5 s, and the candidate either cuts
/// into the ego lane or enters the dangerous zone. Absence is no trigger.
std::optional<TriggerRecord> detect_front_blocking(const FrameStream& stream, int at,
                                                   const MiningConfig& cfg);

/// TV = trigger agent; CIPV = nearest same-lane lead of the ego (folded
/// into the TV when they coincide); EV = every other agent within
/// ev_radius of the ego at the trigger frame.
RoleMap assign_roles(const FrameStream& stream, int at, const TriggerRecord& trigger,
                     const MiningConfig& cfg);

/// Ground-truth cut-in moment of a TV future: LaMT against the boundary
/// selected from the future's own drift. None when the future never
/// crosses (or starts outside the mapped lanes).
std::optional<double> label_cutin_moment(std::span<const FrameState> tv_future,
                                         const BoundingBox2D& box, const LaneSet& lanes);

/// Slides detection every detection_stride frames and cuts a token per
/// trigger: 31 history + 50 future frames around the trigger frame, roles
/// assigned, t_c and scenario_type labeled. Triggers for the same TV
/// within 3 s are deduplicated keeping the earliest. Throws
/// std::runtime_error when the stream frame spacing deviates from 0.1 s by
/// more than 1e-6.
std::vector<Token> mine_tokens(const FrameStream& stream, const MiningConfig& cfg);

struct DatasetSplit {
  std::vector<Token> train;
  std::vector<Token> val;
  std::vector<Token> test;
};

/// Deterministic 8:1:1 partition by seeded shuffle of token ids; split
/// sizes differ from the exact ratio by at most one.
DatasetSplit split_dataset(std::vector<Token> tokens, uint64_t seed);

}  // namespace esp
