#include "esp/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "esp/geometry.hpp"

namespace esp {

using nlohmann::json;

namespace {

// Canonical float: six significant digits, the round-trip anchor of every
// file format.
double canon6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

json num(double v) { return json(canon6(v)); }

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where, bool strict) {
  if (!strict || !obj.is_object()) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) throw std::runtime_error(where + ": unknown key '" + it.key() + "'");
  }
}

void check_schema_version(const json& j) {
  const std::string v = j.at("schema_version").get<std::string>();
  if (v != kSchemaVersion) {
    throw std::runtime_error("schema_version mismatch: file has '" + v + "', expected '" +
                             std::string(kSchemaVersion) + "'");
  }
}

// ---- frame states: compact arrays [t, x, y, heading, speed, valid]

json frame_to_json(const FrameState& f) {
  return json::array({num(f.t), num(f.x), num(f.y), num(f.heading), num(f.speed), f.valid});
}

FrameState frame_from_json(const json& j) {
  if (!j.is_array() || j.size() != 6) throw std::runtime_error("frame: expected 6-element array");
  FrameState f;
  f.t = j[0].get<double>();
  f.x = j[1].get<double>();
  f.y = j[2].get<double>();
  f.heading = j[3].get<double>();
  f.speed = j[4].get<double>();
  f.valid = j[5].get<bool>();
  return f;
}

json frames_to_json(const std::vector<FrameState>& frames) {
  json arr = json::array();
  for (const FrameState& f : frames) arr.push_back(frame_to_json(f));
  return arr;
}

std::vector<FrameState> frames_from_json(const json& j) {
  std::vector<FrameState> out;
  for (const json& f : j) out.push_back(frame_from_json(f));
  return out;
}

// ---- polylines and lanes

json polyline_to_json(const Polyline& p) {
  json arr = json::array();
  for (const Point2& pt : p) arr.push_back(json::array({num(pt.x), num(pt.y)}));
  return arr;
}

Polyline polyline_from_json(const json& j) {
  Polyline out;
  for (const json& pt : j) out.push_back(Point2{pt.at(0).get<double>(), pt.at(1).get<double>()});
  return out;
}

json lanes_to_json(const LaneSet& lanes) {
  json j;
  j["centerlines"] = json::array();
  for (const Polyline& c : lanes.centerlines) j["centerlines"].push_back(polyline_to_json(c));
  j["boundaries"] = json::array();
  for (const LaneBoundary& b : lanes.boundaries) {
    j["boundaries"].push_back(
        json{{"points", polyline_to_json(b.points)}, {"lane_a", b.lane_a}, {"lane_b", b.lane_b}});
  }
  j["road_edges"] = json::array();
  for (const Polyline& e : lanes.road_edges) j["road_edges"].push_back(polyline_to_json(e));
  return j;
}

LaneSet lanes_from_json(const json& j, bool strict) {
  check_keys(j, {"centerlines", "boundaries", "road_edges"}, "lanes", strict);
  LaneSet lanes;
  for (const json& c : j.at("centerlines")) lanes.centerlines.push_back(polyline_from_json(c));
  for (const json& b : j.at("boundaries")) {
    check_keys(b, {"points", "lane_a", "lane_b"}, "lanes.boundaries", strict);
    lanes.boundaries.push_back(LaneBoundary{polyline_from_json(b.at("points")),
                                            b.at("lane_a").get<int>(),
                                            b.at("lane_b").get<int>()});
  }
  for (const json& e : j.at("road_edges")) lanes.road_edges.push_back(polyline_from_json(e));
  return lanes;
}

// ---- infrastructure

json infra_to_json(const SemanticInfrastructure& infra) {
  json j;
  j["speed_monitors"] = json::array();
  for (const SpeedMonitor& m : infra.speed_monitors) {
    j["speed_monitors"].push_back(
        json{{"position_along_route", num(m.position_along_route)}, {"limit", num(m.limit)}});
  }
  j["junctions"] = json::array();
  for (const Junction& junc : infra.junctions) {
    j["junctions"].push_back(
        json{{"kind", to_string(junc.kind)}, {"distance_ahead", num(junc.distance_ahead)}});
  }
  j["rare_objects"] = json::array();
  for (const RareObject& ro : infra.rare_objects) {
    j["rare_objects"].push_back(
        json{{"kind", to_string(ro.kind)}, {"x", num(ro.x)}, {"y", num(ro.y)}});
  }
  return j;
}

template <typename T>
T parse_enum(const json& j, std::optional<T> (*from_string)(std::string_view),
             const char* what) {
  const std::string s = j.get<std::string>();
  const std::optional<T> v = from_string(s);
  if (!v) throw std::runtime_error(std::string(what) + ": unknown value '" + s + "'");
  return *v;
}

SemanticInfrastructure infra_from_json(const json& j, bool strict) {
  check_keys(j, {"speed_monitors", "junctions", "rare_objects"}, "infra", strict);
  SemanticInfrastructure infra;
  for (const json& m : j.at("speed_monitors")) {
    check_keys(m, {"position_along_route", "limit"}, "infra.speed_monitors", strict);
    infra.speed_monitors.push_back(SpeedMonitor{m.at("position_along_route").get<double>(),
                                                m.at("limit").get<double>()});
  }
  for (const json& junc : j.at("junctions")) {
    check_keys(junc, {"kind", "distance_ahead"}, "infra.junctions", strict);
    infra.junctions.push_back(
        Junction{parse_enum(junc.at("kind"), junction_kind_from_string, "junction kind"),
                 junc.at("distance_ahead").get<double>()});
  }
  for (const json& ro : j.at("rare_objects")) {
    check_keys(ro, {"kind", "x", "y"}, "infra.rare_objects", strict);
    infra.rare_objects.push_back(
        RareObject{parse_enum(ro.at("kind"), rare_object_kind_from_string, "rare object kind"),
                   ro.at("x").get<double>(), ro.at("y").get<double>()});
  }
  return infra;
}

// ---- agents

json track_to_json(const AgentTrack& t) {
  json j;
  j["id"] = t.id;
  j["category"] = to_string(t.category);
  j["role"] = to_string(t.role);
  j["bbox"] = json{{"length", num(t.bbox.length)}, {"width", num(t.bbox.width)}};
  j["history"] = frames_to_json(t.history);
  if (t.future) j["future"] = frames_to_json(*t.future);
  return j;
}

AgentTrack track_from_json(const json& j, bool strict) {
  check_keys(j, {"id", "category", "role", "bbox", "history", "future"}, "agent", strict);
  AgentTrack t;
  t.id = j.at("id").get<std::string>();
  t.category = parse_enum(j.at("category"), category_from_string, "agent category");
  t.role = parse_enum(j.at("role"), role_from_string, "agent role");
  const json& bbox = j.at("bbox");
  check_keys(bbox, {"length", "width"}, "agent.bbox", strict);
  t.bbox = BoundingBox2D{bbox.at("length").get<double>(), bbox.at("width").get<double>()};
  t.history = frames_from_json(j.at("history"));
  if (j.contains("future")) t.future = frames_from_json(j.at("future"));
  return t;
}

// ---- esp tensor cache block

json esp_to_json(const ESPTensor& tensor) {
  json channels = json::array();
  for (const ESPChannel& ch : tensor.channels) {
    json c;
    c["pair"] = to_string(ch.pair);
    c["distance"] = json::array();
    c["rel_long_vel"] = json::array();
    c["valid"] = json::array();
    for (int i = 0; i < kHistoryFrames; ++i) {
      c["distance"].push_back(num(ch.distance[static_cast<size_t>(i)]));
      c["rel_long_vel"].push_back(num(ch.rel_long_vel[static_cast<size_t>(i)]));
      c["valid"].push_back(ch.valid[static_cast<size_t>(i)]);
    }
    channels.push_back(std::move(c));
  }
  return json{{"channels", channels}};
}

void verify_esp_block(const json& j, const Token& token, bool strict) {
  check_keys(j, {"channels"}, "esp", strict);
  const json& channels = j.at("channels");
  if (channels.size() != kNumPairKinds) {
    throw std::runtime_error("esp: expected " + std::to_string(kNumPairKinds) + " channels");
  }
  const ESPTensor fresh = extract_esp_tensor(token);
  for (int c = 0; c < kNumPairKinds; ++c) {
    const json& jc = channels[static_cast<size_t>(c)];
    check_keys(jc, {"pair", "distance", "rel_long_vel", "valid"}, "esp.channel", strict);
    const ESPChannel& ref = fresh.channels[static_cast<size_t>(c)];
    if (jc.at("pair").get<std::string>() != to_string(ref.pair)) {
      throw std::runtime_error("esp: channel order mismatch");
    }
    for (int i = 0; i < kHistoryFrames; ++i) {
      const bool valid = jc.at("valid")[static_cast<size_t>(i)].get<bool>();
      const double dist = jc.at("distance")[static_cast<size_t>(i)].get<double>();
      const double rel = jc.at("rel_long_vel")[static_cast<size_t>(i)].get<double>();
      if (valid != ref.valid[static_cast<size_t>(i)] ||
          std::abs(dist - ref.distance[static_cast<size_t>(i)]) > 1e-3 ||
          std::abs(rel - ref.rel_long_vel[static_cast<size_t>(i)]) > 1e-3) {
        throw std::runtime_error("esp: cached tensor disagrees with recomputation in channel " +
                                 to_string(ref.pair));
      }
    }
  }
}

// ---- tokens

json token_to_json(const Token& token, const ESPTensor* esp) {
  json j;
  j["schema_version"] = std::string(kSchemaVersion);
  j["id"] = token.id;
  j["scene"] = json{{"lane_type", to_string(token.scene.lane_type)},
                    {"weather", to_string(token.scene.weather)},
                    {"vehicle_count", token.scene.vehicle_count}};
  j["lanes"] = lanes_to_json(token.lanes);
  json agents = json::array();
  agents.push_back(track_to_json(token.ego));
  agents.push_back(track_to_json(token.tv));
  for (const AgentTrack& ev : token.evs) agents.push_back(track_to_json(ev));
  j["agents"] = std::move(agents);
  j["infra"] = infra_to_json(token.infra);
  j["scenario_type"] = to_string(token.scenario_type);
  j["t_c"] = token.t_c ? num(*token.t_c) : json(nullptr);
  if (esp) j["esp"] = esp_to_json(*esp);
  for (const auto& [key, raw] : token.extras) j[key] = json::parse(raw);
  return j;
}

Token token_from_json(const json& j, const ParseOptions& opts) {
  static constexpr const char* kTokenKeys[] = {"schema_version", "id",    "scene",
                                               "lanes",          "agents", "infra",
                                               "scenario_type",  "t_c",   "esp"};
  check_keys(j,
             {"schema_version", "id", "scene", "lanes", "agents", "infra", "scenario_type",
              "t_c", "esp"},
             "token", opts.strict);
  check_schema_version(j);

  Token token;
  token.id = j.at("id").get<std::string>();
  if (!opts.strict) {  // lax mode preserves unknown top-level keys verbatim
    for (auto it = j.begin(); it != j.end(); ++it) {
      bool known = false;
      for (const char* k : kTokenKeys) known = known || it.key() == k;
      if (!known) token.extras[it.key()] = it.value().dump();
    }
  }

  const json& scene = j.at("scene");
  check_keys(scene, {"lane_type", "weather", "vehicle_count"}, "scene", opts.strict);
  token.scene.lane_type = parse_enum(scene.at("lane_type"), lane_type_from_string, "lane_type");
  token.scene.weather = parse_enum(scene.at("weather"), weather_from_string, "weather");
  token.scene.vehicle_count = scene.at("vehicle_count").get<int>();

  token.lanes = lanes_from_json(j.at("lanes"), opts.strict);
  token.infra = infra_from_json(j.at("infra"), opts.strict);
  token.scenario_type =
      parse_enum(j.at("scenario_type"), scenario_type_from_string, "scenario_type");
  if (!j.at("t_c").is_null()) token.t_c = j.at("t_c").get<double>();

  bool have_ego = false, have_tv = false;
  for (const json& a : j.at("agents")) {
    AgentTrack track = track_from_json(a, opts.strict);
    switch (track.role) {
      case AgentRole::Ego:
        if (have_ego) throw std::runtime_error("token: duplicate ego track");
        token.ego = std::move(track);
        have_ego = true;
        break;
      case AgentRole::TV:
        if (have_tv) throw std::runtime_error("token: duplicate tv track");
        token.tv = std::move(track);
        have_tv = true;
        break;
      default:
        token.evs.push_back(std::move(track));
        break;
    }
  }
  if (!have_ego) throw std::runtime_error("token: missing ego track");
  if (!have_tv) throw std::runtime_error("token: missing tv track");

  return token;
}

void validate_or_throw(const Token& token) {
  const std::vector<std::string> violations = validate_token(token);
  if (!violations.empty()) {
    throw std::runtime_error("invalid token '" + token.id + "': " + violations.front() +
                             (violations.size() > 1
                                  ? " (+" + std::to_string(violations.size() - 1) + " more)"
                                  : ""));
  }
}

void verify_stored_tc(const Token& token) {
  if (!token.tv.future) return;
  const std::optional<double> recomputed =
      label_cutin_moment(*token.tv.future, token.tv.bbox, token.lanes);
  if (token.t_c && !recomputed) {
    throw std::runtime_error("token '" + token.id +
                             "': stored t_c but geometry finds no crossing");
  }
  if (!token.t_c && recomputed) {
    std::ostringstream msg;
    msg << "token '" << token.id << "': no stored t_c but geometry gives " << *recomputed;
    throw std::runtime_error(msg.str());
  }
  if (token.t_c && recomputed && std::abs(*token.t_c - *recomputed) > 0.1 + 1e-9) {
    std::ostringstream msg;
    msg << "token '" << token.id << "': stored t_c " << *token.t_c << " but geometry gives "
        << *recomputed;
    throw std::runtime_error(msg.str());
  }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

[[noreturn]] void fail_at_line(const std::filesystem::path& path, size_t line_no,
                               const std::string& what) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + what);
}

json parse_line(const std::filesystem::path& path, const std::string& line, size_t line_no) {
  try {
    return json::parse(line);
  } catch (const json::parse_error& e) {
    fail_at_line(path, line_no, std::string("malformed record: ") + e.what());
  }
}

void write_all(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

}  // namespace

std::string token_to_line(const Token& token) { return token_to_json(token, nullptr).dump(); }

void write_tokens(std::span<const Token> tokens, const std::filesystem::path& path) {
  std::string content;
  for (const Token& t : tokens) {
    validate_or_throw(t);
    content += token_to_line(t);
    content += '\n';
  }
  write_all(path, content);
}

void write_tokens_with_esp(std::span<const Token> tokens, std::span<const ESPTensor> tensors,
                           const std::filesystem::path& path) {
  if (tokens.size() != tensors.size()) {
    throw std::invalid_argument("write_tokens_with_esp: token/tensor count mismatch");
  }
  std::string content;
  for (size_t i = 0; i < tokens.size(); ++i) {
    validate_or_throw(tokens[i]);
    content += token_to_json(tokens[i], &tensors[i]).dump();
    content += '\n';
  }
  write_all(path, content);
}

void write_features(std::span<const Token> tokens, const std::filesystem::path& path,
                    int embed_dim) {
  std::string content;
  for (const Token& t : tokens) {
    const ESPTensor tensor = extract_esp_tensor(t);
    const EspEmbedding embedding = reference_embed(tensor, embed_dim);
    json j;
    j["schema_version"] = std::string(kSchemaVersion);
    j["token_id"] = t.id;
    j["esp"] = esp_to_json(tensor);
    json emb = json::array();
    for (double v : embedding.values) emb.push_back(num(v));
    j["embedding"] = std::move(emb);
    j["degenerate"] = embedding.degenerate;
    content += j.dump();
    content += '\n';
  }
  write_all(path, content);
}

std::vector<Token> parse_tokens(const std::filesystem::path& path, const ParseOptions& opts) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<Token> tokens;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const json j = parse_line(path, lines[i], i + 1);
    try {
      Token token = token_from_json(j, opts);
      const std::vector<std::string> violations = validate_token(token);
      if (!violations.empty()) {
        throw std::runtime_error("invalid token: " + violations.front());
      }
      verify_stored_tc(token);
      if (j.contains("esp") && !j.at("esp").is_null()) {
        verify_esp_block(j.at("esp"), token, opts.strict);
      }
      tokens.push_back(std::move(token));
    } catch (const json::exception& e) {
      fail_at_line(path, i + 1, e.what());
    } catch (const std::runtime_error& e) {
      fail_at_line(path, i + 1, e.what());
    }
  }
  return tokens;
}

// ---- streams

void write_stream(const FrameStream& stream, const std::filesystem::path& path) {
  json header;
  header["schema_version"] = std::string(kSchemaVersion);
  header["kind"] = "stream_header";
  header["id"] = stream.id;
  header["ego_id"] = stream.ego_id;
  header["weather"] = to_string(stream.weather);
  header["lanes"] = lanes_to_json(stream.lanes);
  header["infra"] = infra_to_json(stream.infra);

  std::string content = header.dump();
  content += '\n';
  for (const StreamFrame& frame : stream.frames) {
    json jf;
    jf["t"] = num(frame.timestamp);
    json agents = json::array();
    for (const StreamAgentState& a : frame.agents) {
      agents.push_back(json{{"id", a.id},
                            {"category", to_string(a.category)},
                            {"x", num(a.x)},
                            {"y", num(a.y)},
                            {"heading", num(a.heading)},
                            {"speed", num(a.speed)},
                            {"bbox", json{{"length", num(a.bbox.length)},
                                          {"width", num(a.bbox.width)}}}});
    }
    jf["agents"] = std::move(agents);
    content += jf.dump();
    content += '\n';
  }
  write_all(path, content);
}

FrameStream parse_stream(const std::filesystem::path& path, const ParseOptions& opts) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw std::runtime_error(path.string() + ": empty stream file");

  FrameStream stream;
  const json header = parse_line(path, lines[0], 1);
  try {
    check_keys(header, {"schema_version", "kind", "id", "ego_id", "weather", "lanes", "infra"},
               "stream header", opts.strict);
    check_schema_version(header);
    if (header.at("kind").get<std::string>() != "stream_header") {
      throw std::runtime_error("first record must be a stream_header");
    }
    stream.id = header.at("id").get<std::string>();
    stream.ego_id = header.at("ego_id").get<std::string>();
    stream.weather = parse_enum(header.at("weather"), weather_from_string, "weather");
    stream.lanes = lanes_from_json(header.at("lanes"), opts.strict);
    stream.infra = infra_from_json(header.at("infra"), opts.strict);
  } catch (const json::exception& e) {
    fail_at_line(path, 1, e.what());
  } catch (const std::runtime_error& e) {
    fail_at_line(path, 1, e.what());
  }

  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const json j = parse_line(path, lines[i], i + 1);
    try {
      check_keys(j, {"t", "agents"}, "frame", opts.strict);
      StreamFrame frame;
      frame.timestamp = j.at("t").get<double>();
      for (const json& a : j.at("agents")) {
        check_keys(a, {"id", "category", "x", "y", "heading", "speed", "bbox"}, "stream agent",
                   opts.strict);
        StreamAgentState st;
        st.id = a.at("id").get<std::string>();
        st.category = parse_enum(a.at("category"), category_from_string, "agent category");
        st.x = a.at("x").get<double>();
        st.y = a.at("y").get<double>();
        st.heading = a.at("heading").get<double>();
        st.speed = a.at("speed").get<double>();
        const json& bbox = a.at("bbox");
        st.bbox = BoundingBox2D{bbox.at("length").get<double>(), bbox.at("width").get<double>()};
        frame.agents.push_back(std::move(st));
      }
      stream.frames.push_back(std::move(frame));
    } catch (const json::exception& e) {
      fail_at_line(path, i + 1, e.what());
    } catch (const std::runtime_error& e) {
      fail_at_line(path, i + 1, e.what());
    }
  }
  return stream;
}

// ---- predictions

void write_predictions(std::span<const Prediction> preds, const std::filesystem::path& path) {
  std::string content;
  for (const Prediction& p : preds) {
    json j;
    j["schema_version"] = std::string(kSchemaVersion);
    j["token_id"] = p.token_id;
    json modes = json::array();
    for (const PredictionMode& m : p.modes) {
      json jm;
      jm["trajectory"] = frames_to_json(m.trajectory);
      jm["score"] = m.score ? num(*m.score) : json(nullptr);
      modes.push_back(std::move(jm));
    }
    j["modes"] = std::move(modes);
    content += j.dump();
    content += '\n';
  }
  write_all(path, content);
}

std::vector<Prediction> parse_predictions(const std::filesystem::path& path,
                                          const ParseOptions& opts) {
  const std::vector<std::string> lines = read_lines(path);
  std::vector<Prediction> preds;
  for (size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const json j = parse_line(path, lines[i], i + 1);
    try {
      check_keys(j, {"schema_version", "token_id", "modes"}, "prediction", opts.strict);
      check_schema_version(j);
      Prediction p;
      p.token_id = j.at("token_id").get<std::string>();
      for (const json& m : j.at("modes")) {
        check_keys(m, {"trajectory", "score"}, "prediction mode", opts.strict);
        PredictionMode mode;
        mode.trajectory = frames_from_json(m.at("trajectory"));
        if (m.contains("score") && !m.at("score").is_null()) {
          mode.score = m.at("score").get<double>();
        }
        p.modes.push_back(std::move(mode));
      }
      const std::vector<std::string> violations = validate_prediction(p);
      if (!violations.empty()) {
        throw std::runtime_error("invalid prediction: " + violations.front());
      }
      preds.push_back(std::move(p));
    } catch (const json::exception& e) {
      fail_at_line(path, i + 1, e.what());
    } catch (const std::runtime_error& e) {
      fail_at_line(path, i + 1, e.what());
    }
  }
  return preds;
}

// ---- reports

void write_report(const MetricsReport& report, const std::filesystem::path& path) {
  std::string content;
  json config;
  config["schema_version"] = std::string(kSchemaVersion);
  config["kind"] = "config";
  config["t_u"] = num(report.config.t_u);
  config["cutin_policy"] = report.config.policy == CutinPolicy::top1 ? "top1" : "any";
  config["cte_aggregation"] = "tokens_with_ground_truth_cutin_only";
  content += config.dump();
  content += '\n';

  for (const TokenMetrics& tm : report.per_token) {
    json j;
    j["kind"] = "token";
    j["id"] = tm.token_id;
    j["min_cte"] = tm.min_cte ? num(*tm.min_cte) : json(nullptr);
    j["min_ade"] = num(tm.min_ade);
    j["min_fde"] = num(tm.min_fde);
    j["cutin_predicted"] = tm.cutin_predicted;
    j["cutin_actual"] = tm.cutin_actual;
    content += j.dump();
    content += '\n';
  }
  for (const std::string& id : report.skipped_tokens) {
    content += json{{"kind", "skipped"}, {"id", id}}.dump();
    content += '\n';
  }
  for (const std::string& id : report.unmatched_predictions) {
    content += json{{"kind", "unmatched_prediction"}, {"id", id}}.dump();
    content += '\n';
  }

  json agg;
  agg["kind"] = "aggregate";
  agg["tokens_evaluated"] = report.per_token.size();
  agg["tokens_skipped"] = report.skipped_tokens.size();
  agg["cte_token_count"] = report.cte_token_count;
  agg["mean_min_cte"] = num(report.mean_min_cte);
  agg["mean_min_ade"] = num(report.mean_min_ade);
  agg["mean_min_fde"] = num(report.mean_min_fde);
  agg["precision"] = num(report.cutin.precision);
  agg["precision_defined"] = report.cutin.precision_defined;
  agg["recall"] = num(report.cutin.recall);
  agg["recall_defined"] = report.cutin.recall_defined;
  agg["accuracy"] = num(report.cutin.accuracy);
  agg["tp"] = report.cutin.tp;
  agg["fp"] = report.cutin.fp;
  agg["fn"] = report.cutin.fn;
  agg["tn"] = report.cutin.tn;
  content += agg.dump();
  content += '\n';
  write_all(path, content);
}

std::string report_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[256];

  out << "cut-in evaluation  (t_u = " << report.config.t_u << " s, policy = "
      << (report.config.policy == CutinPolicy::top1 ? "top1" : "any") << ")\n";
  out << "minCTE mean is taken over tokens with a ground-truth cut-in only ("
      << report.cte_token_count << " of " << report.per_token.size() << " evaluated)\n";
  std::snprintf(line, sizeof line, "%-32s %8s %8s %8s %6s %6s\n", "token", "minCTE", "minADE",
                "minFDE", "pred", "actual");
  out << line;
  for (const TokenMetrics& tm : report.per_token) {
    char cte[16];
    if (tm.min_cte) {
      std::snprintf(cte, sizeof cte, "%8.3f", *tm.min_cte);
    } else {
      std::snprintf(cte, sizeof cte, "%8s", "-");
    }
    std::snprintf(line, sizeof line, "%-32s %s %8.3f %8.3f %6s %6s\n", tm.token_id.c_str(), cte,
                  tm.min_ade, tm.min_fde, tm.cutin_predicted ? "yes" : "no",
                  tm.cutin_actual ? "yes" : "no");
    out << line;
  }
  for (const std::string& id : report.skipped_tokens) {
    std::snprintf(line, sizeof line, "%-32s skipped (no prediction)\n", id.c_str());
    out << line;
  }
  std::snprintf(line, sizeof line,
                "mean   minCTE %.3f  minADE %.3f  minFDE %.3f   over %zu tokens (%zu skipped)\n",
                report.mean_min_cte, report.mean_min_ade, report.mean_min_fde,
                report.per_token.size(), report.skipped_tokens.size());
  out << line;
  std::snprintf(line, sizeof line,
                "cutin  precision %.3f%s  recall %.3f%s  accuracy %.3f   "
                "(tp %d fp %d fn %d tn %d)\n",
                report.cutin.precision, report.cutin.precision_defined ? "" : "*",
                report.cutin.recall, report.cutin.recall_defined ? "" : "*",
                report.cutin.accuracy, report.cutin.tp, report.cutin.fp, report.cutin.fn,
                report.cutin.tn);
  out << line;
  if (!report.cutin.precision_defined || !report.cutin.recall_defined) {
    out << "* undefined (no positives); reported as 1.0 by convention\n";
  }
  return out.str();
}

}  // namespace esp
