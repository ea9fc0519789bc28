#include "wbc/trace.hpp"

#include <fstream>

#include <json.hpp>

#include "wbc/errors.hpp"
#include "wbc/log.hpp"

namespace wbc {

namespace {

using nlohmann::json;

json state_to_json(const RobotState& s) {
  return json::array(
      {s.x, s.y, s.theta, s.vx, s.vy, s.omega, s.phi[0], s.phi[1], s.phi_dot[0], s.phi_dot[1]});
}

RobotState state_from_json(const json& j) {
  RobotState s;
  s.x = j.at(0);
  s.y = j.at(1);
  s.theta = j.at(2);
  s.vx = j.at(3);
  s.vy = j.at(4);
  s.omega = j.at(5);
  s.phi = {j.at(6), j.at(7)};
  s.phi_dot = {j.at(8), j.at(9)};
  return s;
}

json terms_to_json(const RewardTerms& t) {
  return {{"time", t.time},
          {"path_deviation", t.path_deviation},
          {"path_progress", t.path_progress},
          {"safety_margin", t.safety_margin},
          {"holding", t.holding},
          {"terminal", t.terminal},
          {"hold_revoked", t.hold_revoked}};
}

RewardTerms terms_from_json(const json& j) {
  RewardTerms t;
  t.time = j.at("time");
  t.path_deviation = j.at("path_deviation");
  t.path_progress = j.at("path_progress");
  t.safety_margin = j.at("safety_margin");
  t.holding = j.at("holding");
  t.terminal = j.at("terminal");
  t.hold_revoked = j.at("hold_revoked");
  return t;
}

Outcome outcome_from_name(const std::string& name) {
  if (name == "hold_success") return Outcome::kHoldSuccess;
  if (name == "collision") return Outcome::kCollision;
  if (name == "joint_limit") return Outcome::kJointLimit;
  if (name == "timeout") return Outcome::kTimeout;
  return Outcome::kNone;
}

}  // namespace

void write_trace_jsonl(const EpisodeTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("trace: cannot open '" + path + "' for writing");

  json header;
  header["type"] = "header";
  header["world"] = json::parse(trace.world_json);
  header["initial_state"] = state_to_json(trace.initial_state);
  json ref = json::array();
  for (const Vec2& p : trace.ref_path) ref.push_back(json::array({p.x, p.y}));
  header["ref_path"] = std::move(ref);
  header["goal"] = json::array({trace.goal.x, trace.goal.y});
  header["d_h"] = trace.d_h;
  out << header.dump() << "\n";

  for (const TraceStep& s : trace.steps) {
    json j;
    j["type"] = "step";
    j["state"] = state_to_json(s.state);
    j["action"] = json::array({s.action[0], s.action[1], s.action[2], s.action[3], s.action[4]});
    j["reward"] = s.reward;
    j["terms"] = terms_to_json(s.terms);
    j["scan_front"] = s.scan_front;
    j["scan_rear"] = s.scan_rear;
    out << j.dump() << "\n";
  }

  json result;
  result["type"] = "result";
  result["outcome"] = outcome_name(trace.result.outcome);
  result["steps"] = trace.result.steps;
  result["reward"] = trace.result.reward;
  result["base_distance"] = trace.result.base_distance;
  result["joint_distance"] = trace.result.joint_distance;
  out << result.dump() << "\n";
}

EpisodeTrace read_trace_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("trace: cannot open '" + path + "'");
  EpisodeTrace trace;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const std::string type = j.at("type");
      if (type == "header") {
        trace.world_json = j.at("world").dump();
        trace.initial_state = state_from_json(j.at("initial_state"));
        for (const json& p : j.at("ref_path")) trace.ref_path.push_back({p.at(0), p.at(1)});
        trace.goal = {j.at("goal").at(0), j.at("goal").at(1)};
        trace.d_h = j.at("d_h");
      } else if (type == "step") {
        TraceStep s;
        s.state = state_from_json(j.at("state"));
        for (int i = 0; i < 5; ++i) s.action[i] = j.at("action").at(i);
        s.reward = j.at("reward");
        s.terms = terms_from_json(j.at("terms"));
        s.scan_front = j.at("scan_front").get<std::vector<float>>();
        s.scan_rear = j.at("scan_rear").get<std::vector<float>>();
        trace.steps.push_back(std::move(s));
      } else if (type == "result") {
        trace.result.outcome = outcome_from_name(j.at("outcome"));
        trace.result.steps = j.at("steps");
        trace.result.reward = j.at("reward");
        trace.result.base_distance = j.at("base_distance");
        trace.result.joint_distance = j.at("joint_distance");
      }
    } catch (const json::exception& e) {
      WBC_LOG_WARN("trace: skipping corrupt line %d of %s (%s)", line_no, path.c_str(), e.what());
    }
  }
  return trace;
}

}  // namespace wbc
