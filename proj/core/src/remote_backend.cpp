#include <chrono>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "virac/backends.hpp"

namespace virac {

using nlohmann::json;

namespace {

struct SplitUrl {
  std::string base;  // scheme://host:port
  std::string path;
};

SplitUrl split_url(const std::string& endpoint) {
  const auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw BackendError("endpoint URL has no scheme: " + endpoint);
  }
  const std::string scheme = endpoint.substr(0, scheme_end);
  if (scheme == "https") {
    throw BackendError("https endpoints are not supported by this build; use http");
  }
  if (scheme != "http") {
    throw BackendError("unsupported endpoint scheme: " + scheme);
  }
  const auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {endpoint, "/"};
  }
  return {endpoint.substr(0, path_start), endpoint.substr(path_start)};
}

// Envelope extraction: chat-completion shape, first choice's message content.
std::string extract_content(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception&) {
    throw BackendError("response body is not valid JSON");
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array() ||
      j["choices"].empty()) {
    throw BackendError("response has no choices");
  }
  const json& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object() ||
      !choice["message"].contains("content") || !choice["message"]["content"].is_string()) {
    throw BackendError("response choice has no message content");
  }
  return choice["message"]["content"].get<std::string>();
}

json parse_content_json(const std::string& content, const char* what) {
  try {
    return json::parse(content);
  } catch (const json::exception&) {
    throw ParseError(std::string(what) + ": content is not valid JSON");
  }
}

void require_keys(const json& obj, const std::set<std::string>& allowed,
                  const std::set<std::string>& required, const char* what) {
  if (!obj.is_object()) {
    throw ParseError(std::string(what) + ": expected a JSON object");
  }
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) {
      throw ParseError(std::string(what) + ": unknown key \"" + item.key() + "\"");
    }
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) {
      throw ParseError(std::string(what) + ": missing key \"" + key + "\"");
    }
  }
}

const char* kPerceptionSystem =
    "You are the visual attention module of a virtual agent walking through a scene. "
    "Score how relevant each visible object is to the agent's goal and safety. "
    "Respond with JSON only, shaped as "
    "{\"descriptions\": [ ... ]} where each item is an object with keys "
    "\"object_id\" (string taken verbatim from the view list), "
    "\"description\" (one short sentence), "
    "\"relevance\" (number between 0 and 1) and "
    "\"rationale_tags\" (array of short strings). "
    "Never invent ids that are not in view.";

const char* kPerceptionUser =
    "Goal: {goal}\n"
    "Movement: {velocity}\n"
    "In view:\n{observation}\n"
    "Describe the objects worth attending to.";

const char* kDecisionSystem =
    "You control the head of a virtual agent. Pick exactly one next head action. "
    "Respond with JSON only: an object with keys \"action\", \"rationale_category\" and "
    "\"rationale\". \"action\" is {\"type\": \"look_at\", \"object_id\": \"...\"} "
    "or {\"type\": \"search\", \"direction\": \"...\"} with direction one of "
    "left, right, up, down, behind, ahead. \"rationale_category\" is one of "
    "Interest, InformationSeeking, Safety, Habit, SocialSchema. "
    "\"rationale\" is one short sentence.";

const char* kDecisionUser =
    "Goal: {goal}\n"
    "Sub-goals:\n{subgoals}\n"
    "Movement: {velocity}\n"
    "In view:\n{observation}\n"
    "Remembered:\n{memory}\n"
    "Recent actions:\n{history}\n"
    "Choose the next head action.";

const char* kDecomposeSystem =
    "You plan for a virtual agent. Break the goal into 2 to 5 short ordered sub-goals. "
    "Respond with JSON only, shaped as {\"subgoals\": [\"...\", \"...\"]}.";

std::vector<std::string> parse_subgoals(const std::string& content) {
  const json j = parse_content_json(content, "subgoal list");
  require_keys(j, {"subgoals"}, {"subgoals"}, "subgoal list");
  if (!j["subgoals"].is_array() || j["subgoals"].empty()) {
    throw ParseError("subgoal list: \"subgoals\" must be a non-empty array");
  }
  std::vector<std::string> out;
  for (const auto& s : j["subgoals"]) {
    if (!s.is_string() || s.get<std::string>().empty()) {
      throw ParseError("subgoal list: entries must be non-empty strings");
    }
    out.push_back(s.get<std::string>());
  }
  return out;
}

}  // namespace

Decision parse_action(const std::string& content) {
  const json j = parse_content_json(content, "action");
  require_keys(j, {"action", "rationale_category", "rationale"},
               {"action", "rationale_category", "rationale"}, "action");
  const json& a = j["action"];
  Decision d;
  if (!a.is_object() || !a.contains("type") || !a["type"].is_string()) {
    throw ParseError("action: missing or non-string \"type\"");
  }
  const std::string type = a["type"].get<std::string>();
  if (type == "look_at") {
    require_keys(a, {"type", "object_id"}, {"type", "object_id"}, "action");
    if (!a["object_id"].is_string() || a["object_id"].get<std::string>().empty()) {
      throw ParseError("action: \"object_id\" must be a non-empty string");
    }
    d.action = Action::look_at(a["object_id"].get<std::string>());
  } else if (type == "search") {
    require_keys(a, {"type", "direction"}, {"type", "direction"}, "action");
    if (!a["direction"].is_string()) {
      throw ParseError("action: \"direction\" must be a string");
    }
    d.action = Action::search(search_direction_from_string(a["direction"].get<std::string>()));
  } else {
    throw ParseError("action: unknown type \"" + type + "\"");
  }
  if (!j["rationale_category"].is_string()) {
    throw ParseError("action: \"rationale_category\" must be a string");
  }
  d.rationale_category =
      rationale_category_from_string(j["rationale_category"].get<std::string>());
  if (!j["rationale"].is_string()) {
    throw ParseError("action: \"rationale\" must be a string");
  }
  d.rationale = j["rationale"].get<std::string>();
  return d;
}

std::vector<ObjectDescription> parse_descriptions(const std::string& content) {
  const json j = parse_content_json(content, "description list");
  require_keys(j, {"descriptions"}, {"descriptions"}, "description list");
  if (!j["descriptions"].is_array()) {
    throw ParseError("description list: \"descriptions\" must be an array");
  }
  std::vector<ObjectDescription> out;
  for (const auto& item : j["descriptions"]) {
    require_keys(item, {"object_id", "description", "relevance", "rationale_tags"},
                 {"object_id", "description", "relevance", "rationale_tags"},
                 "description");
    ObjectDescription d;
    if (!item["object_id"].is_string()) {
      throw ParseError("description: \"object_id\" must be a string");
    }
    d.object_id = item["object_id"].get<std::string>();
    if (!item["description"].is_string()) {
      throw ParseError("description: \"description\" must be a string");
    }
    d.description = item["description"].get<std::string>();
    if (!item["relevance"].is_number()) {
      throw ParseError("description: \"relevance\" must be a number");
    }
    d.relevance = item["relevance"].get<double>();
    if (!std::isfinite(d.relevance) || d.relevance < 0.0 || d.relevance > 1.0) {
      throw ParseError("description: \"relevance\" must be in [0,1]");
    }
    if (!item["rationale_tags"].is_array()) {
      throw ParseError("description: \"rationale_tags\" must be an array");
    }
    for (const auto& tag : item["rationale_tags"]) {
      if (!tag.is_string()) {
        throw ParseError("description: rationale tags must be strings");
      }
      d.rationale_tags.push_back(tag.get<std::string>());
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string remote_chat(const BackendConfig& config, const std::string& system_prompt,
                        const std::string& user_prompt) {
  if (config.endpoint.empty()) {
    throw BackendError("no endpoint configured for the remote backend");
  }
  const SplitUrl url = split_url(config.endpoint);

  json request;
  request["model"] = config.model;
  request["messages"] = json::array({
      json{{"role", "system"}, {"content", system_prompt}},
      json{{"role", "user"}, {"content", user_prompt}},
  });
  request["temperature"] = config.temperature;
  request["response_format"] = json{{"type", "json_object"}};
  const std::string body = request.dump();

  httplib::Headers headers;
  if (const char* key = std::getenv("VIRAC_API_KEY")) {
    // The token goes on the wire and nowhere else.
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  std::string last_error;
  const int attempts = config.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      const double delay = config.backoff_base_s * std::pow(2.0, attempt - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Client client(url.base);
    client.set_connection_timeout(std::chrono::duration<double>(config.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(config.timeout_s));
    client.set_write_timeout(std::chrono::duration<double>(config.timeout_s));

    auto res = client.Post(url.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "endpoint returned status " + std::to_string(res->status);
      continue;
    }
    try {
      return extract_content(res->body);
    } catch (const BackendError& ex) {
      last_error = ex.what();
      continue;
    }
  }
  throw BackendError("remote call failed after " + std::to_string(attempts) +
                     " attempt(s): " + last_error);
}

RemoteBackend::RemoteBackend(BackendConfig config)
    : config_(std::move(config)),
      perception_system_(kPerceptionSystem),
      perception_user_(kPerceptionUser),
      decision_system_(kDecisionSystem),
      decision_user_(kDecisionUser) {}

std::vector<ObjectDescription> RemoteBackend::describe(const Observation& observation,
                                                       const std::string& goal) {
  std::map<std::string, std::string> values;
  values["goal"] = goal;
  values["velocity"] = velocity_text(observation.walking_velocity);
  values["observation"] = observation_text(observation, {});
  const std::string content = remote_chat(config_, perception_system_.render({}),
                                          perception_user_.render(values));
  return parse_descriptions(content);
}

std::vector<std::string> RemoteBackend::decompose_goal(const std::string& goal) {
  const std::string content = remote_chat(config_, kDecomposeSystem, "Goal: " + goal);
  return parse_subgoals(content);
}

Decision RemoteBackend::choose(const DecisionInput& input) {
  if (input.observation == nullptr || input.history == nullptr || input.memory == nullptr) {
    throw InvalidInputError("remote decision requires observation, history and memory");
  }
  std::map<std::string, std::string> values;
  values["goal"] = input.goal;
  values["subgoals"] = subgoals_text(input.subgoals);
  values["velocity"] = velocity_text(input.walking_velocity);
  values["observation"] = observation_text(*input.observation, input.descriptions);
  values["memory"] = memory_text(*input.memory);
  values["history"] = history_text(*input.history);
  const std::string content =
      remote_chat(config_, decision_system_.render({}), decision_user_.render(values));
  return parse_action(content);
}

}  // namespace virac
