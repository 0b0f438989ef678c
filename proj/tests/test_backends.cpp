#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include "virac/backends.hpp"

using namespace virac;
using nlohmann::json;

namespace {

constexpr double kPi = 3.14159265358979323846;

VisibleObject vis(const std::string& id, const std::string& label, double distance,
                  double salience, std::set<ObjectTag> tags = {}, bool moving = false,
                  double azimuth = 0.0) {
  VisibleObject v;
  v.object_id = id;
  v.label = label;
  v.distance = distance;
  v.salience = salience;
  v.tags = std::move(tags);
  v.is_moving = moving;
  v.bearing.azimuth = azimuth;
  v.position = {0, distance, 0};
  return v;
}

Observation observation_with(std::vector<VisibleObject> visible, double t = 0.0) {
  Observation obs;
  obs.t = t;
  obs.visible = std::move(visible);
  return obs;
}

ObjectDescription desc(const std::string& id, double relevance,
                       std::vector<std::string> tags = {}, double distance = 5.0) {
  ObjectDescription d;
  d.object_id = id;
  d.description = "d";
  d.relevance = relevance;
  d.rationale_tags = std::move(tags);
  d.distance = distance;
  d.label = id;
  return d;
}

ActionRecord record(double t, Action action, RationaleCategory category) {
  ActionRecord r;
  r.t = t;
  r.action = std::move(action);
  r.rationale_category = category;
  return r;
}

struct PolicyHarness {
  ScriptedPolicy policy;
  Observation obs = observation_with({});
  ActionHistory history;
  MemoryState memory;
  std::vector<ObjectDescription> descriptions;
  double t = 10.0;

  Decision choose() {
    DecisionInput input;
    input.t = t;
    input.observation = &obs;
    input.descriptions = descriptions;
    input.goal = "g";
    input.history = &history;
    input.memory = &memory;
    return policy.choose(input);
  }
};

// Minimal chat-completion stub. The handler decides status and content per
// request; every received body is kept for inspection.
class StubServer {
 public:
  using Handler = std::function<void(int index, int& status, std::string& content)>;

  explicit StubServer(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      const int index = count_.fetch_add(1);
      {
        std::lock_guard<std::mutex> lock(mutex_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
      }
      int status = 200;
      std::string content = "{}";
      handler_(index, status, content);
      res.status = status;
      if (status == 200) {
        json envelope;
        envelope["choices"] = json::array(
            {json{{"message", json{{"role", "assistant"}, {"content", content}}}}});
        res.set_content(envelope.dump(), "application/json");
      } else {
        res.set_content("{\"error\": \"stub failure\"}", "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions";
  }
  int request_count() const { return count_.load(); }
  std::string body(int i) {
    std::lock_guard<std::mutex> lock(mutex_);
    return bodies_.at(static_cast<std::size_t>(i));
  }
  std::string auth(int i) {
    std::lock_guard<std::mutex> lock(mutex_);
    return auth_.at(static_cast<std::size_t>(i));
  }

 private:
  httplib::Server server_;
  Handler handler_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> count_{0};
  std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

BackendConfig fast_config(const std::string& endpoint) {
  BackendConfig config;
  config.kind = BackendKind::Remote;
  config.endpoint = endpoint;
  config.max_retries = 2;
  config.backoff_base_s = 0.01;
  config.timeout_s = 5.0;
  return config;
}

}  // namespace

TEST_CASE("scripted descriptions blend the documented relevance weights") {
  ScriptedPolicy policy;
  const Observation obs = observation_with({
      vis("van", "delivery van", 10.0, 0.8, {ObjectTag::Hazard, ObjectTag::Dynamic}, true, 0.3),
      vis("door", "exit door", 5.0, 0.5, {ObjectTag::GoalRelevant}),
      vis("dust", "dust mote", 2.0, 0.05),
  });
  const auto out = policy.describe(obs, "leave the building");
  REQUIRE(out.size() == 2);  // the barely salient object is skipped

  CHECK(out[0].object_id == "van");
  // 0.35 hazard + 0.20*0.8 salience + 0.10 motion + 0.10/(1 + 10/10) proximity.
  CHECK(out[0].relevance == doctest::Approx(0.35 + 0.16 + 0.10 + 0.05).epsilon(1e-12));
  CHECK(out[0].description == "delivery van at 17°, 10.0 m, moving, hazard");
  CHECK(out[0].rationale_tags == std::vector<std::string>{"hazard", "moving"});

  CHECK(out[1].object_id == "door");
  // 0.25 goal + 0.10 salience + 0.10/(1 + 5/10) proximity.
  CHECK(out[1].relevance == doctest::Approx(0.25 + 0.10 + 0.10 / 1.5).epsilon(1e-12));
  CHECK(out[1].rationale_tags == std::vector<std::string>{"goal"});
}

TEST_CASE("scripted goal decomposition is fixed and goal-driven") {
  ScriptedPolicy policy;
  const auto subgoals = policy.decompose_goal("cross safely to the other side");
  REQUIRE(subgoals.size() == 4);
  CHECK(subgoals[0] == "scan the surroundings to get oriented");
  CHECK(subgoals[1] == "locate objects relevant to: cross safely to the other side");
  CHECK(subgoals[2] == "watch for hazards along the way");
  CHECK(subgoals[3] == "complete: cross safely to the other side");
}

TEST_CASE("an unchecked hazard wins the decision") {
  PolicyHarness h;
  h.descriptions = {desc("hazard-1", 0.6, {"hazard"}), desc("goal-1", 0.9, {"goal"})};
  const Decision d = h.choose();
  CHECK(d.action == Action::look_at("hazard-1"));
  CHECK(d.rationale_category == RationaleCategory::Safety);
}

TEST_CASE("hazard ties break by relevance, distance, then id") {
  PolicyHarness h;
  h.descriptions = {desc("b", 0.6, {"hazard"}, 5.0), desc("a", 0.6, {"hazard"}, 5.0),
                    desc("c", 0.6, {"hazard"}, 2.0), desc("d", 0.9, {"hazard"}, 9.0)};
  CHECK(h.choose().action == Action::look_at("d"));  // highest relevance
  h.descriptions = {desc("b", 0.6, {"hazard"}, 5.0), desc("a", 0.6, {"hazard"}, 5.0),
                    desc("c", 0.6, {"hazard"}, 2.0)};
  CHECK(h.choose().action == Action::look_at("c"));  // nearest
  h.descriptions = {desc("b", 0.6, {"hazard"}, 5.0), desc("a", 0.6, {"hazard"}, 5.0)};
  CHECK(h.choose().action == Action::look_at("a"));  // id order
}

TEST_CASE("safety cooldown hands over to the goal rule") {
  PolicyHarness h;
  h.history.append(record(9.0, Action::look_at("old"), RationaleCategory::Safety));
  h.descriptions = {desc("hazard-1", 0.6, {"hazard"}), desc("goal-1", 0.5, {"goal"})};
  const Decision d = h.choose();  // t=10: 1.0s since safety < 1.5s cooldown
  CHECK(d.action == Action::look_at("goal-1"));
  CHECK(d.rationale_category == RationaleCategory::InformationSeeking);
}

TEST_CASE("a recently focused object is not re-chosen") {
  PolicyHarness h;
  h.history.append(record(6.0, Action::look_at("hazard-1"), RationaleCategory::Safety));
  h.descriptions = {desc("hazard-1", 0.6, {"hazard"}), desc("goal-1", 0.5, {"goal"})};
  const Decision d = h.choose();  // hazard refocus blocked for 5s, safety cooldown passed
  CHECK(d.action == Action::look_at("goal-1"));

  PolicyHarness h2;
  h2.history.append(record(4.0, Action::look_at("hazard-1"), RationaleCategory::Safety));
  h2.descriptions = {desc("hazard-1", 0.6, {"hazard"})};
  const Decision d2 = h2.choose();  // t=10: 6s since focus >= 5s window, eligible again
  CHECK(d2.action == Action::look_at("hazard-1"));
  CHECK(d2.rationale_category == RationaleCategory::Safety);
}

TEST_CASE("moving or novel objects draw interest") {
  PolicyHarness h;
  h.memory.update({desc("known", 0.5)}, 1.0);
  h.descriptions = {desc("known", 0.5), desc("known", 0.5)};
  h.descriptions = {desc("known", 0.5, {"moving"})};
  const Decision moving = h.choose();
  CHECK(moving.action == Action::look_at("known"));
  CHECK(moving.rationale_category == RationaleCategory::Interest);
  CHECK(moving.rationale.find("moving") != std::string::npos);

  PolicyHarness h2;
  h2.memory.update({desc("known", 0.5)}, 1.0);
  h2.descriptions = {desc("fresh", 0.4), desc("known", 0.9)};
  const Decision novel = h2.choose();  // the known static object raises no rule
  CHECK(novel.action == Action::look_at("fresh"));
  CHECK(novel.rationale_category == RationaleCategory::Interest);
  CHECK(novel.rationale.find("not seen before") != std::string::npos);
}

TEST_CASE("stale sectors get scanned after the staleness window") {
  PolicyHarness h;
  h.history.append(record(5.0, Action::search(SearchDirection::Ahead), RationaleCategory::Habit));
  const Decision d = h.choose();  // t=10, no sector ever searched
  CHECK(d.action == Action::search(SearchDirection::Behind));
  CHECK(d.rationale_category == RationaleCategory::InformationSeeking);

  // With behind fresh, the tie order moves to left.
  PolicyHarness h2;
  h2.history.append(record(5.0, Action::search(SearchDirection::Ahead), RationaleCategory::Habit));
  h2.history.append(
      record(9.0, Action::search(SearchDirection::Behind), RationaleCategory::InformationSeeking));
  h2.t = 16.0;
  const Decision d2 = h2.choose();
  CHECK(d2.action == Action::search(SearchDirection::Left));
}

TEST_CASE("the habitual forward glance fires when nothing else does") {
  PolicyHarness h;
  h.t = 1.0;  // sectors are not stale yet
  const Decision d = h.choose();
  CHECK(d.action == Action::search(SearchDirection::Ahead));
  CHECK(d.rationale_category == RationaleCategory::Habit);
}

TEST_CASE("social acknowledgement and the final sweep fallback") {
  PolicyHarness h;
  h.memory.update({desc("greeter", 0.5)}, 1.0);
  h.descriptions = {desc("greeter", 0.5, {"social"})};
  h.history.append(
      record(5.0, Action::search(SearchDirection::Behind), RationaleCategory::InformationSeeking));
  h.history.append(
      record(5.5, Action::search(SearchDirection::Left), RationaleCategory::InformationSeeking));
  h.history.append(
      record(6.0, Action::search(SearchDirection::Right), RationaleCategory::InformationSeeking));
  h.history.append(
      record(6.5, Action::search(SearchDirection::Up), RationaleCategory::InformationSeeking));
  h.history.append(
      record(7.0, Action::search(SearchDirection::Down), RationaleCategory::InformationSeeking));
  h.history.append(record(9.5, Action::search(SearchDirection::Ahead), RationaleCategory::Habit));
  const Decision d = h.choose();  // t=10: stalest sector only 5s old, habit hot
  CHECK(d.action == Action::look_at("greeter"));
  CHECK(d.rationale_category == RationaleCategory::SocialSchema);

  // Once the social glance is also hot, the sweep fallback takes over.
  h.history.append(record(9.6, Action::look_at("greeter"), RationaleCategory::SocialSchema));
  const Decision d2 = h.choose();
  CHECK(d2.action == Action::search(SearchDirection::Behind));
  CHECK(d2.rationale_category == RationaleCategory::InformationSeeking);
  CHECK(d2.rationale.find("sweeping") != std::string::npos);
}

TEST_CASE("prompt templates substitute the fixed vocabulary") {
  PromptTemplate t("Goal: {goal}\nState: {memory} and {goal}");
  CHECK(t.placeholders() == std::vector<std::string>{"goal", "memory"});
  const std::string out = t.render({{"goal", "cross"}, {"memory", "empty"}});
  CHECK(out == "Goal: cross\nState: empty and cross");
}

TEST_CASE("prompt templates reject unknown placeholders at load") {
  CHECK_THROWS_AS(PromptTemplate("{goal} and {weather}"), TemplateError);
}

TEST_CASE("prompt templates require every placeholder at render") {
  PromptTemplate t("{goal} {velocity}");
  CHECK_THROWS_AS(t.render({{"goal", "g"}}), TemplateError);
}

TEST_CASE("JSON braces pass through prompt templates untouched") {
  PromptTemplate t(R"(Respond {"action": {"type": "look_at"}} for {goal})");
  const std::string out = t.render({{"goal", "g"}});
  CHECK(out == R"(Respond {"action": {"type": "look_at"}} for g)");
}

TEST_CASE("parse_action accepts both action shapes") {
  const Decision look = parse_action(
      R"({"action": {"type": "look_at", "object_id": "car-1"},
          "rationale_category": "Safety", "rationale": "hazard ahead"})");
  CHECK(look.action == Action::look_at("car-1"));
  CHECK(look.rationale_category == RationaleCategory::Safety);
  CHECK(look.rationale == "hazard ahead");

  const Decision search = parse_action(
      R"({"action": {"type": "search", "direction": "behind"},
          "rationale_category": "InformationSeeking", "rationale": "r"})");
  CHECK(search.action == Action::search(SearchDirection::Behind));
}

TEST_CASE("parse_action rejects malformed content") {
  CHECK_THROWS_AS(parse_action("not json"), ParseError);
  CHECK_THROWS_AS(parse_action("[1,2]"), ParseError);
  // Unknown top-level key.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "search", "direction": "left"},
              "rationale_category": "Habit", "rationale": "r", "confidence": 0.8})"),
                  ParseError);
  // Unknown key inside the action.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "search", "direction": "left", "speed": 2},
              "rationale_category": "Habit", "rationale": "r"})"),
                  ParseError);
  // Mixed fields.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "look_at", "direction": "left"},
              "rationale_category": "Habit", "rationale": "r"})"),
                  ParseError);
  // Bad direction.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "search", "direction": "sideways"},
              "rationale_category": "Habit", "rationale": "r"})"),
                  ParseError);
  // Bad category.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "search", "direction": "left"},
              "rationale_category": "Curiosity", "rationale": "r"})"),
                  ParseError);
  // Missing rationale.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "search", "direction": "left"},
              "rationale_category": "Habit"})"),
                  ParseError);
  // Empty object id.
  CHECK_THROWS_AS(parse_action(
                      R"({"action": {"type": "look_at", "object_id": ""},
              "rationale_category": "Habit", "rationale": "r"})"),
                  ParseError);
}

TEST_CASE("parse_descriptions is strict about shape and ranges") {
  const auto out = parse_descriptions(
      R"({"descriptions": [{"object_id": "a", "description": "a thing",
                            "relevance": 0.5, "rationale_tags": ["goal"]}]})");
  REQUIRE(out.size() == 1);
  CHECK(out[0].object_id == "a");
  CHECK(out[0].relevance == 0.5);
  CHECK(out[0].rationale_tags == std::vector<std::string>{"goal"});

  CHECK_THROWS_AS(parse_descriptions("{}"), ParseError);
  CHECK_THROWS_AS(parse_descriptions(R"({"descriptions": "none"})"), ParseError);
  CHECK_THROWS_AS(parse_descriptions(
                      R"({"descriptions": [{"object_id": "a", "description": "x",
              "relevance": 1.5, "rationale_tags": []}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_descriptions(
                      R"({"descriptions": [{"object_id": "a", "description": "x",
              "relevance": 0.5, "rationale_tags": [], "color": "red"}]})"),
                  ParseError);
  CHECK_THROWS_AS(parse_descriptions(
                      R"({"descriptions": [{"object_id": "a",
              "relevance": 0.5, "rationale_tags": []}]})"),
                  ParseError);
}

TEST_CASE("remote_chat sends the chat-completion wire format") {
  StubServer stub([](int, int& status, std::string& content) {
    status = 200;
    content = R"({"ok": true})";
  });
  setenv("VIRAC_API_KEY", "sk-unit-test", 1);
  BackendConfig config = fast_config(stub.endpoint());
  config.model = "test-model";
  config.temperature = 0.25;
  const std::string content = remote_chat(config, "sys prompt", "user prompt");
  unsetenv("VIRAC_API_KEY");

  CHECK(content == R"({"ok": true})");
  REQUIRE(stub.request_count() == 1);
  const json body = json::parse(stub.body(0));
  CHECK(body["model"] == "test-model");
  CHECK(body["temperature"] == 0.25);
  CHECK(body["response_format"]["type"] == "json_object");
  REQUIRE(body["messages"].size() == 2);
  CHECK(body["messages"][0]["role"] == "system");
  CHECK(body["messages"][0]["content"] == "sys prompt");
  CHECK(body["messages"][1]["role"] == "user");
  CHECK(body["messages"][1]["content"] == "user prompt");
  CHECK(stub.auth(0) == "Bearer sk-unit-test");
}

TEST_CASE("remote_chat retries server errors until one succeeds") {
  StubServer stub([](int index, int& status, std::string& content) {
    status = index < 2 ? 500 : 200;
    content = R"({"fine": 1})";
  });
  const std::string content = remote_chat(fast_config(stub.endpoint()), "s", "u");
  CHECK(content == R"({"fine": 1})");
  CHECK(stub.request_count() == 3);
}

TEST_CASE("remote_chat retries malformed envelopes and then gives up") {
  int hits = 0;
  StubServer stub([&hits](int, int& status, std::string&) {
    ++hits;
    status = 503;
  });
  CHECK_THROWS_AS(remote_chat(fast_config(stub.endpoint()), "s", "u"), BackendError);
  CHECK(hits == 3);  // initial attempt + 2 retries
}

TEST_CASE("remote_chat fails over transport errors to a dead port") {
  BackendConfig config = fast_config("http://127.0.0.1:1/v1/chat/completions");
  config.max_retries = 1;
  config.timeout_s = 0.5;
  CHECK_THROWS_AS(remote_chat(config, "s", "u"), BackendError);
}

TEST_CASE("remote content schema violations raise without retrying") {
  StubServer stub([](int, int& status, std::string& content) {
    status = 200;
    content = R"({"action": {"type": "teleport"}, "rationale_category": "Safety",
                  "rationale": "r"})";
  });
  RemoteBackend backend(fast_config(stub.endpoint()));
  DecisionInput input;
  Observation obs;
  ActionHistory history;
  MemoryState memory;
  input.observation = &obs;
  input.history = &history;
  input.memory = &memory;
  CHECK_THROWS_AS(backend.choose(input), ParseError);
  CHECK(stub.request_count() == 1);  // bad content is the model's answer; do not retry
}

TEST_CASE("the remote backend round-trips a full decision") {
  StubServer stub([](int, int& status, std::string& content) {
    status = 200;
    content = R"({"action": {"type": "look_at", "object_id": "bench-2"},
                  "rationale_category": "Interest", "rationale": "new bench"})";
  });
  RemoteBackend backend(fast_config(stub.endpoint()));
  Observation obs = observation_with({vis("bench-2", "park bench", 4.0, 0.7)});
  ActionHistory history;
  MemoryState memory;
  DecisionInput input;
  input.t = 2.0;
  input.observation = &obs;
  input.goal = "walk the park";
  input.history = &history;
  input.memory = &memory;
  const Decision d = backend.choose(input);
  CHECK(d.action == Action::look_at("bench-2"));
  CHECK(d.rationale_category == RationaleCategory::Interest);

  // The prompt must surface the object id for the model to reference.
  const json body = json::parse(stub.body(0));
  const std::string user = body["messages"][1]["content"].get<std::string>();
  CHECK(user.find("bench-2") != std::string::npos);
  CHECK(user.find("walk the park") != std::string::npos);
}

TEST_CASE("the remote backend parses perception output") {
  StubServer stub([](int, int& status, std::string& content) {
    status = 200;
    content = R"({"descriptions": [{"object_id": "bench-2", "description": "a bench",
                  "relevance": 0.6, "rationale_tags": ["goal"]}]})";
  });
  RemoteBackend backend(fast_config(stub.endpoint()));
  const Observation obs = observation_with({vis("bench-2", "park bench", 4.0, 0.7)});
  const auto out = backend.describe(obs, "sit down");
  REQUIRE(out.size() == 1);
  CHECK(out[0].object_id == "bench-2");
}

TEST_CASE("https endpoints are refused with an explanation") {
  BackendConfig config = fast_config("https://example.test/v1/chat/completions");
  CHECK_THROWS_WITH_AS(remote_chat(config, "s", "u"), doctest::Contains("https"),
                       BackendError);
}
