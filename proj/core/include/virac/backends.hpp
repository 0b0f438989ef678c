#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "virac/decision.hpp"
#include "virac/errors.hpp"
#include "virac/perception.hpp"

namespace virac {

enum class BackendKind { Scripted, Remote };

struct BackendConfig {
  BackendKind kind = BackendKind::Scripted;
  std::string endpoint;               // e.g. http://host:port/v1/chat/completions
  std::string model = "virac-agent";
  double timeout_s = 10.0;
  int max_retries = 2;                // retries after the first attempt
  double backoff_base_s = 0.5;        // doubles per retry
  double temperature = 0.0;
  std::uint64_t seed = 0;
};

// Deterministic rule-based policy. Serves as both perception and decision
// backend; given identical inputs it always produces identical outputs, which
// makes it the reference agent for reproducibility tests and the fallback
// when a remote backend misbehaves.
class ScriptedPolicy : public PerceptionBackend, public DecisionBackend {
 public:
  std::vector<ObjectDescription> describe(const Observation& observation,
                                          const std::string& goal) override;
  std::vector<std::string> decompose_goal(const std::string& goal) override;
  Decision choose(const DecisionInput& input) override;

  // Blend weights for relevance scoring, exposed for tests.
  static constexpr double kHazardWeight = 0.35;
  static constexpr double kGoalWeight = 0.25;
  static constexpr double kSalienceWeight = 0.20;
  static constexpr double kMotionWeight = 0.10;
  static constexpr double kProximityWeight = 0.10;
  static constexpr double kMinSalience = 0.1;

  // Per-rule refractory periods, seconds.
  static constexpr double kSafetyCooldown = 1.5;
  static constexpr double kGoalCooldown = 2.0;
  static constexpr double kInterestCooldown = 2.5;
  static constexpr double kStaleSearchCooldown = 3.0;
  static constexpr double kHabitCooldown = 6.0;
  static constexpr double kSocialCooldown = 8.0;
  static constexpr double kStalenessWindow = 6.0;
  static constexpr double kFocusRepeatWindow = 5.0;
};

// Prompt with single-brace placeholders drawn from a fixed vocabulary:
// {goal} {observation} {memory} {history} {subgoals} {velocity}.
// Braces that do not match \{[a-z_]+\} pass through untouched, so JSON
// literals inside a template stay intact. Unknown placeholder names fail at
// construction; placeholders left unbound fail at render.
class PromptTemplate {
 public:
  explicit PromptTemplate(std::string text);
  std::string render(const std::map<std::string, std::string>& values) const;
  const std::vector<std::string>& placeholders() const { return placeholders_; }

 private:
  std::string text_;
  std::vector<std::string> placeholders_;
};

// Plain-text serializations of agent state for prompt assembly.
std::string observation_text(const Observation& observation,
                             const std::vector<ObjectDescription>& descriptions);
std::string memory_text(const MemoryState& memory, std::size_t limit = 16);
std::string history_text(const ActionHistory& history, std::size_t limit = 8);
std::string subgoals_text(const std::vector<SubGoal>& subgoals);
std::string velocity_text(const Vec3& walking_velocity);

// Strict parsers for remote model output. Unknown keys, missing fields, and
// out-of-range values raise ParseError; they never return a best guess.
Decision parse_action(const std::string& content);
std::vector<ObjectDescription> parse_descriptions(const std::string& content);

// Chat-completion client. Sends one system+user exchange and returns the
// first choice's message content. Transport failures, non-2xx statuses, and
// malformed response envelopes are retried with exponential backoff, then
// raise BackendError. The bearer token is read from VIRAC_API_KEY and is
// never written to logs or error text.
std::string remote_chat(const BackendConfig& config, const std::string& system_prompt,
                        const std::string& user_prompt);

// Remote perception/decision over the chat endpoint. Content that fails the
// strict parsers raises ParseError without retrying; callers are expected to
// fall back to a scripted step and count the event.
class RemoteBackend : public PerceptionBackend, public DecisionBackend {
 public:
  explicit RemoteBackend(BackendConfig config);

  std::vector<ObjectDescription> describe(const Observation& observation,
                                          const std::string& goal) override;
  std::vector<std::string> decompose_goal(const std::string& goal) override;
  Decision choose(const DecisionInput& input) override;

  const BackendConfig& config() const { return config_; }

 private:
  BackendConfig config_;
  PromptTemplate perception_system_;
  PromptTemplate perception_user_;
  PromptTemplate decision_system_;
  PromptTemplate decision_user_;
};

}  // namespace virac
