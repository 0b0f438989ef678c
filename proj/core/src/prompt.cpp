#include <algorithm>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include "virac/backends.hpp"

namespace virac {

namespace {

const std::set<std::string> kPlaceholderVocabulary = {"goal",    "observation", "memory",
                                                      "history", "subgoals",    "velocity"};

const std::regex kPlaceholderPattern(R"(\{[a-z_]+\})");

std::string format_double(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  auto begin = std::sregex_iterator(text_.begin(), text_.end(), kPlaceholderPattern);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const std::string token = it->str();
    const std::string name = token.substr(1, token.size() - 2);
    if (!kPlaceholderVocabulary.count(name)) {
      throw TemplateError("unknown placeholder {" + name + "} in prompt template");
    }
    if (std::find(placeholders_.begin(), placeholders_.end(), name) == placeholders_.end()) {
      placeholders_.push_back(name);
    }
  }
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  for (const auto& name : placeholders_) {
    if (!values.count(name)) {
      throw TemplateError("no value provided for placeholder {" + name + "}");
    }
  }
  std::string out;
  out.reserve(text_.size());
  std::size_t pos = 0;
  auto begin = std::sregex_iterator(text_.begin(), text_.end(), kPlaceholderPattern);
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const std::size_t start = static_cast<std::size_t>(it->position());
    out.append(text_, pos, start - pos);
    const std::string token = it->str();
    out += values.at(token.substr(1, token.size() - 2));
    pos = start + token.size();
  }
  out.append(text_, pos, text_.size() - pos);
  return out;
}

std::string observation_text(const Observation& observation,
                             const std::vector<ObjectDescription>& descriptions) {
  constexpr double kRadToDeg = 57.29577951308232;
  std::ostringstream out;
  out << "t=" << format_double(observation.t, 2) << "s, " << observation.visible.size()
      << " object(s) in view";
  for (const auto& v : observation.visible) {
    out << "\n- [" << v.object_id << "] " << v.label << ", azimuth "
        << format_double(v.bearing.azimuth * kRadToDeg, 1) << " deg, elevation "
        << format_double(v.bearing.elevation * kRadToDeg, 1) << " deg, "
        << format_double(v.distance, 1) << " m";
    if (v.is_moving) {
      out << ", moving";
    }
    if (v.occlusion > 0.0) {
      out << ", " << format_double(v.occlusion * 100.0, 0) << "% occluded";
    }
    for (const auto& d : descriptions) {
      if (d.object_id == v.object_id) {
        out << "\n  described: " << d.description << " (relevance "
            << format_double(d.relevance, 2) << ")";
        break;
      }
    }
  }
  return out.str();
}

std::string memory_text(const MemoryState& memory, std::size_t limit) {
  const auto entries = memory.recall();
  if (entries.empty()) {
    return "nothing remembered yet";
  }
  std::ostringstream out;
  out << entries.size() << " object(s) remembered";
  std::size_t shown = 0;
  for (const MemoryEntry* e : entries) {
    if (shown++ >= limit) {
      out << "\n- ...";
      break;
    }
    out << "\n- [" << e->object_id << "] " << e->label << ", last seen t="
        << format_double(e->last_seen, 2) << "s, seen " << e->times_seen << "x";
  }
  return out.str();
}

std::string history_text(const ActionHistory& history, std::size_t limit) {
  const auto& records = history.records();
  if (records.empty()) {
    return "no actions taken yet";
  }
  std::ostringstream out;
  out << records.size() << " action(s) so far";
  const std::size_t start = records.size() > limit ? records.size() - limit : 0;
  for (std::size_t i = start; i < records.size(); ++i) {
    const ActionRecord& r = records[i];
    out << "\n- t=" << format_double(r.t, 2) << "s " << describe(r.action) << " ("
        << to_string(r.rationale_category) << ")";
  }
  return out.str();
}

std::string subgoals_text(const std::vector<SubGoal>& subgoals) {
  if (subgoals.empty()) {
    return "no sub-goals";
  }
  std::ostringstream out;
  bool first = true;
  for (const auto& sg : subgoals) {
    if (!first) {
      out << "\n";
    }
    first = false;
    out << (sg.active ? "> " : "  ") << sg.text;
  }
  return out.str();
}

std::string velocity_text(const Vec3& walking_velocity) {
  const double speed = norm(walking_velocity);
  if (speed < 1e-6) {
    return "standing still";
  }
  return "walking at " + format_double(speed, 2) + " m/s";
}

}  // namespace virac
