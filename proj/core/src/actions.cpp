#include "virac/actions.hpp"

namespace virac {

const char* to_string(SearchDirection d) {
  switch (d) {
    case SearchDirection::Left: return "left";
    case SearchDirection::Right: return "right";
    case SearchDirection::Up: return "up";
    case SearchDirection::Down: return "down";
    case SearchDirection::Behind: return "behind";
    case SearchDirection::Ahead: return "ahead";
  }
  return "ahead";
}

SearchDirection search_direction_from_string(const std::string& s) {
  if (s == "left") return SearchDirection::Left;
  if (s == "right") return SearchDirection::Right;
  if (s == "up") return SearchDirection::Up;
  if (s == "down") return SearchDirection::Down;
  if (s == "behind") return SearchDirection::Behind;
  if (s == "ahead") return SearchDirection::Ahead;
  throw ParseError("unknown search direction: \"" + s + "\"");
}

bool operator==(const Action& a, const Action& b) {
  if (a.is_look_at() != b.is_look_at()) return false;
  if (a.is_look_at()) return a.as_look_at().object_id == b.as_look_at().object_id;
  return a.as_search().direction == b.as_search().direction;
}

std::string describe(const Action& a) {
  if (a.is_look_at()) return "look_at " + a.as_look_at().object_id;
  return std::string("search ") + to_string(a.as_search().direction);
}

const char* to_string(RationaleCategory r) {
  switch (r) {
    case RationaleCategory::Interest: return "Interest";
    case RationaleCategory::InformationSeeking: return "InformationSeeking";
    case RationaleCategory::Safety: return "Safety";
    case RationaleCategory::Habit: return "Habit";
    case RationaleCategory::SocialSchema: return "SocialSchema";
  }
  return "Interest";
}

RationaleCategory rationale_category_from_string(const std::string& s) {
  if (s == "Interest") return RationaleCategory::Interest;
  if (s == "InformationSeeking") return RationaleCategory::InformationSeeking;
  if (s == "Safety") return RationaleCategory::Safety;
  if (s == "Habit") return RationaleCategory::Habit;
  if (s == "SocialSchema") return RationaleCategory::SocialSchema;
  throw ParseError("unknown rationale category: \"" + s + "\"");
}

const char* to_string(MovementClass m) {
  return m == MovementClass::Confirmation ? "confirmation" : "exploration";
}

MovementClass movement_class_from_string(const std::string& s) {
  if (s == "confirmation") return MovementClass::Confirmation;
  if (s == "exploration") return MovementClass::Exploration;
  throw ParseError("unknown movement class: \"" + s + "\"");
}

}  // namespace virac
