#pragma once

// The two-action grammar and its annotation enums. Kept header-only so the
// environment can consume actions without depending on the decision logic.

#include <string>
#include <variant>

#include "virac/errors.hpp"

namespace virac {

enum class SearchDirection { Left, Right, Up, Down, Behind, Ahead };

const char* to_string(SearchDirection d);
SearchDirection search_direction_from_string(const std::string& s);

struct LookAt {
  std::string object_id;
};

struct Search {
  SearchDirection direction = SearchDirection::Ahead;
};

struct Action {
  std::variant<LookAt, Search> variant;

  static Action look_at(std::string object_id) {
    return Action{LookAt{std::move(object_id)}};
  }
  static Action search(SearchDirection d) { return Action{Search{d}}; }

  bool is_look_at() const { return std::holds_alternative<LookAt>(variant); }
  bool is_search() const { return std::holds_alternative<Search>(variant); }
  const LookAt& as_look_at() const { return std::get<LookAt>(variant); }
  const Search& as_search() const { return std::get<Search>(variant); }
};

bool operator==(const Action& a, const Action& b);

// "look_at car_1" / "search left", for logs and prompts.
std::string describe(const Action& a);

// Head-turn motivations from the rationale taxonomy.
enum class RationaleCategory { Interest, InformationSeeking, Safety, Habit, SocialSchema };

const char* to_string(RationaleCategory r);
RationaleCategory rationale_category_from_string(const std::string& s);

// Confirmation: a localized shift within the current field of view.
// Exploration: a broader rotation beyond it.
enum class MovementClass { Confirmation, Exploration };

const char* to_string(MovementClass m);
MovementClass movement_class_from_string(const std::string& s);

}  // namespace virac
