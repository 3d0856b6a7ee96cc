#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "taskguard/screen.hpp"

namespace taskguard {

enum class ActionKind { click, type_text, scroll };
enum class ScrollDirection { up, down };

struct Action {
    ActionKind kind = ActionKind::click;
    int target = -1;          // element index for click/type
    std::string text;         // type only
    ScrollDirection direction = ScrollDirection::down;

    static Action click(int target) { return {ActionKind::click, target, {}, {}}; }
    static Action type(int target, std::string text) {
        return {ActionKind::type_text, target, std::move(text), {}};
    }
    static Action scroll(ScrollDirection d) { return {ActionKind::scroll, -1, {}, d}; }
};

// Static definition of one page. `screen` holds the initially visible
// elements; hidden_elements continue the index sequence and are revealed one
// per downward scroll, in order. Transitions fire on (element, action-kind).
struct SimPage {
    Screen screen;
    std::vector<UiElement> hidden_elements;
    std::map<std::pair<int, ActionKind>, std::string> transitions;
};

struct GoalPredicate {
    enum class Kind { reach_screen, typed_value };
    Kind kind = Kind::reach_screen;
    std::string screen_id;
    int element = -1;    // typed_value only
    std::string equals;  // typed_value only
};

// Feedback channel from the verifiers back into planning.
enum class FeedbackKind { none, infeasible, incomplete };

const char* to_string(FeedbackKind kind);
FeedbackKind feedback_kind_from_string(const std::string& s);

// One scripted planner reply, keyed in the scenario by (step, feedback kind).
struct ScriptedPlan {
    enum class Kind { command, done, give_up };
    Kind kind = Kind::command;
    std::string text;  // command text, or give_up reason
};

struct Scenario {
    std::string scenario_id;
    int case_no = 0;  // ordering key for replay summaries
    std::string instruction;
    int expert_steps = 0;
    std::string start;
    GoalPredicate goal;
    std::map<std::string, SimPage> pages;
    std::map<std::pair<int, FeedbackKind>, ScriptedPlan> scripted_plans;
};

// Mutable part of the world: where we are, what has been revealed, what has
// been typed. Pure-value semantics; apply() returns a new state.
struct EnvState {
    std::string current_page;
    std::map<std::string, int> scroll_offsets;                      // page -> revealed count
    std::map<std::string, std::map<int, std::string>> typed_values; // page -> element -> text

    bool operator==(const EnvState&) const = default;
};

EnvState initial_state(const Scenario& scenario);

// Materializes the currently visible screen: base elements plus revealed
// hidden ones, with runtime typed values overlaid on the page's initial ones.
Screen visible_screen(const Scenario& scenario, const EnvState& state);

// Deterministic transition function. Click on an element without a transition
// entry leaves the state unchanged (a dead click — the caller records it as
// executed but ineffective). Targets that are absent or not yet visible raise
// ExecutionError; typing into a non-input raises ExecutionError. Scrolling up
// never hides anything (visibility is monotone).
EnvState apply(const Scenario& scenario, const EnvState& state, const Action& action);

bool goal_reached(const Scenario& scenario, const EnvState& state);

// Structural checks over the whole scenario: start/goal/transition targets
// exist, combined element indices are contiguous with the visible ones first,
// scripted plan entries are well-formed. Throws ScenarioError.
void validate(const Scenario& scenario);

Scenario scenario_from_json(const Json& j);
Scenario load_scenario(const std::string& path);

// All *.json scenarios in a directory, sorted by case_no then id.
std::vector<Scenario> load_scenario_dir(const std::string& dir);

}  // namespace taskguard
