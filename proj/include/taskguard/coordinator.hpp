#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "taskguard/guards.hpp"
#include "taskguard/screen.hpp"
#include "taskguard/sim.hpp"

namespace taskguard {

class LlmClient;
class PlaceholderMemory;

// ---------------------------------------------------------------------------
// Planning interface

struct Feedback {
    FeedbackKind kind = FeedbackKind::none;
    std::string detail;  // reason text, already safe to show a remote planner
};

struct PlanContext {
    std::string instruction;                     // redacted form
    std::vector<std::string> executed_commands;  // redacted forms, in order
    int step_index = 0;                          // == executed_commands.size()
    Feedback feedback;
    // Present exactly when feedback.kind != none: first-attempt planning is
    // screen-blind, replanning sees the current screen.
    std::optional<Screen> screen;
};

struct PlanResult {
    enum class Kind { command, done, give_up };
    Kind kind = Kind::command;
    std::string command;  // kind == command
    std::string reason;   // kind == give_up

    static PlanResult make_command(std::string text);
    static PlanResult make_done();
    static PlanResult make_give_up(std::string reason);
};

const char* to_string(PlanResult::Kind kind);

class Planner {
public:
    virtual ~Planner() = default;
    virtual PlanResult plan_next(const PlanContext& context) = 0;
};

// Replays a scenario's plan table keyed by (step_index, feedback kind).
// Re-asking the same key yields the same plan — that is what lets a stuck
// replanning loop run into the budget. A missing key is an authoring error.
class ScriptedPlanner : public Planner {
public:
    explicit ScriptedPlanner(const Scenario& scenario);
    PlanResult plan_next(const PlanContext& context) override;

private:
    const Scenario* scenario_;
};

// Prompts a live model. The reply's first non-empty line is the plan: "done"
// finishes, a line starting with "give up" abandons, anything else is the next
// command. Transport failures surface as PlannerUnavailableError.
class LlmPlanner : public Planner {
public:
    LlmPlanner(LlmClient& client, std::string model, const PlaceholderMemory* memory = nullptr,
               PrivacyMode privacy = PrivacyMode::placeholder);
    PlanResult plan_next(const PlanContext& context) override;

private:
    LlmClient* client_;
    std::string model_;
    const PlaceholderMemory* memory_;
    PrivacyMode privacy_;
};

// ---------------------------------------------------------------------------
// The orchestrator automaton

enum class GuardFailurePolicy { fail_closed, fail_open };

struct RunConfig {
    std::string name = "custom";
    int max_replans = 3;  // per step; plan calls per step <= 1 + max_replans
    int step_cap = 25;    // executed steps per run
    bool blind_mode = false;
    // What to do when a guard backend is unavailable. A blocked harmless
    // action costs less than an executed harmful one, hence the defaults.
    GuardFailurePolicy feasibility_failure = GuardFailurePolicy::fail_closed;
    GuardFailurePolicy completeness_failure = GuardFailurePolicy::fail_open;
};

enum class TerminationReason {
    goal_reached,
    planner_done,  // planner said done but the goal predicate is unmet
    gave_up,
    replan_budget_exhausted,
    step_cap
};

const char* to_string(TerminationReason reason);

struct StepRecord {
    int index = 0;                 // 0-based executed-step number
    std::string planned_command;   // the step's first planned command (redacted)
    std::string executed_command;  // what actually ran (redacted)
    std::optional<GuardVerdict> feasibility_verdict;   // gate verdict that let it through
    std::optional<GuardVerdict> completeness_verdict;  // configured verifier, on planned_command
    int replans_used = 0;  // plan calls beyond the step's first
    bool executed = false;
    bool blind_fallback = false;
    std::optional<int> grounded_element;
    std::optional<BBox> predicted_bbox;
    bool state_changed = false;
    bool valid = false;  // ground truth: did the executed command do its real UI thing
    std::string note;
};

struct PlannerCallRecord {
    int step_index = 0;  // executed steps at call time
    FeedbackKind feedback = FeedbackKind::none;
    bool screen_attached = false;
    PlanResult::Kind result = PlanResult::Kind::command;
    std::string command;  // when result == command (redacted)
};

struct TaskReport {
    std::string scenario_id;
    int case_no = 0;
    std::string config_name;
    std::string instruction;  // redacted
    bool success = false;
    TerminationReason reason = TerminationReason::goal_reached;
    int valid_steps = 0;
    int total_steps = 0;
    int expert_steps = 0;
    int planner_calls = 0;
    std::string final_screen;
    std::vector<StepRecord> steps;
    std::vector<PlannerCallRecord> planner_log;
    std::vector<std::string> warnings;
};

Json task_report_to_json(const TaskReport& report);

// One line of Table-2-style progress accounting: "4/7 (9) X".
std::string progress_row(int valid_steps, int total_steps, int expert_steps, bool success);
std::string progress_row(const TaskReport& report);

// Runs plan -> gate -> execute -> verify -> advance until the goal is reached,
// the planner stops, a step's replan budget runs out, or the step cap hits.
//
//  - instruction must already be redacted; commands are restored from memory
//    immediately before grounding/execution and never leave the process raw.
//  - feasibility/completeness may be null (that axis of checking is off).
//  - The configured completeness verifier judges each step's *first planned*
//    command — the step's intent. A gate replacement that executes fine still
//    leaves the intent unmet, which is what triggers the remedial replan.
//  - StepRecord.valid is ground truth regardless of config: the exact verifier
//    run on the command that actually executed.
TaskReport run_task(const Scenario& scenario, const std::string& instruction, Planner& planner,
                    FeasibilityGuard* feasibility, CompletenessGuard* completeness,
                    PlaceholderMemory& memory, const RunConfig& config);

// ---------------------------------------------------------------------------
// Bundled-scenario replay

// The three reference configurations: guards off with blind fallbacks, the
// feasibility gate alone, and gate plus completeness verification.
struct ReplayConfig {
    std::string name;
    bool feasibility = false;
    bool completeness = false;
    bool blind_mode = false;
};

ReplayConfig baseline_config();
ReplayConfig feasibility_config();
ReplayConfig feasibility_completeness_config();
std::vector<ReplayConfig> reference_configs();

// Scripted planner + oracle guards + a fresh in-process memory, per run.
TaskReport replay_scenario(const Scenario& scenario, const ReplayConfig& config,
                           int max_replans = 3, int step_cap = 25);

// reports[scenario][config] in reference_configs() order.
std::vector<std::vector<TaskReport>> replay_all(const std::vector<Scenario>& scenarios,
                                                int max_replans = 3, int step_cap = 25);

// Aligned text tables: progress per scenario x config, then end states.
std::string format_replay_table(const std::vector<std::vector<TaskReport>>& reports);

}  // namespace taskguard
