#include "taskguard/coordinator.hpp"

#include <algorithm>
#include <cctype>
#include <iomanip>
#include <sstream>

#include "taskguard/errors.hpp"
#include "taskguard/executor.hpp"
#include "taskguard/llm.hpp"
#include "taskguard/privacy.hpp"

namespace taskguard {

// ---------------------------------------------------------------------------
// PlanResult

PlanResult PlanResult::make_command(std::string text) {
    if (text.empty()) throw ValidationError("planned command must not be empty");
    PlanResult r;
    r.kind = Kind::command;
    r.command = std::move(text);
    return r;
}

PlanResult PlanResult::make_done() {
    PlanResult r;
    r.kind = Kind::done;
    return r;
}

PlanResult PlanResult::make_give_up(std::string reason) {
    PlanResult r;
    r.kind = Kind::give_up;
    r.reason = std::move(reason);
    return r;
}

const char* to_string(PlanResult::Kind kind) {
    switch (kind) {
        case PlanResult::Kind::command: return "command";
        case PlanResult::Kind::done: return "done";
        case PlanResult::Kind::give_up: return "give_up";
    }
    return "command";
}

const char* to_string(TerminationReason reason) {
    switch (reason) {
        case TerminationReason::goal_reached: return "goal_reached";
        case TerminationReason::planner_done: return "planner_done";
        case TerminationReason::gave_up: return "gave_up";
        case TerminationReason::replan_budget_exhausted: return "replan_budget_exhausted";
        case TerminationReason::step_cap: return "step_cap";
    }
    return "goal_reached";
}

// ---------------------------------------------------------------------------
// Planners

ScriptedPlanner::ScriptedPlanner(const Scenario& scenario) : scenario_(&scenario) {}

PlanResult ScriptedPlanner::plan_next(const PlanContext& context) {
    auto found =
        scenario_->scripted_plans.find({context.step_index, context.feedback.kind});
    if (found == scenario_->scripted_plans.end())
        throw ScenarioError("scenario '" + scenario_->scenario_id +
                            "' has no scripted plan for step " +
                            std::to_string(context.step_index) + " with feedback '" +
                            to_string(context.feedback.kind) + "'");
    const ScriptedPlan& plan = found->second;
    switch (plan.kind) {
        case ScriptedPlan::Kind::command: return PlanResult::make_command(plan.text);
        case ScriptedPlan::Kind::done: return PlanResult::make_done();
        case ScriptedPlan::Kind::give_up: return PlanResult::make_give_up(plan.text);
    }
    throw ScenarioError("corrupt scripted plan");
}

LlmPlanner::LlmPlanner(LlmClient& client, std::string model, const PlaceholderMemory* memory,
                       PrivacyMode privacy)
    : client_(&client), model_(std::move(model)), memory_(memory), privacy_(privacy) {}

namespace {

std::string first_nonempty_line(const std::string& reply) {
    std::istringstream in(reply);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        std::size_t b = line.find_last_not_of(" \t\r");
        return line.substr(a, b - a + 1);
    }
    return "";
}

bool ci_equals(const std::string& a, const char* b) {
    std::size_t n = std::char_traits<char>::length(b);
    if (a.size() != n) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

bool ci_prefix(const std::string& a, const char* b) {
    std::size_t n = std::char_traits<char>::length(b);
    if (a.size() < n) return false;
    for (std::size_t i = 0; i < n; ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

}  // namespace

PlanResult LlmPlanner::plan_next(const PlanContext& context) {
    std::optional<std::string> screen_text;
    if (context.screen)
        screen_text = serialize_screen(outbound_screen(*context.screen, memory_, privacy_));

    ChatRequest request = build_planner_request(
        outbound_text(context.instruction, memory_, privacy_), context.executed_commands,
        context.feedback.kind, outbound_text(context.feedback.detail, memory_, privacy_),
        screen_text, model_);

    std::string reply;
    try {
        reply = client_->complete(request);
    } catch (const TransportError& e) {
        throw PlannerUnavailableError(std::string("planner model unavailable: ") + e.what());
    }

    const std::string line = first_nonempty_line(reply);
    if (line.empty())
        throw PlannerUnavailableError("planner replied with empty text");
    if (ci_equals(line, "done")) return PlanResult::make_done();
    if (ci_prefix(line, "give up")) {
        std::string reason = line.size() > 7 ? line.substr(7) : "";
        std::size_t a = reason.find_first_not_of(" \t:.,-");
        reason = a == std::string::npos ? "" : reason.substr(a);
        return PlanResult::make_give_up(reason);
    }
    return PlanResult::make_command(line);
}

// ---------------------------------------------------------------------------
// run_task

namespace {

void add_warning(TaskReport& report, std::string text) {
    // The same warning (say, one unknown placeholder) can fire every step;
    // once in the report is enough.
    if (std::find(report.warnings.begin(), report.warnings.end(), text) ==
        report.warnings.end())
        report.warnings.push_back(std::move(text));
}

}  // namespace

TaskReport run_task(const Scenario& scenario, const std::string& instruction, Planner& planner,
                    FeasibilityGuard* feasibility, CompletenessGuard* completeness,
                    PlaceholderMemory& memory, const RunConfig& config) {
    if (config.max_replans < 0) throw ValidationError("max_replans must be >= 0");
    if (config.step_cap < 1) throw ValidationError("step_cap must be >= 1");

    // Ground truth is config-independent: the exact verifier scores every
    // executed step no matter which guards are switched on.
    OracleCompletenessGuard truth(scenario);

    TaskReport report;
    report.scenario_id = scenario.scenario_id;
    report.case_no = scenario.case_no;
    report.config_name = config.name;
    report.instruction = instruction;
    report.expert_steps = scenario.expert_steps;

    EnvState state = initial_state(scenario);
    std::vector<std::string> executed_commands;

    Feedback feedback;            // carried into the next plan call
    int replans_used = 0;         // current step only
    std::string planned_command;  // the current step's first planned command
    bool step_open = false;       // true once the current step has a first plan

    const ExecuteOptions exec_options{config.blind_mode, 20};

    while (true) {
        if (goal_reached(scenario, state)) {
            report.success = true;
            report.reason = TerminationReason::goal_reached;
            break;
        }
        if (static_cast<int>(report.steps.size()) >= config.step_cap) {
            report.reason = TerminationReason::step_cap;
            break;
        }

        PlanContext context;
        context.instruction = instruction;
        context.executed_commands = executed_commands;
        context.step_index = static_cast<int>(executed_commands.size());
        context.feedback = feedback;
        if (feedback.kind != FeedbackKind::none)
            context.screen = visible_screen(scenario, state);

        PlanResult plan = planner.plan_next(context);
        ++report.planner_calls;
        {
            PlannerCallRecord call;
            call.step_index = context.step_index;
            call.feedback = feedback.kind;
            call.screen_attached = context.screen.has_value();
            call.result = plan.kind;
            call.command = plan.command;
            report.planner_log.push_back(call);
        }

        if (plan.kind == PlanResult::Kind::done) {
            report.success = goal_reached(scenario, state);
            report.reason = report.success ? TerminationReason::goal_reached
                                           : TerminationReason::planner_done;
            break;
        }
        if (plan.kind == PlanResult::Kind::give_up) {
            report.reason = TerminationReason::gave_up;
            if (!plan.reason.empty()) add_warning(report, "planner gave up: " + plan.reason);
            break;
        }

        if (!step_open) {
            planned_command = plan.command;
            step_open = true;
        }

        RestoreOutcome restored = restore(plan.command, memory);
        for (const std::string& name : restored.unknown_placeholders)
            add_warning(report, "unknown placeholder {" + name + "} left as-is");

        const Screen before_screen = visible_screen(scenario, state);

        // Feasibility gate.
        std::optional<GuardVerdict> gate_verdict;
        if (feasibility) {
            bool gate_ok;
            std::string gate_reason;
            try {
                gate_verdict = feasibility->assess(before_screen, restored.text);
                gate_ok = gate_verdict->positive;
                gate_reason = gate_verdict->rationale;
            } catch (const GuardUnavailableError& e) {
                add_warning(report, std::string("feasibility guard unavailable: ") + e.what());
                gate_ok = config.feasibility_failure == GuardFailurePolicy::fail_open;
                gate_reason = "feasibility predictor unavailable";
            }
            if (!gate_ok) {
                if (replans_used >= config.max_replans) {
                    report.reason = TerminationReason::replan_budget_exhausted;
                    break;
                }
                ++replans_used;
                feedback.kind = FeedbackKind::infeasible;
                feedback.detail = sanitize_outbound(gate_reason, memory);
                continue;
            }
        }

        ExecutionOutcome outcome = execute(scenario, state, restored.text, exec_options);

        if (!outcome.executed) {
            // The command fell over at execution time (no gate, or a lenient
            // one). Charged against the same budget as a gate rejection.
            if (replans_used >= config.max_replans) {
                report.reason = TerminationReason::replan_budget_exhausted;
                break;
            }
            ++replans_used;
            feedback.kind = FeedbackKind::infeasible;
            feedback.detail = sanitize_outbound(outcome.note, memory);
            continue;
        }

        const Screen after_screen = visible_screen(scenario, outcome.state);

        StepRecord step;
        step.index = static_cast<int>(report.steps.size());
        step.planned_command = planned_command;
        step.executed_command = plan.command;
        step.feasibility_verdict = gate_verdict;
        step.replans_used = replans_used;
        step.executed = true;
        step.blind_fallback = outcome.blind_fallback;
        step.grounded_element = outcome.grounded_element;
        step.predicted_bbox = outcome.predicted_bbox;
        step.state_changed = outcome.state_changed;
        step.note = outcome.note;

        // Ground-truth accounting on what actually ran.
        step.valid = truth.assess({before_screen, restored.text, after_screen}).positive;
        if (step.valid) ++report.valid_steps;

        // Configured verification judges the step's intent: its first planned
        // command, not whatever the gate replaced it with.
        feedback = Feedback{};
        if (completeness) {
            RestoreOutcome original = restore(planned_command, memory);
            CompletenessQuery query{before_screen, original.text, after_screen};
            bool complete_ok;
            std::string why;
            try {
                GuardVerdict verdict = completeness->assess(query);
                step.completeness_verdict = verdict;
                complete_ok = verdict.positive;
                why = verdict.rationale;
            } catch (const GuardUnavailableError& e) {
                add_warning(report, std::string("completeness guard unavailable: ") + e.what());
                complete_ok = config.completeness_failure == GuardFailurePolicy::fail_open;
                why = "completeness verifier unavailable";
            }
            if (!complete_ok) {
                feedback.kind = FeedbackKind::incomplete;
                feedback.detail = sanitize_outbound(why, memory);
            }
        }

        executed_commands.push_back(plan.command);
        report.steps.push_back(std::move(step));
        state = std::move(outcome.state);
        replans_used = 0;
        step_open = false;
        planned_command.clear();
    }

    report.total_steps = static_cast<int>(report.steps.size());
    report.final_screen = state.current_page;
    return report;
}

// ---------------------------------------------------------------------------
// Reports

Json task_report_to_json(const TaskReport& report) {
    Json j;
    j["scenario_id"] = report.scenario_id;
    j["case"] = report.case_no;
    j["config"] = report.config_name;
    j["instruction"] = report.instruction;
    j["success"] = report.success;
    j["reason"] = to_string(report.reason);
    j["valid_steps"] = report.valid_steps;
    j["total_steps"] = report.total_steps;
    j["expert_steps"] = report.expert_steps;
    j["planner_calls"] = report.planner_calls;
    j["progress"] = progress_row(report);
    j["final_screen"] = report.final_screen;

    Json steps = Json::array();
    for (const StepRecord& s : report.steps) {
        Json e;
        e["index"] = s.index;
        e["planned_command"] = s.planned_command;
        e["executed_command"] = s.executed_command;
        if (s.feasibility_verdict) {
            e["feasibility"] = {{"positive", s.feasibility_verdict->positive},
                                {"score", s.feasibility_verdict->score},
                                {"backend", to_string(s.feasibility_verdict->backend)}};
        }
        if (s.completeness_verdict) {
            e["completeness"] = {{"positive", s.completeness_verdict->positive},
                                 {"score", s.completeness_verdict->score},
                                 {"backend", to_string(s.completeness_verdict->backend)}};
        }
        e["replans_used"] = s.replans_used;
        e["executed"] = s.executed;
        e["blind_fallback"] = s.blind_fallback;
        if (s.grounded_element) e["grounded_element"] = *s.grounded_element;
        if (s.predicted_bbox)
            e["predicted_bbox"] = {s.predicted_bbox->x_min, s.predicted_bbox->y_min,
                                   s.predicted_bbox->x_max, s.predicted_bbox->y_max};
        e["state_changed"] = s.state_changed;
        e["valid"] = s.valid;
        if (!s.note.empty()) e["note"] = s.note;
        steps.push_back(std::move(e));
    }
    j["steps"] = std::move(steps);

    Json calls = Json::array();
    for (const PlannerCallRecord& c : report.planner_log) {
        Json e;
        e["step_index"] = c.step_index;
        e["feedback"] = to_string(c.feedback);
        e["screen_attached"] = c.screen_attached;
        e["result"] = to_string(c.result);
        if (!c.command.empty()) e["command"] = c.command;
        calls.push_back(std::move(e));
    }
    j["planner_log"] = std::move(calls);
    j["warnings"] = report.warnings;
    return j;
}

std::string progress_row(int valid_steps, int total_steps, int expert_steps, bool success) {
    std::ostringstream out;
    out << valid_steps << "/" << total_steps << " (" << expert_steps << ") "
        << (success ? "✓" : "✗");
    return out.str();
}

std::string progress_row(const TaskReport& report) {
    return progress_row(report.valid_steps, report.total_steps, report.expert_steps,
                        report.success);
}

// ---------------------------------------------------------------------------
// Replay

ReplayConfig baseline_config() { return {"Baseline", false, false, true}; }
ReplayConfig feasibility_config() { return {"+Fea", true, false, false}; }
ReplayConfig feasibility_completeness_config() { return {"+Fea+Com", true, true, false}; }

std::vector<ReplayConfig> reference_configs() {
    return {baseline_config(), feasibility_config(), feasibility_completeness_config()};
}

TaskReport replay_scenario(const Scenario& scenario, const ReplayConfig& config, int max_replans,
                           int step_cap) {
    PlaceholderMemory memory;  // fresh, in-process: replay never touches disk
    const std::string instruction = redact(scenario.instruction, memory);

    ScriptedPlanner planner(scenario);
    OracleFeasibilityGuard feasibility;
    OracleCompletenessGuard completeness(scenario);

    RunConfig run;
    run.name = config.name;
    run.max_replans = max_replans;
    run.step_cap = step_cap;
    run.blind_mode = config.blind_mode;

    return run_task(scenario, instruction, planner,
                    config.feasibility ? &feasibility : nullptr,
                    config.completeness ? &completeness : nullptr, memory, run);
}

std::vector<std::vector<TaskReport>> replay_all(const std::vector<Scenario>& scenarios,
                                                int max_replans, int step_cap) {
    std::vector<std::vector<TaskReport>> reports;
    reports.reserve(scenarios.size());
    for (const Scenario& scenario : scenarios) {
        std::vector<TaskReport> row;
        for (const ReplayConfig& config : reference_configs())
            row.push_back(replay_scenario(scenario, config, max_replans, step_cap));
        reports.push_back(std::move(row));
    }
    return reports;
}

namespace {

// The check/cross marks are 3 UTF-8 bytes but one terminal column; pad by
// display width, not byte count.
std::size_t display_width(const std::string& s) {
    std::size_t width = 0;
    for (unsigned char c : s)
        if ((c & 0xc0) != 0x80) ++width;
    return width;
}

void put_cell(std::ostringstream& out, const std::string& text, std::size_t width) {
    out << text;
    for (std::size_t i = display_width(text); i < width; ++i) out << ' ';
}

}  // namespace

std::string format_replay_table(const std::vector<std::vector<TaskReport>>& reports) {
    std::ostringstream out;
    const auto configs = reference_configs();

    std::size_t instr_width = 11;  // "Instruction"
    for (const auto& row : reports)
        if (!row.empty()) instr_width = std::max(instr_width, display_width(row[0].instruction));
    instr_width = std::min<std::size_t>(instr_width, 74);

    out << "Progress: valid steps / total execution steps (human expert steps)\n\n";
    put_cell(out, "No.", 5);
    put_cell(out, "Instruction", instr_width + 2);
    for (const auto& c : configs) put_cell(out, c.name, 14);
    out << "\n";

    for (const auto& row : reports) {
        if (row.empty()) continue;
        put_cell(out, std::to_string(row[0].case_no), 5);
        std::string instr = row[0].instruction;
        if (display_width(instr) > instr_width) instr = instr.substr(0, instr_width - 1) + "~";
        put_cell(out, instr, instr_width + 2);
        for (const TaskReport& report : row) put_cell(out, progress_row(report), 14);
        out << "\n";
    }

    out << "\nEnd states:\n";
    for (const auto& row : reports) {
        if (row.empty()) continue;
        out << "  " << row[0].case_no << ". " << row[0].scenario_id << ": ";
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ", ";
            out << row[i].config_name << "=" << to_string(row[i].reason);
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace taskguard
