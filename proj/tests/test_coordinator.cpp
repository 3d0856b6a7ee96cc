#include <doctest.h>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "taskguard/coordinator.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/llm.hpp"
#include "taskguard/privacy.hpp"
#include "taskguard/sim.hpp"

using namespace taskguard;

namespace {

const std::string kRepoRoot = TASKGUARD_REPO_ROOT;

UiElement elem(int index, std::string text, BBox box, ElementType t = ElementType::button) {
    UiElement e;
    e.index = index;
    e.text = std::move(text);
    e.bbox = box;
    e.etype = t;
    return e;
}

Scenario micro_scenario() {
    Scenario sc;
    sc.scenario_id = "micro";
    sc.case_no = 1;
    sc.instruction = "open settings";
    sc.expert_steps = 1;
    sc.start = "home";
    sc.goal = {GoalPredicate::Kind::reach_screen, "settings", -1, ""};

    SimPage home;
    home.screen.screen_id = "home";
    home.screen.width = 1280;
    home.screen.height = 800;
    home.screen.elements = {elem(0, "Header", {8, 8, 408, 44}),
                            elem(1, "Settings", {8, 56, 408, 92})};
    home.transitions[{1, ActionKind::click}] = "settings";

    SimPage settings;
    settings.screen.screen_id = "settings";
    settings.screen.width = 1280;
    settings.screen.height = 800;
    settings.screen.elements = {elem(0, "Back", {8, 8, 408, 44})};

    sc.pages["home"] = home;
    sc.pages["settings"] = settings;
    return sc;
}

// Planner that must never be consulted.
class ForbiddenPlanner : public Planner {
public:
    PlanResult plan_next(const PlanContext&) override {
        FAIL("planner was consulted");
        return PlanResult::make_done();
    }
};

// Fixed scripted sequence independent of feedback, cycling when exhausted.
class CannedPlanner : public Planner {
public:
    explicit CannedPlanner(std::vector<PlanResult> plans) : plans_(std::move(plans)) {}
    PlanResult plan_next(const PlanContext&) override {
        const PlanResult& r = plans_[calls_ % plans_.size()];
        ++calls_;
        return r;
    }
    int calls_ = 0;

private:
    std::vector<PlanResult> plans_;
};

class ThrowingFeasibility : public FeasibilityGuard {
public:
    GuardVerdict assess(const Screen&, const std::string&) override {
        throw GuardUnavailableError("backend offline");
    }
};

class ThrowingCompleteness : public CompletenessGuard {
public:
    GuardVerdict assess(const CompletenessQuery&) override {
        throw GuardUnavailableError("backend offline");
    }
};

TaskReport run_fixture(const std::string& file, const ReplayConfig& config) {
    Scenario sc = load_scenario(kRepoRoot + "/scenarios/" + file);
    return replay_scenario(sc, config);
}

}  // namespace

TEST_CASE("a task that starts at the goal finishes without planning") {
    Scenario sc = micro_scenario();
    sc.goal.screen_id = "home";  // already there
    ForbiddenPlanner planner;
    PlaceholderMemory memory;
    TaskReport report = run_task(sc, sc.instruction, planner, nullptr, nullptr, memory, {});
    CHECK(report.success);
    CHECK(report.reason == TerminationReason::goal_reached);
    CHECK(report.total_steps == 0);
    CHECK(report.planner_calls == 0);
}

TEST_CASE("a one-step task runs plan, execute, and goal check") {
    Scenario sc = micro_scenario();
    CannedPlanner planner({PlanResult::make_command("select the Settings item")});
    PlaceholderMemory memory;
    OracleFeasibilityGuard fea;
    OracleCompletenessGuard com(sc);
    TaskReport report = run_task(sc, sc.instruction, planner, &fea, &com, memory, {});
    CHECK(report.success);
    CHECK(report.reason == TerminationReason::goal_reached);
    CHECK(report.valid_steps == 1);
    CHECK(report.total_steps == 1);
    CHECK(report.final_screen == "settings");
    REQUIRE(report.steps.size() == 1);
    CHECK(report.steps[0].valid);
    CHECK(report.steps[0].feasibility_verdict.has_value());
    CHECK(report.steps[0].completeness_verdict.has_value());
}

TEST_CASE("planner done with the goal unmet is a failure, not success") {
    Scenario sc = micro_scenario();
    CannedPlanner planner({PlanResult::make_done()});
    PlaceholderMemory memory;
    TaskReport report = run_task(sc, sc.instruction, planner, nullptr, nullptr, memory, {});
    CHECK_FALSE(report.success);
    CHECK(report.reason == TerminationReason::planner_done);
    CHECK(report.total_steps == 0);
}

TEST_CASE("give up terminates the run and records the reason") {
    Scenario sc = micro_scenario();
    CannedPlanner planner({PlanResult::make_give_up("cannot find the page")});
    PlaceholderMemory memory;
    TaskReport report = run_task(sc, sc.instruction, planner, nullptr, nullptr, memory, {});
    CHECK_FALSE(report.success);
    CHECK(report.reason == TerminationReason::gave_up);
    REQUIRE_FALSE(report.warnings.empty());
}

TEST_CASE("the step cap stops a planner that never finishes") {
    Scenario sc = micro_scenario();
    // Dead click forever: Header has no transition.
    CannedPlanner planner({PlanResult::make_command("select the Header item")});
    PlaceholderMemory memory;
    RunConfig config;
    config.step_cap = 4;
    TaskReport report = run_task(sc, sc.instruction, planner, nullptr, nullptr, memory, config);
    CHECK_FALSE(report.success);
    CHECK(report.reason == TerminationReason::step_cap);
    CHECK(report.total_steps == 4);
}

TEST_CASE("the feasibility gate blocks infeasible commands and asks again") {
    Scenario sc = micro_scenario();
    CannedPlanner planner({PlanResult::make_command("select the Missing item"),
                           PlanResult::make_command("select the Settings item")});
    PlaceholderMemory memory;
    OracleFeasibilityGuard fea;
    TaskReport report = run_task(sc, sc.instruction, planner, &fea, nullptr, memory, {});
    CHECK(report.success);
    REQUIRE(report.steps.size() == 1);
    CHECK(report.steps[0].replans_used == 1);
    CHECK(report.steps[0].planned_command == "select the Missing item");
    CHECK(report.steps[0].executed_command == "select the Settings item");
    // The second planner call carried infeasible feedback and a screen.
    REQUIRE(report.planner_log.size() == 2);
    CHECK(report.planner_log[1].feedback == FeedbackKind::infeasible);
    CHECK(report.planner_log[1].screen_attached);
    CHECK(report.planner_log[0].feedback == FeedbackKind::none);
    CHECK_FALSE(report.planner_log[0].screen_attached);
}

TEST_CASE("a stuck replanning loop exhausts the budget and stops") {
    Scenario sc = micro_scenario();
    CannedPlanner planner({PlanResult::make_command("select the Missing item")});
    PlaceholderMemory memory;
    OracleFeasibilityGuard fea;
    RunConfig config;
    config.max_replans = 3;
    TaskReport report = run_task(sc, sc.instruction, planner, &fea, nullptr, memory, config);
    CHECK_FALSE(report.success);
    CHECK(report.reason == TerminationReason::replan_budget_exhausted);
    CHECK(report.total_steps == 0);
    CHECK(report.planner_calls == 4);  // 1 + max_replans, all on the same step
}

TEST_CASE("feasibility outages fail closed by default and fail open on request") {
    Scenario sc = micro_scenario();
    ThrowingFeasibility fea;
    PlaceholderMemory memory;

    CannedPlanner strict_planner({PlanResult::make_command("select the Settings item")});
    RunConfig strict;
    strict.max_replans = 1;
    TaskReport blocked =
        run_task(sc, sc.instruction, strict_planner, &fea, nullptr, memory, strict);
    CHECK_FALSE(blocked.success);
    CHECK(blocked.reason == TerminationReason::replan_budget_exhausted);

    CannedPlanner lenient_planner({PlanResult::make_command("select the Settings item")});
    RunConfig lenient;
    lenient.feasibility_failure = GuardFailurePolicy::fail_open;
    TaskReport passed =
        run_task(sc, sc.instruction, lenient_planner, &fea, nullptr, memory, lenient);
    CHECK(passed.success);
    CHECK_FALSE(passed.warnings.empty());
}

TEST_CASE("completeness outages fail open by default") {
    Scenario sc = micro_scenario();
    ThrowingCompleteness com;
    PlaceholderMemory memory;
    CannedPlanner planner({PlanResult::make_command("select the Settings item")});
    TaskReport report = run_task(sc, sc.instruction, planner, nullptr, &com, memory, {});
    CHECK(report.success);
    CHECK_FALSE(report.warnings.empty());
}

TEST_CASE("scripted planners replay their scenario's plan table") {
    Scenario sc = load_scenario(kRepoRoot + "/scenarios/no09.json");
    ScriptedPlanner planner(sc);

    PlanContext first;
    first.instruction = sc.instruction;
    first.step_index = 0;
    PlanResult r = planner.plan_next(first);
    CHECK(r.kind == PlanResult::Kind::command);

    PlanContext replan;
    replan.instruction = sc.instruction;
    replan.step_index = 4;
    replan.feedback = {FeedbackKind::infeasible, "not on screen"};
    replan.screen = visible_screen(sc, initial_state(sc));
    PlanResult fixed = planner.plan_next(replan);
    CHECK(fixed.command == "select the Sort by: Featured item");

    PlanContext missing;
    missing.instruction = sc.instruction;
    missing.step_index = 40;
    CHECK_THROWS_AS((void)planner.plan_next(missing), ScenarioError);
}

TEST_CASE("llm planners parse replies into plans and gate the screen on feedback") {
    ScriptedTransport transport;
    LlmClient client(transport);
    LlmPlanner planner(client, "gpt-4");

    PlanContext ctx;
    ctx.instruction = "Buy gloves.";
    ctx.step_index = 0;

    transport.push_reply("select the Search item");
    PlanResult cmd = planner.plan_next(ctx);
    CHECK(cmd.kind == PlanResult::Kind::command);
    CHECK(cmd.command == "select the Search item");

    transport.push_reply("done");
    CHECK(planner.plan_next(ctx).kind == PlanResult::Kind::done);

    transport.push_reply("give up: the site is down");
    PlanResult quit = planner.plan_next(ctx);
    CHECK(quit.kind == PlanResult::Kind::give_up);
    CHECK(quit.reason.find("site is down") != std::string::npos);

    transport.push_reply("\n\n  select the Cart item  \nextra prose");
    CHECK(planner.plan_next(ctx).command == "select the Cart item");

    transport.push_reply("");
    CHECK_THROWS_AS((void)planner.plan_next(ctx), PlannerUnavailableError);

    // Feedback attaches the serialized screen to the prompt; blind turns carry none.
    Screen s;
    s.screen_id = "p";
    s.width = 1280;
    s.height = 800;
    s.elements = {elem(0, "Add to Cart", {10, 20, 110, 50})};
    PlanContext sighted = ctx;
    sighted.feedback = {FeedbackKind::incomplete, "nothing changed"};
    sighted.screen = s;
    transport.push_reply("select the Add to Cart item");
    (void)planner.plan_next(sighted);
    CHECK(transport.requests().back().turns.back().content.find("Add to Cart") !=
          std::string::npos);
    for (std::size_t i = 0; i + 1 < transport.requests().size(); ++i) {
        for (const ChatTurn& turn : transport.requests()[i].turns) {
            CHECK(turn.content.find("location: [") == std::string::npos);
        }
    }
}

TEST_CASE("progress rows render valid, total, expert counts and the end mark") {
    CHECK(progress_row(4, 7, 9, false) == "4/7 (9) ✗");
    CHECK(progress_row(9, 9, 9, true) == "9/9 (9) ✓");
    CHECK(progress_row(0, 0, 3, false) == "0/0 (3) ✗");
}

TEST_CASE("the hardest bundled scenario needs both guards to succeed") {
    TaskReport baseline = run_fixture("no09.json", baseline_config());
    CHECK_FALSE(baseline.success);
    CHECK(progress_row(baseline) == "4/7 (9) ✗");
    CHECK(baseline.reason == TerminationReason::planner_done);

    TaskReport gated = run_fixture("no09.json", feasibility_config());
    CHECK_FALSE(gated.success);
    CHECK(progress_row(gated) == "5/5 (9) ✗");
    CHECK(gated.reason == TerminationReason::replan_budget_exhausted);

    TaskReport full = run_fixture("no09.json", feasibility_completeness_config());
    CHECK(full.success);
    CHECK(progress_row(full) == "9/9 (9) ✓");
    CHECK(full.reason == TerminationReason::goal_reached);
}

TEST_CASE("some bundled scenarios exhaust the budget even fully guarded") {
    TaskReport full = run_fixture("no12.json", feasibility_completeness_config());
    CHECK_FALSE(full.success);
    CHECK(full.reason == TerminationReason::replan_budget_exhausted);
    CHECK(progress_row(full) == "6/6 (8) ✗");
}

TEST_CASE("guarded configs never do worse than the baseline on the bundle") {
    std::vector<Scenario> all = load_scenario_dir(kRepoRoot + "/scenarios");
    std::vector<std::vector<TaskReport>> reports = replay_all(all);
    REQUIRE(reports.size() == all.size());
    for (const std::vector<TaskReport>& row : reports) {
        REQUIRE(row.size() == 3);
        const TaskReport& baseline = row[0];
        const TaskReport& gated = row[1];
        const TaskReport& full = row[2];
        CHECK(gated.valid_steps >= baseline.valid_steps);
        CHECK(int(gated.success) >= int(baseline.success));
        CHECK(int(full.success) >= int(gated.success));
        // Every step under the gate grounds and executes; validity can still
        // fall short when a grounded click does nothing real.
        for (const StepRecord& step : gated.steps) CHECK(step.executed);
        for (const StepRecord& step : full.steps) CHECK(step.executed);
    }
}

TEST_CASE("planner call counts respect the replan budget bound") {
    std::vector<Scenario> all = load_scenario_dir(kRepoRoot + "/scenarios");
    const int max_replans = 3;
    const int step_cap = 25;
    for (const Scenario& sc : all) {
        for (const ReplayConfig& config : reference_configs()) {
            TaskReport report = replay_scenario(sc, config, max_replans, step_cap);
            CHECK(report.planner_calls <= step_cap * (1 + max_replans));
            CHECK(report.planner_calls == static_cast<int>(report.planner_log.size()));
            for (const StepRecord& step : report.steps) {
                CHECK(step.replans_used <= max_replans);
            }
        }
    }
}

TEST_CASE("task reports serialize with their steps and planner log") {
    TaskReport report = run_fixture("no01.json", feasibility_completeness_config());
    Json doc = task_report_to_json(report);
    CHECK(doc["scenario_id"] == "no01_bbc_football");
    CHECK(doc["success"] == true);
    CHECK(doc["progress"] == "4/4 (4) ✓");
    CHECK(doc["reason"] == "goal_reached");
    CHECK(doc["steps"].is_array());
    CHECK(doc["planner_log"].is_array());
    CHECK(doc["steps"].size() == 4);
}

TEST_CASE("replay keeps instructions redacted in the reports") {
    std::vector<Scenario> all = load_scenario_dir(kRepoRoot + "/scenarios");
    std::vector<std::vector<TaskReport>> reports = replay_all(all);
    const TaskReport& login = reports[6][2];  // the credentials scenario, fully guarded
    CHECK(login.instruction ==
          "Log in Instacart with username {username} and password {password}.");
    CHECK(login.success);
    Json doc = task_report_to_json(login);
    CHECK(doc.dump().find("alice_w") == std::string::npos);
    CHECK(doc.dump().find("s3cretPW9") == std::string::npos);
}
