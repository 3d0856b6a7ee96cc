#include "taskguard/sim.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "taskguard/errors.hpp"

namespace taskguard {

const char* to_string(FeedbackKind kind) {
    switch (kind) {
        case FeedbackKind::none: return "none";
        case FeedbackKind::infeasible: return "infeasible";
        case FeedbackKind::incomplete: return "incomplete";
    }
    return "?";
}

FeedbackKind feedback_kind_from_string(const std::string& s) {
    if (s == "none") return FeedbackKind::none;
    if (s == "infeasible") return FeedbackKind::infeasible;
    if (s == "incomplete") return FeedbackKind::incomplete;
    throw ScenarioError("unknown feedback kind '" + s + "'");
}

namespace {

const SimPage& page_at(const Scenario& scenario, const std::string& id) {
    auto it = scenario.pages.find(id);
    if (it == scenario.pages.end())
        throw ScenarioError("scenario '" + scenario.scenario_id + "' has no page '" + id + "'");
    return it->second;
}

int revealed_count(const SimPage& page, const EnvState& state, const std::string& id) {
    auto it = state.scroll_offsets.find(id);
    int offset = it == state.scroll_offsets.end() ? 0 : it->second;
    return std::min<int>(offset, static_cast<int>(page.hidden_elements.size()));
}

}  // namespace

EnvState initial_state(const Scenario& scenario) {
    EnvState state;
    state.current_page = scenario.start;
    return state;
}

Screen visible_screen(const Scenario& scenario, const EnvState& state) {
    const SimPage& page = page_at(scenario, state.current_page);
    Screen screen = page.screen;
    int reveal = revealed_count(page, state, state.current_page);
    for (int i = 0; i < reveal; ++i)
        screen.elements.push_back(page.hidden_elements[static_cast<std::size_t>(i)]);
    auto typed_it = state.typed_values.find(state.current_page);
    if (typed_it != state.typed_values.end())
        for (const auto& [idx, text] : typed_it->second) screen.typed_values[idx] = text;
    return screen;
}

EnvState apply(const Scenario& scenario, const EnvState& state, const Action& action) {
    const SimPage& page = page_at(scenario, state.current_page);
    EnvState next = state;

    if (action.kind == ActionKind::scroll) {
        if (action.direction == ScrollDirection::down) {
            int& offset = next.scroll_offsets[state.current_page];
            offset = std::min<int>(offset + 1, static_cast<int>(page.hidden_elements.size()));
        }
        return next;  // scrolling up keeps everything revealed
    }

    const Screen screen = visible_screen(scenario, state);
    const UiElement* target = screen.element_at(action.target);
    if (!target)
        throw ExecutionError("action targets element " + std::to_string(action.target) +
                             " which is absent or not visible on '" + state.current_page + "'");

    if (action.kind == ActionKind::type_text) {
        if (target->etype != ElementType::input)
            throw ExecutionError("typing into non-input element " + std::to_string(action.target) +
                                 " on '" + state.current_page + "'");
        next.typed_values[state.current_page][action.target] = action.text;
    }

    auto kind = action.kind == ActionKind::click ? ActionKind::click : ActionKind::type_text;
    auto tr = page.transitions.find({action.target, kind});
    if (tr != page.transitions.end()) next.current_page = tr->second;
    return next;
}

bool goal_reached(const Scenario& scenario, const EnvState& state) {
    const GoalPredicate& goal = scenario.goal;
    if (goal.kind == GoalPredicate::Kind::reach_screen)
        return state.current_page == goal.screen_id;

    // typed_value: the configured element on the configured page holds the text.
    auto page_typed = state.typed_values.find(goal.screen_id);
    if (page_typed != state.typed_values.end()) {
        auto it = page_typed->second.find(goal.element);
        if (it != page_typed->second.end()) return it->second == goal.equals;
    }
    const SimPage& page = page_at(scenario, goal.screen_id);
    auto it = page.screen.typed_values.find(goal.element);
    return it != page.screen.typed_values.end() && it->second == goal.equals;
}

void validate(const Scenario& scenario) {
    if (scenario.scenario_id.empty()) throw ScenarioError("scenario_id is empty");
    if (scenario.instruction.empty())
        throw ScenarioError("scenario '" + scenario.scenario_id + "' has empty instruction");
    if (scenario.expert_steps < 1)
        throw ScenarioError("scenario '" + scenario.scenario_id + "' needs expert_steps >= 1");
    if (scenario.pages.empty())
        throw ScenarioError("scenario '" + scenario.scenario_id + "' has no pages");
    if (!scenario.pages.count(scenario.start))
        throw ScenarioError("scenario '" + scenario.scenario_id + "' start page '" +
                            scenario.start + "' does not exist");

    for (const auto& [id, page] : scenario.pages) {
        if (page.screen.screen_id != id)
            throw ScenarioError("page '" + id + "' screen_id mismatch ('" + page.screen.screen_id + "')");
        try {
            validate(page.screen);
        } catch (const ValidationError& e) {
            throw ScenarioError(std::string("scenario '") + scenario.scenario_id + "': " + e.what());
        }
        // Combined (visible + hidden) indices must stay contiguous, visible first,
        // so every reveal step still yields a valid Screen.
        const int n_visible = static_cast<int>(page.screen.elements.size());
        int expect = n_visible;
        for (const auto& h : page.hidden_elements) {
            if (h.index != expect)
                throw ScenarioError("page '" + id + "' hidden element index " +
                                    std::to_string(h.index) + " breaks contiguity (expected " +
                                    std::to_string(expect) + ")");
            if (!h.bbox.well_formed() || h.bbox.x_min < 0 || h.bbox.y_min < 0 ||
                h.bbox.x_max > page.screen.width || h.bbox.y_max > page.screen.height)
                throw ScenarioError("page '" + id + "' hidden element " + std::to_string(h.index) +
                                    " has a bad bbox");
            ++expect;
        }
        const int combined = expect;
        for (const auto& [key, target] : page.transitions) {
            if (key.first < 0 || key.first >= combined)
                throw ScenarioError("page '" + id + "' transition references missing element " +
                                    std::to_string(key.first));
            if (key.second == ActionKind::scroll)
                throw ScenarioError("page '" + id + "' transition on scroll is not allowed");
            if (!scenario.pages.count(target))
                throw ScenarioError("page '" + id + "' transition targets missing page '" + target + "'");
        }
    }

    const GoalPredicate& goal = scenario.goal;
    if (!scenario.pages.count(goal.screen_id))
        throw ScenarioError("scenario '" + scenario.scenario_id + "' goal references missing page '" +
                            goal.screen_id + "'");
    if (goal.kind == GoalPredicate::Kind::typed_value) {
        const SimPage& page = scenario.pages.at(goal.screen_id);
        const UiElement* e = page.screen.element_at(goal.element);
        bool hidden = std::any_of(page.hidden_elements.begin(), page.hidden_elements.end(),
                                  [&](const UiElement& h) { return h.index == goal.element; });
        if (!e && !hidden)
            throw ScenarioError("scenario '" + scenario.scenario_id +
                                "' goal references missing element " + std::to_string(goal.element));
        if (e && e->etype != ElementType::input)
            throw ScenarioError("scenario '" + scenario.scenario_id +
                                "' typed-value goal must target an input element");
    }

    for (const auto& [key, plan] : scenario.scripted_plans) {
        if (key.first < 0)
            throw ScenarioError("scripted plan with negative step index");
        if (plan.kind == ScriptedPlan::Kind::command && plan.text.empty())
            throw ScenarioError("scripted plan at step " + std::to_string(key.first) +
                                " has an empty command");
    }
}

namespace {

UiElement element_from_json(const Json& je) {
    UiElement e;
    e.index = je.at("index").get<int>();
    e.text = je.at("text").get<std::string>();
    const auto& bb = je.at("bbox");
    if (!bb.is_array() || bb.size() != 4) throw ScenarioError("element bbox must be a 4-int array");
    e.bbox = {bb[0].get<int>(), bb[1].get<int>(), bb[2].get<int>(), bb[3].get<int>()};
    e.etype = element_type_from_string(je.at("type").get<std::string>());
    return e;
}

ActionKind action_kind_from_string(const std::string& s) {
    if (s == "click") return ActionKind::click;
    if (s == "type") return ActionKind::type_text;
    throw ScenarioError("unknown transition action '" + s + "'");
}

}  // namespace

Scenario scenario_from_json(const Json& j) {
    Scenario scenario;
    try {
        scenario.scenario_id = j.at("scenario_id").get<std::string>();
        scenario.case_no = j.value("case", 0);
        scenario.instruction = j.at("instruction").get<std::string>();
        scenario.expert_steps = j.at("expert_steps").get<int>();
        scenario.start = j.at("start").get<std::string>();

        const auto& jg = j.at("goal");
        const std::string goal_kind = jg.at("kind").get<std::string>();
        if (goal_kind == "reach_screen") {
            scenario.goal.kind = GoalPredicate::Kind::reach_screen;
            scenario.goal.screen_id = jg.at("screen_id").get<std::string>();
        } else if (goal_kind == "typed_value") {
            scenario.goal.kind = GoalPredicate::Kind::typed_value;
            scenario.goal.screen_id = jg.at("screen_id").get<std::string>();
            scenario.goal.element = jg.at("element").get<int>();
            scenario.goal.equals = jg.at("equals").get<std::string>();
        } else {
            throw ScenarioError("unknown goal kind '" + goal_kind + "'");
        }

        for (const auto& [page_id, jp] : j.at("pages").items()) {
            SimPage page;
            page.screen.screen_id = page_id;
            page.screen.width = jp.at("width").get<int>();
            page.screen.height = jp.at("height").get<int>();
            for (const auto& je : jp.at("elements"))
                page.screen.elements.push_back(element_from_json(je));
            if (jp.contains("hidden_elements"))
                for (const auto& je : jp.at("hidden_elements"))
                    page.hidden_elements.push_back(element_from_json(je));
            if (jp.contains("typed_values"))
                for (const auto& [key, value] : jp.at("typed_values").items())
                    page.screen.typed_values[std::stoi(key)] = value.get<std::string>();
            if (jp.contains("transitions"))
                for (const auto& jt : jp.at("transitions")) {
                    int element = jt.at("element").get<int>();
                    ActionKind kind = action_kind_from_string(jt.at("action").get<std::string>());
                    std::string target = jt.at("target").get<std::string>();
                    auto key = std::make_pair(element, kind);
                    if (page.transitions.count(key))
                        throw ScenarioError("page '" + page_id + "' has duplicate transition for element " +
                                            std::to_string(element));
                    page.transitions[key] = std::move(target);
                }
            scenario.pages.emplace(page_id, std::move(page));
        }

        if (j.contains("scripted_plans"))
            for (const auto& jp : j.at("scripted_plans")) {
                int step = jp.at("step").get<int>();
                FeedbackKind feedback = feedback_kind_from_string(jp.at("feedback").get<std::string>());
                ScriptedPlan plan;
                if (jp.contains("done") && jp.at("done").get<bool>()) {
                    plan.kind = ScriptedPlan::Kind::done;
                } else if (jp.contains("give_up")) {
                    plan.kind = ScriptedPlan::Kind::give_up;
                    plan.text = jp.at("give_up").get<std::string>();
                } else {
                    plan.kind = ScriptedPlan::Kind::command;
                    plan.text = jp.at("command").get<std::string>();
                }
                auto key = std::make_pair(step, feedback);
                if (scenario.scripted_plans.count(key))
                    throw ScenarioError("duplicate scripted plan for step " + std::to_string(step) +
                                        " feedback " + to_string(feedback));
                scenario.scripted_plans[key] = std::move(plan);
            }
    } catch (const Json::exception& e) {
        throw ScenarioError(std::string("bad scenario JSON: ") + e.what());
    }

    validate(scenario);
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open scenario file '" + path + "'");
    Json j;
    try {
        j = Json::parse(in);
    } catch (const Json::exception& e) {
        throw ScenarioError("scenario '" + path + "' is not valid JSON: " + e.what());
    }
    return scenario_from_json(j);
}

std::vector<Scenario> load_scenario_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ScenarioError("scenario directory '" + dir + "' not found");
    std::vector<Scenario> scenarios;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) scenarios.push_back(load_scenario(f.string()));
    std::sort(scenarios.begin(), scenarios.end(), [](const Scenario& a, const Scenario& b) {
        return std::tie(a.case_no, a.scenario_id) < std::tie(b.case_no, b.scenario_id);
    });
    return scenarios;
}

}  // namespace taskguard
