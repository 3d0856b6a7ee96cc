#pragma once

#include <optional>
#include <string>

#include "taskguard/command.hpp"
#include "taskguard/sim.hpp"

namespace taskguard {

// Resolution of an intent against a concrete screen: which element, and the
// ready-to-apply action. Throws GroundingError (caption_not_found /
// ambiguous_caption / no_element_right_of / target_not_input).
struct Grounding {
    int element_index = -1;
    BBox element_bbox;
    Action action;
};

// click_right_of picks the candidate with the smallest positive horizontal
// center offset among elements sharing at least one pixel of vertical bbox
// overlap with the anchor; ties go to the smaller index.
Grounding ground(const CommandIntent& intent, const Screen& screen);

struct ExecuteOptions {
    bool blind_mode = false;  // parse/grounding failures fall back to a dead
                              // click on the lowest-index visible element
    int scroll_cap = 20;      // scroll_until probe bound
};

struct ExecutionOutcome {
    bool executed = false;
    EnvState state;  // resulting state; equals the input state when !executed
    std::optional<int> grounded_element;  // set iff executed
    std::optional<BBox> predicted_bbox;   // set iff executed
    int scrolls = 0;
    bool blind_fallback = false;
    bool state_changed = false;
    std::string note;  // failure reason, or "dead click" style annotations
};

// Runs one command against the environment. Never throws for ordinary
// command-level failures (unparseable text, missing captions, scroll cap
// exceeded) — those come back as executed=false with the input state, or as a
// blind fallback click when enabled. Scenario-level problems (missing pages)
// still raise.
ExecutionOutcome execute(const Scenario& scenario, const EnvState& state,
                         const std::string& command, const ExecuteOptions& options = {});

// External-executor adapter: POSTs {"screen": ..., "command": ...} to
// <base_url>/locate, expects a <locate_element> reply, and maps the returned
// bbox to the visible element with maximal IoU (ties to the smaller index).
struct LocateResult {
    int element_index = -1;
    BBox returned_bbox;
    double iou = 0.0;
};

class ExternalLocator {
public:
    explicit ExternalLocator(std::string base_url);
    LocateResult locate(const Screen& screen, const std::string& command) const;

private:
    std::string base_url_;
};

}  // namespace taskguard
