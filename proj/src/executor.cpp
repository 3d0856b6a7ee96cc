#include "taskguard/executor.hpp"

#include <algorithm>
#include <limits>

#include <httplib.h>

#include "taskguard/codec.hpp"
#include "taskguard/errors.hpp"

namespace taskguard {

Grounding ground(const CommandIntent& intent, const Screen& screen) {
    switch (intent.verb) {
        case Verb::select: {
            const UiElement* e = find_by_caption(screen, intent.caption);
            if (!e)
                throw GroundingError(GroundingErrorKind::caption_not_found,
                                     "no element captioned '" + intent.caption + "' on screen '" +
                                         screen.screen_id + "'");
            return {e->index, e->bbox, Action::click(e->index)};
        }
        case Verb::click_right_of: {
            const UiElement* anchor = find_by_caption(screen, intent.caption);
            if (!anchor)
                throw GroundingError(GroundingErrorKind::caption_not_found,
                                     "no anchor captioned '" + intent.caption + "' on screen '" +
                                         screen.screen_id + "'");
            const UiElement* best = nullptr;
            double best_dx = std::numeric_limits<double>::infinity();
            for (const auto& e : screen.elements) {
                if (e.index == anchor->index) continue;
                double dx = e.bbox.center_x() - anchor->bbox.center_x();
                if (dx <= 0) continue;
                if (vertical_overlap(e.bbox, anchor->bbox) < 1) continue;
                if (dx < best_dx || (dx == best_dx && best && e.index < best->index)) {
                    best = &e;
                    best_dx = dx;
                }
            }
            if (!best)
                throw GroundingError(GroundingErrorKind::no_element_right_of,
                                     "nothing to the right of '" + intent.caption + "' on screen '" +
                                         screen.screen_id + "'");
            return {best->index, best->bbox, Action::click(best->index)};
        }
        case Verb::enter: {
            const UiElement* e = find_by_caption(screen, intent.caption);
            if (!e)
                throw GroundingError(GroundingErrorKind::caption_not_found,
                                     "no element captioned '" + intent.caption + "' on screen '" +
                                         screen.screen_id + "'");
            if (e->etype != ElementType::input)
                throw GroundingError(GroundingErrorKind::target_not_input,
                                     "element '" + intent.caption + "' is not an input");
            return {e->index, e->bbox, Action::type(e->index, intent.words)};
        }
        case Verb::scroll_until: {
            const UiElement* e = find_by_caption(screen, intent.caption);
            if (!e)
                throw GroundingError(GroundingErrorKind::caption_not_found,
                                     "caption '" + intent.caption + "' is not visible on screen '" +
                                         screen.screen_id + "'");
            return {e->index, e->bbox, Action::scroll(ScrollDirection::down)};
        }
    }
    throw GroundingError(GroundingErrorKind::caption_not_found, "bad verb");
}

namespace {

ExecutionOutcome blind_click(const Scenario& scenario, const EnvState& state,
                             const Screen& screen, const std::string& why) {
    ExecutionOutcome out;
    out.state = state;
    if (screen.elements.empty()) {
        out.note = why + "; blind fallback impossible on an empty screen";
        return out;
    }
    const UiElement* lowest = nullptr;
    for (const auto& e : screen.elements)
        if (!lowest || e.index < lowest->index) lowest = &e;
    out.executed = true;
    out.blind_fallback = true;
    out.grounded_element = lowest->index;
    out.predicted_bbox = lowest->bbox;
    out.state = apply(scenario, state, Action::click(lowest->index));
    out.state_changed = !(out.state == state);
    out.note = why + "; blind fallback clicked element " + std::to_string(lowest->index);
    return out;
}

}  // namespace

ExecutionOutcome execute(const Scenario& scenario, const EnvState& state,
                         const std::string& command, const ExecuteOptions& options) {
    const Screen screen = visible_screen(scenario, state);

    CommandIntent intent;
    try {
        intent = parse_command(command);
    } catch (const CommandParseError& e) {
        if (options.blind_mode) return blind_click(scenario, state, screen, e.what());
        ExecutionOutcome out;
        out.state = state;
        out.note = e.what();
        return out;
    }

    if (intent.verb == Verb::scroll_until) {
        ExecutionOutcome out;
        out.state = state;
        if (caption_present(screen, intent.caption)) {
            out.executed = true;
            Grounding g = ground(intent, screen);
            out.grounded_element = g.element_index;
            out.predicted_bbox = g.element_bbox;
            out.note = "caption already visible";
            return out;
        }
        EnvState probe = state;
        for (int i = 1; i <= options.scroll_cap; ++i) {
            probe = apply(scenario, probe, Action::scroll(ScrollDirection::down));
            Screen now = visible_screen(scenario, probe);
            if (caption_present(now, intent.caption)) {
                out.executed = true;
                out.state = probe;
                out.state_changed = !(probe == state);
                out.scrolls = i;
                const UiElement* e = find_by_caption(now, intent.caption);
                if (e) {
                    out.grounded_element = e->index;
                    out.predicted_bbox = e->bbox;
                } else {
                    // ambiguous after reveal: report the first match
                    for (const auto& el : now.elements)
                        if (normalize_caption(el.text) == normalize_caption(intent.caption)) {
                            out.grounded_element = el.index;
                            out.predicted_bbox = el.bbox;
                            break;
                        }
                }
                return out;
            }
        }
        // Cap exceeded: the probe scrolls are discarded, state comes back unchanged.
        if (options.blind_mode)
            return blind_click(scenario, state, screen,
                               "scroll cap reached without finding '" + intent.caption + "'");
        out.note = "scroll cap (" + std::to_string(options.scroll_cap) +
                   ") reached without finding '" + intent.caption + "'";
        return out;
    }

    Grounding grounding;
    try {
        grounding = ground(intent, screen);
    } catch (const GroundingError& e) {
        if (options.blind_mode) return blind_click(scenario, state, screen, e.what());
        ExecutionOutcome out;
        out.state = state;
        out.note = e.what();
        return out;
    }

    ExecutionOutcome out;
    out.executed = true;
    out.grounded_element = grounding.element_index;
    out.predicted_bbox = grounding.element_bbox;
    out.state = apply(scenario, state, grounding.action);
    out.state_changed = !(out.state == state);
    if (!out.state_changed && grounding.action.kind == ActionKind::click)
        out.note = "dead click: element " + std::to_string(grounding.element_index) +
                   " has no effect";
    return out;
}

ExternalLocator::ExternalLocator(std::string base_url) : base_url_(std::move(base_url)) {}

LocateResult ExternalLocator::locate(const Screen& screen, const std::string& command) const {
    Json payload;
    payload["screen"] = screen_to_json(screen);
    payload["command"] = command;

    httplib::Client client(base_url_);
    client.set_read_timeout(10, 0);
    auto res = client.Post("/locate", payload.dump(), "application/json");
    if (!res)
        throw GuardUnavailableError("locate adapter unreachable at " + base_url_);
    if (res->status != 200)
        throw GuardUnavailableError("locate adapter returned HTTP " + std::to_string(res->status));

    StructuredResult parsed = parse(res->body);  // CodecError propagates: reply is malformed
    if (parsed.kind != ResultKind::locate)
        throw CodecError(CodecErrorKind::unknown_tag, "locate adapter replied with a non-locate tag");

    LocateResult best;
    best.returned_bbox = parsed.bbox;
    for (const auto& e : screen.elements) {
        double v = iou(e.bbox, parsed.bbox);
        if (v > best.iou || (v == best.iou && best.element_index >= 0 && v > 0.0 &&
                             e.index < best.element_index)) {
            best.iou = v;
            best.element_index = e.index;
        }
    }
    if (best.element_index < 0 || best.iou <= 0.0)
        throw GroundingError(GroundingErrorKind::caption_not_found,
                             "locate bbox overlaps no element on screen '" + screen.screen_id + "'");
    return best;
}

}  // namespace taskguard
