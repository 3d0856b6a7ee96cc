#include "taskguard/guards.hpp"

#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "taskguard/codec.hpp"
#include "taskguard/command.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/executor.hpp"
#include "taskguard/llm.hpp"
#include "taskguard/privacy.hpp"

namespace taskguard {

namespace {

constexpr double kSoftNegative = 0.02;  // hard model labels, softened so that
constexpr double kSoftPositive = 0.98;  // ranked-score metrics stay defined

GuardVerdict oracle_yes(std::string why) {
    return GuardVerdict::make(true, 1.0, GuardBackend::oracle, std::move(why));
}

GuardVerdict oracle_no(std::string why) {
    return GuardVerdict::make(false, 0.0, GuardBackend::oracle, std::move(why));
}

}  // namespace

std::string outbound_text(const std::string& text, const PlaceholderMemory* memory,
                          PrivacyMode privacy) {
    if (!memory || privacy == PrivacyMode::block) return text;
    return sanitize_outbound(text, *memory);
}

Screen outbound_screen(Screen screen, const PlaceholderMemory* memory, PrivacyMode privacy) {
    if (!memory || privacy == PrivacyMode::block) return screen;
    for (auto& e : screen.elements) e.text = sanitize_outbound(e.text, *memory);
    for (auto& [index, value] : screen.typed_values) value = sanitize_outbound(value, *memory);
    return screen;
}

const char* to_string(GuardBackend backend) {
    switch (backend) {
        case GuardBackend::oracle: return "oracle";
        case GuardBackend::llm: return "llm";
        case GuardBackend::adapter: return "adapter";
    }
    return "oracle";
}

GuardVerdict GuardVerdict::make(bool positive, double score, GuardBackend backend,
                                std::string rationale) {
    if (score < 0.0 || score > 1.0) throw ValidationError("guard score outside [0,1]");
    if ((score >= 0.5) != positive)
        throw ValidationError("guard score disagrees with its label");
    if (backend == GuardBackend::oracle && score != 0.0 && score != 1.0)
        throw ValidationError("oracle verdicts must score exactly 0 or 1");
    GuardVerdict v;
    v.positive = positive;
    v.score = score;
    v.backend = backend;
    v.rationale = std::move(rationale);
    return v;
}

// ---------------------------------------------------------------------------
// Exact backends

GuardVerdict OracleFeasibilityGuard::assess(const Screen& screen, const std::string& command) {
    CommandIntent intent;
    try {
        intent = parse_command(command);
    } catch (const CommandParseError& e) {
        return oracle_no(e.what());
    }
    try {
        Grounding g = ground(intent, screen);
        return oracle_yes("grounds to element " + std::to_string(g.element_index));
    } catch (const GroundingError& e) {
        return oracle_no(e.what());
    }
}

OracleCompletenessGuard::OracleCompletenessGuard(const Scenario& scenario) { index(scenario); }

OracleCompletenessGuard::OracleCompletenessGuard(const std::vector<Scenario>& scenarios) {
    for (const Scenario& s : scenarios) index(s);
}

void OracleCompletenessGuard::index(const Scenario& scenario) {
    for (const auto& [id, page] : scenario.pages) {
        auto [it, inserted] = pages_.emplace(id, page);
        if (!inserted)
            throw ScenarioError("page id '" + id +
                                "' appears in more than one scenario; ids must be unique for "
                                "the exact verifier to resolve them");
    }
}

GuardVerdict OracleCompletenessGuard::assess(const CompletenessQuery& query) {
    if (!query.before)
        throw ValidationError("the exact verifier grounds on the pre-execution screen and "
                              "cannot run in after-only mode");

    CommandIntent intent;
    try {
        intent = parse_command(query.command);
    } catch (const CommandParseError& e) {
        return oracle_no(std::string("command never parsed: ") + e.what());
    }

    auto found = pages_.find(query.before->screen_id);
    if (found == pages_.end())
        throw GuardUnavailableError("screen '" + query.before->screen_id +
                                    "' is not covered by the loaded scenarios");
    const SimPage& page = found->second;

    if (intent.verb == Verb::scroll_until) {
        if (query.after.screen_id != query.before->screen_id)
            return oracle_no("scrolling cannot leave the page, yet the screen changed");
        if (caption_present(query.after, intent.caption))
            return oracle_yes("'" + intent.caption + "' is visible now");
        return oracle_no("'" + intent.caption + "' still is not visible");
    }

    Grounding grounding;
    try {
        grounding = ground(intent, *query.before);
    } catch (const GroundingError& e) {
        return oracle_no(std::string("command never grounded: ") + e.what());
    }
    const int idx = grounding.element_index;

    if (intent.verb == Verb::enter) {
        auto tr = page.transitions.find({idx, ActionKind::type_text});
        if (tr != page.transitions.end()) {
            if (query.after.screen_id == tr->second)
                return oracle_yes("typing navigated to '" + tr->second + "'");
            return oracle_no("typing should navigate to '" + tr->second + "' but the screen is '" +
                             query.after.screen_id + "'");
        }
        if (query.after.screen_id != query.before->screen_id)
            return oracle_no("typing into element " + std::to_string(idx) +
                             " does not navigate, yet the screen changed");
        auto typed = query.after.typed_values.find(idx);
        if (typed != query.after.typed_values.end() && typed->second == intent.words)
            return oracle_yes("element " + std::to_string(idx) + " now holds the text");
        return oracle_no("element " + std::to_string(idx) + " does not hold the entered text");
    }

    // select / click_right_of
    auto tr = page.transitions.find({idx, ActionKind::click});
    if (tr == page.transitions.end())
        return oracle_no("clicking element " + std::to_string(idx) + " on '" +
                         query.before->screen_id + "' changes nothing");
    if (query.after.screen_id == tr->second)
        return oracle_yes("click reached '" + tr->second + "'");
    return oracle_no("click should reach '" + tr->second + "' but the screen is '" +
                     query.after.screen_id + "'");
}

// ---------------------------------------------------------------------------
// Reply extraction

std::optional<bool> extract_verdict_bit(const std::string& reply) {
    // A structured tag anywhere in the reply wins.
    for (const char* tag : {"s_feasibility", "s_completeness"}) {
        const std::string open = std::string("<") + tag + ">";
        const std::string close = std::string("</") + tag + ">";
        std::size_t from = reply.find(open);
        if (from == std::string::npos) continue;
        std::size_t to = reply.find(close, from);
        if (to == std::string::npos) continue;
        try {
            StructuredResult parsed = parse(reply.substr(from, to + close.size() - from));
            return parsed.bit == 1;
        } catch (const CodecError&) {
            break;  // malformed tag; fall back to keyword scanning
        }
    }

    // First standalone keyword decides. Tokens are [A-Za-z0-9_]+ runs, so
    // "infeasible" never matches "feasible" and tag names stay whole.
    std::size_t i = 0;
    while (i < reply.size()) {
        if (!std::isalnum(static_cast<unsigned char>(reply[i])) && reply[i] != '_') {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < reply.size() &&
               (std::isalnum(static_cast<unsigned char>(reply[j])) || reply[j] == '_'))
            ++j;
        std::string token = reply.substr(i, j - i);
        std::transform(token.begin(), token.end(), token.begin(),
                       [](unsigned char c) { return std::tolower(c); });
        if (token == "feasible" || token == "complete" || token == "1") return true;
        if (token == "infeasible" || token == "incomplete" || token == "0") return false;
        i = j;
    }
    return std::nullopt;
}

namespace {

GuardVerdict soft_verdict(bool positive, GuardBackend backend, std::string rationale) {
    return GuardVerdict::make(positive, positive ? kSoftPositive : kSoftNegative, backend,
                              std::move(rationale));
}

GuardVerdict verdict_from_reply(const std::string& reply, GuardBackend backend) {
    if (auto bit = extract_verdict_bit(reply))
        return soft_verdict(*bit, backend, "reply: " + reply);
    // Unreadable reply: the safe reading is "not shown to hold".
    return soft_verdict(false, backend, "unreadable reply treated as negative: " + reply);
}

}  // namespace

// ---------------------------------------------------------------------------
// Prompt-engineering backends

LlmFeasibilityGuard::LlmFeasibilityGuard(LlmClient& client, std::string model,
                                         const PlaceholderMemory* memory, PrivacyMode privacy)
    : client_(&client), model_(std::move(model)), memory_(memory), privacy_(privacy) {}

GuardVerdict LlmFeasibilityGuard::assess(const Screen& screen, const std::string& command) {
    const std::string screen_text =
        serialize_screen(outbound_screen(screen, memory_, privacy_));
    const std::string command_text = outbound_text(command, memory_, privacy_);
    ChatRequest request = build_feasibility_request(screen_text, command_text, model_);
    try {
        return verdict_from_reply(client_->complete(request), GuardBackend::llm);
    } catch (const TransportError& e) {
        throw GuardUnavailableError(std::string("feasibility model unavailable: ") + e.what());
    }
}

LlmCompletenessGuard::LlmCompletenessGuard(LlmClient& client, std::string model, bool after_only,
                                           const PlaceholderMemory* memory, PrivacyMode privacy)
    : client_(&client),
      model_(std::move(model)),
      after_only_(after_only),
      memory_(memory),
      privacy_(privacy) {}

GuardVerdict LlmCompletenessGuard::assess(const CompletenessQuery& query) {
    std::optional<std::string> before_text;
    if (!after_only_ && query.before)
        before_text = serialize_screen(outbound_screen(*query.before, memory_, privacy_));
    const std::string after_text =
        serialize_screen(outbound_screen(query.after, memory_, privacy_));
    const std::string command_text = outbound_text(query.command, memory_, privacy_);
    ChatRequest request =
        build_completeness_request(before_text, command_text, after_text, model_);
    try {
        return verdict_from_reply(client_->complete(request), GuardBackend::llm);
    } catch (const TransportError& e) {
        throw GuardUnavailableError(std::string("completeness model unavailable: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Adapter backends

namespace {

std::string post_adapter(const std::string& base_url, const std::string& path,
                         const Json& payload, const PlaceholderMemory* memory) {
    const std::string body = payload.dump();
    if (memory) assert_no_leak(body, *memory);

    httplib::Client client(base_url);
    client.set_read_timeout(10, 0);
    auto res = client.Post(path, body, "application/json");
    if (!res) throw GuardUnavailableError("adapter unreachable at " + base_url + path);
    if (res->status != 200)
        throw GuardUnavailableError("adapter " + path + " returned HTTP " +
                                    std::to_string(res->status));
    return res->body;
}

GuardVerdict adapter_verdict(const std::string& body, ResultKind expected) {
    StructuredResult parsed;
    try {
        parsed = parse(body);
    } catch (const CodecError& e) {
        throw GuardUnavailableError(std::string("adapter reply is not in the wire grammar: ") +
                                    e.what());
    }
    if (parsed.kind != expected)
        throw GuardUnavailableError(std::string("adapter replied with a ") +
                                    to_string(parsed.kind) + " result instead of " +
                                    to_string(expected));
    return soft_verdict(parsed.bit == 1, GuardBackend::adapter, "reply: " + body);
}

}  // namespace

AdapterFeasibilityGuard::AdapterFeasibilityGuard(std::string base_url,
                                                 const PlaceholderMemory* memory,
                                                 PrivacyMode privacy)
    : base_url_(std::move(base_url)), memory_(memory), privacy_(privacy) {}

GuardVerdict AdapterFeasibilityGuard::assess(const Screen& screen, const std::string& command) {
    Json payload;
    payload["screen"] = screen_to_json(outbound_screen(screen, memory_, privacy_));
    payload["command"] = outbound_text(command, memory_, privacy_);
    const std::string body = post_adapter(base_url_, "/feasibility", payload, memory_);
    return adapter_verdict(body, ResultKind::feasibility);
}

AdapterCompletenessGuard::AdapterCompletenessGuard(std::string base_url,
                                                   const PlaceholderMemory* memory,
                                                   PrivacyMode privacy)
    : base_url_(std::move(base_url)), memory_(memory), privacy_(privacy) {}

GuardVerdict AdapterCompletenessGuard::assess(const CompletenessQuery& query) {
    Json payload;
    if (query.before)
        payload["before"] = screen_to_json(outbound_screen(*query.before, memory_, privacy_));
    payload["command"] = outbound_text(query.command, memory_, privacy_);
    payload["after"] = screen_to_json(outbound_screen(query.after, memory_, privacy_));
    const std::string body = post_adapter(base_url_, "/completeness", payload, memory_);
    return adapter_verdict(body, ResultKind::completeness);
}

}  // namespace taskguard
