#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taskguard/screen.hpp"
#include "taskguard/sim.hpp"

namespace taskguard {

class LlmClient;
class PlaceholderMemory;

// Whether outbound payloads rewrite secrets into their {name} placeholders
// (default) or refuse to leave the process at all while a secret is present.
enum class PrivacyMode { placeholder, block };

enum class GuardBackend { oracle, llm, adapter };

const char* to_string(GuardBackend backend);

struct GuardVerdict {
    bool positive = false;
    double score = 0.0;  // >= 0.5 exactly when positive
    GuardBackend backend = GuardBackend::oracle;
    std::string rationale;

    // Enforces the score/label coupling; oracle scores must be exactly 0 or 1.
    static GuardVerdict make(bool positive, double score, GuardBackend backend,
                             std::string rationale = "");
};

// Outbound hygiene shared by every component that sends text or screens off
// the process: placeholder mode rewrites memory values into their {name} form,
// block mode passes text through untouched so the hard filter can refuse the
// payload outright. A null memory means there is nothing to protect.
std::string outbound_text(const std::string& text, const PlaceholderMemory* memory,
                          PrivacyMode privacy);
Screen outbound_screen(Screen screen, const PlaceholderMemory* memory, PrivacyMode privacy);

// ---------------------------------------------------------------------------
// Interfaces

class FeasibilityGuard {
public:
    virtual ~FeasibilityGuard() = default;
    // Can `command` be carried out on `screen` right now? Backend outages
    // surface as GuardUnavailableError; the caller's failure policy decides.
    virtual GuardVerdict assess(const Screen& screen, const std::string& command) = 0;
};

struct CompletenessQuery {
    std::optional<Screen> before;  // absent in after-only verification
    std::string command;
    Screen after;
};

class CompletenessGuard {
public:
    virtual ~CompletenessGuard() = default;
    virtual GuardVerdict assess(const CompletenessQuery& query) = 0;
};

// ---------------------------------------------------------------------------
// Exact backends (simulator ground truth)

// Feasible = the command parses and grounds on the given screen. Needs nothing
// beyond the screen itself.
class OracleFeasibilityGuard : public FeasibilityGuard {
public:
    GuardVerdict assess(const Screen& screen, const std::string& command) override;
};

// Complete = the transition the command intended actually happened. Judging
// that needs the transition relation, so this guard indexes the pages of the
// scenarios it is given (page ids must not collide across scenarios).
class OracleCompletenessGuard : public CompletenessGuard {
public:
    explicit OracleCompletenessGuard(const Scenario& scenario);
    explicit OracleCompletenessGuard(const std::vector<Scenario>& scenarios);

    // Requires query.before (grounding happens there). An unknown before
    // screen id is a wiring problem -> GuardUnavailableError.
    GuardVerdict assess(const CompletenessQuery& query) override;

private:
    void index(const Scenario& scenario);
    std::map<std::string, SimPage> pages_;
};

// ---------------------------------------------------------------------------
// Prompt-engineering backends

// Pulls a 0/1 verdict out of a model reply: a structured tag if one is
// present, else the first standalone keyword among feasible / infeasible /
// complete / incomplete / 0 / 1 (case-insensitive). nullopt when neither is
// found. Exposed for direct testing.
std::optional<bool> extract_verdict_bit(const std::string& reply);

class LlmFeasibilityGuard : public FeasibilityGuard {
public:
    LlmFeasibilityGuard(LlmClient& client, std::string model,
                        const PlaceholderMemory* memory = nullptr,
                        PrivacyMode privacy = PrivacyMode::placeholder);
    GuardVerdict assess(const Screen& screen, const std::string& command) override;

private:
    LlmClient* client_;
    std::string model_;
    const PlaceholderMemory* memory_;
    PrivacyMode privacy_;
};

class LlmCompletenessGuard : public CompletenessGuard {
public:
    // after_only drops the before screen from the prompt even when the query
    // carries one.
    LlmCompletenessGuard(LlmClient& client, std::string model, bool after_only = false,
                         const PlaceholderMemory* memory = nullptr,
                         PrivacyMode privacy = PrivacyMode::placeholder);
    GuardVerdict assess(const CompletenessQuery& query) override;

private:
    LlmClient* client_;
    std::string model_;
    bool after_only_;
    const PlaceholderMemory* memory_;
    PrivacyMode privacy_;
};

// ---------------------------------------------------------------------------
// External-model adapter backends
//
// POST {screen, command} to <base_url>/feasibility, or {before?, command,
// after} to <base_url>/completeness; the response body must be a structured
// result in the wire grammar (<s_feasibility> / <s_completeness>).

class AdapterFeasibilityGuard : public FeasibilityGuard {
public:
    explicit AdapterFeasibilityGuard(std::string base_url,
                                     const PlaceholderMemory* memory = nullptr,
                                     PrivacyMode privacy = PrivacyMode::placeholder);
    GuardVerdict assess(const Screen& screen, const std::string& command) override;

private:
    std::string base_url_;
    const PlaceholderMemory* memory_;
    PrivacyMode privacy_;
};

class AdapterCompletenessGuard : public CompletenessGuard {
public:
    explicit AdapterCompletenessGuard(std::string base_url,
                                      const PlaceholderMemory* memory = nullptr,
                                      PrivacyMode privacy = PrivacyMode::placeholder);
    GuardVerdict assess(const CompletenessQuery& query) override;

private:
    std::string base_url_;
    const PlaceholderMemory* memory_;
    PrivacyMode privacy_;
};

}  // namespace taskguard
