#pragma once

#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "taskguard/errors.hpp"
#include "taskguard/screen.hpp"
#include "taskguard/sim.hpp"

namespace taskguard {

class PlaceholderMemory;

// ---------------------------------------------------------------------------
// Chat requests

enum class ChatRole { user, assistant };

struct ChatTurn {
    ChatRole role = ChatRole::user;
    std::string content;
};

struct ChatRequest {
    std::string system_prompt;
    std::vector<ChatTurn> turns;  // alternate user/assistant, starting with user
    std::string model = "gpt-4";
    int max_tokens = 256;
    double temperature = 0.0;  // reproducibility first
};

void validate(const ChatRequest& request);

// Canonical JSON rendering (also the HTTP body): field order is fixed, so the
// same request always produces the same bytes.
Json chat_request_json(const ChatRequest& request);

// FNV-1a (64-bit) over the canonical JSON, as 16 lowercase hex chars. Keys the
// fixture transport's files.
std::string request_fingerprint(const ChatRequest& request);

// ---------------------------------------------------------------------------
// Transports

class TransportError : public Error {
public:
    TransportError(std::string message, bool retryable)
        : Error(std::move(message)), retryable(retryable) {}
    bool retryable;
};

class Transport {
public:
    virtual ~Transport() = default;
    virtual std::string send(const ChatRequest& request) = 0;
};

// Replays recorded completions from <dir>/<fingerprint>.txt. A missing file is
// a non-retryable error that names the fingerprint, so recording a new fixture
// is a matter of creating that file.
class FixtureTransport : public Transport {
public:
    explicit FixtureTransport(std::filesystem::path dir);
    std::string send(const ChatRequest& request) override;

private:
    std::filesystem::path dir_;
};

// Live chat-completion endpoint. URL and API key come from the environment
// (TASKGUARD_LLM_URL, TASKGUARD_LLM_API_KEY) unless given explicitly.
class HttpTransport : public Transport {
public:
    HttpTransport();  // reads the environment
    HttpTransport(std::string base_url, std::string path, std::string api_key);
    std::string send(const ChatRequest& request) override;

private:
    std::string base_url_;
    std::string path_;
    std::string api_key_;
};

// Test double: hands out scripted replies in order and keeps every request it
// saw. An exhausted script is a non-retryable failure.
class ScriptedTransport : public Transport {
public:
    void push_reply(std::string reply) { replies_.push_back(std::move(reply)); }
    std::string send(const ChatRequest& request) override;
    const std::vector<ChatRequest>& requests() const { return requests_; }

private:
    std::deque<std::string> replies_;
    std::vector<ChatRequest> requests_;
};

// ---------------------------------------------------------------------------
// Client

struct RetryPolicy {
    int attempts = 3;
    std::chrono::milliseconds base_backoff{1000};  // doubles per retry
    int backoff_factor = 2;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

class LlmClient {
public:
    // memory may be null (nothing to guard). The sleeper is injectable so
    // retry/backoff behavior is testable without wall-clock waits.
    LlmClient(Transport& transport, const PlaceholderMemory* memory = nullptr,
              RetryPolicy retry = {}, Sleeper sleeper = {},
              std::chrono::milliseconds min_request_interval = std::chrono::milliseconds{0});

    // Validates, runs the outbound privacy filter over the exact bytes that
    // would leave the process, then sends with bounded retries on retryable
    // transport failures. Exhausted retries rethrow the last TransportError.
    std::string complete(const ChatRequest& request);

private:
    Transport* transport_;
    const PlaceholderMemory* memory_;
    RetryPolicy retry_;
    Sleeper sleeper_;
    std::chrono::milliseconds min_interval_;
    bool sent_anything_ = false;
};

// ---------------------------------------------------------------------------
// Prompt assembly
//
// The figures describing the original prompts are not recoverable, so these
// templates follow the prose contract instead: system prompt stating goal and
// output format, at least two in-context demonstrations, then the live query.
// Inputs must already be sanitized by the caller; builders are pure.

ChatRequest build_feasibility_request(const std::string& screen_text, const std::string& command,
                                      const std::string& model);

// before_text is optional: "after-only" verification passes nullopt and the
// prompt carries no before-screen section at all.
ChatRequest build_completeness_request(const std::optional<std::string>& before_text,
                                       const std::string& command, const std::string& after_text,
                                       const std::string& model);

// The screen goes into the prompt only when replanning (feedback != none);
// first-attempt planning is screen-blind by design. Passing a screen with
// feedback == none (or no screen with feedback != none) throws.
ChatRequest build_planner_request(const std::string& instruction,
                                  const std::vector<std::string>& executed_commands,
                                  FeedbackKind feedback, const std::string& feedback_detail,
                                  const std::optional<std::string>& screen_text,
                                  const std::string& model);

}  // namespace taskguard
