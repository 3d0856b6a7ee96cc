#include "taskguard/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "taskguard/privacy.hpp"

namespace taskguard {

namespace {

const char* role_name(ChatRole role) { return role == ChatRole::user ? "user" : "assistant"; }

}  // namespace

void validate(const ChatRequest& request) {
    if (request.model.empty()) throw ValidationError("chat request has no model name");
    if (request.max_tokens <= 0) throw ValidationError("max_tokens must be positive");
    if (request.temperature < 0.0 || request.temperature > 2.0)
        throw ValidationError("temperature out of range");
    if (request.turns.empty()) throw ValidationError("chat request has no turns");
    for (std::size_t i = 0; i < request.turns.size(); ++i) {
        ChatRole expected = i % 2 == 0 ? ChatRole::user : ChatRole::assistant;
        if (request.turns[i].role != expected)
            throw ValidationError("chat turns must alternate user/assistant starting with user "
                                  "(turn " +
                                  std::to_string(i) + " breaks the pattern)");
    }
    if (request.turns.back().role != ChatRole::user)
        throw ValidationError("chat request must end on a user turn");
}

Json chat_request_json(const ChatRequest& request) {
    Json doc;
    doc["model"] = request.model;
    doc["temperature"] = request.temperature;
    doc["max_tokens"] = request.max_tokens;
    Json messages = Json::array();
    if (!request.system_prompt.empty())
        messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
    for (const ChatTurn& turn : request.turns)
        messages.push_back({{"role", role_name(turn.role)}, {"content", turn.content}});
    doc["messages"] = std::move(messages);
    return doc;
}

std::string request_fingerprint(const ChatRequest& request) {
    const std::string bytes = chat_request_json(request).dump();
    std::uint64_t hash = 14695981039346656037ULL;  // FNV-1a offset basis
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ULL;  // FNV prime
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[hash & 0xf];
        hash >>= 4;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transports

FixtureTransport::FixtureTransport(std::filesystem::path dir) : dir_(std::move(dir)) {
    if (!std::filesystem::is_directory(dir_))
        throw IoError("fixture transport directory " + dir_.string() + " does not exist");
}

std::string FixtureTransport::send(const ChatRequest& request) {
    const std::string fp = request_fingerprint(request);
    const std::filesystem::path file = dir_ / (fp + ".txt");
    std::ifstream in(file, std::ios::binary);
    if (!in)
        throw TransportError("no recorded completion " + file.string() +
                                 " (fingerprint " + fp + ")",
                             /*retryable=*/false);
    std::ostringstream body;
    body << in.rdbuf();
    return body.str();
}

HttpTransport::HttpTransport() {
    const char* url = std::getenv("TASKGUARD_LLM_URL");
    const char* key = std::getenv("TASKGUARD_LLM_API_KEY");
    if (!url || !*url)
        throw ValidationError("live transport needs TASKGUARD_LLM_URL in the environment");
    base_url_ = url;
    path_ = "/v1/chat/completions";
    api_key_ = key ? key : "";
}

HttpTransport::HttpTransport(std::string base_url, std::string path, std::string api_key)
    : base_url_(std::move(base_url)), path_(std::move(path)), api_key_(std::move(api_key)) {}

std::string HttpTransport::send(const ChatRequest& request) {
    httplib::Client client(base_url_);
    client.set_read_timeout(60, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto res = client.Post(path_, headers, chat_request_json(request).dump(), "application/json");
    if (!res) throw TransportError("chat endpoint unreachable at " + base_url_, /*retryable=*/true);
    if (res->status == 429 || res->status >= 500)
        throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status),
                             /*retryable=*/true);
    if (res->status != 200)
        throw TransportError("chat endpoint returned HTTP " + std::to_string(res->status),
                             /*retryable=*/false);

    try {
        Json body = Json::parse(res->body);
        return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const Json::exception& e) {
        throw TransportError(std::string("malformed chat completion body: ") + e.what(),
                             /*retryable=*/false);
    }
}

std::string ScriptedTransport::send(const ChatRequest& request) {
    requests_.push_back(request);
    if (replies_.empty())
        throw TransportError("scripted transport ran out of replies", /*retryable=*/false);
    std::string reply = std::move(replies_.front());
    replies_.pop_front();
    return reply;
}

// ---------------------------------------------------------------------------
// Client

LlmClient::LlmClient(Transport& transport, const PlaceholderMemory* memory, RetryPolicy retry,
                     Sleeper sleeper, std::chrono::milliseconds min_request_interval)
    : transport_(&transport),
      memory_(memory),
      retry_(retry),
      sleeper_(std::move(sleeper)),
      min_interval_(min_request_interval) {
    if (!sleeper_)
        sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
    if (retry_.attempts < 1) throw ValidationError("retry policy needs at least one attempt");
}

std::string LlmClient::complete(const ChatRequest& request) {
    validate(request);
    if (memory_) assert_no_leak(chat_request_json(request).dump(), *memory_);

    std::chrono::milliseconds backoff = retry_.base_backoff;
    for (int attempt = 1;; ++attempt) {
        if (min_interval_.count() > 0 && sent_anything_) sleeper_(min_interval_);
        try {
            sent_anything_ = true;
            return transport_->send(request);
        } catch (const TransportError& e) {
            if (!e.retryable || attempt >= retry_.attempts) throw;
            sleeper_(backoff);
            backoff *= retry_.backoff_factor;
        }
    }
}

// ---------------------------------------------------------------------------
// Prompt assembly

namespace {

// Demonstration screens, kept tiny and in the canonical serialization so the
// examples teach the exact input format.
const char* kSearchScreen =
    R"({0: {text: "Search", location: [8,8,408,44], type: input}, 1: {text: "Go", location: [428,8,828,44], type: button}})";
const char* kNavScreen =
    R"({0: {text: "Home", location: [8,8,408,44], type: button}, 1: {text: "Cart", location: [428,8,828,44], type: button}})";
const char* kCartScreen =
    R"({0: {text: "Your Cart", location: [8,8,408,44], type: button}, 1: {text: "Checkout", location: [428,8,828,44], type: button}})";

void add_demo(ChatRequest& request, std::string user, std::string assistant) {
    request.turns.push_back({ChatRole::user, std::move(user)});
    request.turns.push_back({ChatRole::assistant, std::move(assistant)});
}

}  // namespace

ChatRequest build_feasibility_request(const std::string& screen_text, const std::string& command,
                                      const std::string& model) {
    ChatRequest request;
    request.model = model;
    request.max_tokens = 32;
    request.system_prompt =
        "You judge whether a low-level UI command can be carried out on the current screen. "
        "The screen is given as a dictionary of UI elements with their captions, pixel "
        "locations [x_min,y_min,x_max,y_max], and types. A command is feasible only if its "
        "target element caption is actually present on the screen and the action fits the "
        "element. Answer with exactly <s_feasibility> 1 </s_feasibility> when the command is "
        "feasible and <s_feasibility> 0 </s_feasibility> when it is not.";

    add_demo(request,
             std::string("screen: ") + kSearchScreen +
                 "\ncommand: enter running shoes into Search\nIs this command feasible?",
             "<s_feasibility> 1 </s_feasibility>");
    add_demo(request,
             std::string("screen: ") + kNavScreen +
                 "\ncommand: select the Checkout item\nIs this command feasible?",
             "<s_feasibility> 0 </s_feasibility>");

    request.turns.push_back({ChatRole::user, "screen: " + screen_text + "\ncommand: " + command +
                                                 "\nIs this command feasible?"});
    return request;
}

ChatRequest build_completeness_request(const std::optional<std::string>& before_text,
                                       const std::string& command, const std::string& after_text,
                                       const std::string& model) {
    ChatRequest request;
    request.model = model;
    request.max_tokens = 32;
    const bool with_before = before_text.has_value();
    request.system_prompt =
        std::string("You verify whether an already-executed UI command actually achieved its "
                    "effect. You are given ") +
        (with_before ? "the screen before execution, the executed command, and the screen "
                       "after execution."
                     : "the executed command and the screen after execution.") +
        " Screens are dictionaries of UI elements with captions, pixel locations and types. "
        "Answer with exactly <s_completeness> 1 </s_completeness> when the command was "
        "accomplished and <s_completeness> 0 </s_completeness> when it was not.";

    if (with_before) {
        add_demo(request,
                 std::string("before: ") + kNavScreen +
                     "\ncommand: select the Cart item\nafter: " + kCartScreen +
                     "\nWas the command accomplished?",
                 "<s_completeness> 1 </s_completeness>");
        add_demo(request,
                 std::string("before: ") + kNavScreen +
                     "\ncommand: select the Home item\nafter: " + kNavScreen +
                     "\nWas the command accomplished?",
                 "<s_completeness> 0 </s_completeness>");
        request.turns.push_back(
            {ChatRole::user, "before: " + *before_text + "\ncommand: " + command +
                                 "\nafter: " + after_text + "\nWas the command accomplished?"});
    } else {
        add_demo(request,
                 std::string("command: select the Cart item\nafter: ") + kCartScreen +
                     "\nWas the command accomplished?",
                 "<s_completeness> 1 </s_completeness>");
        add_demo(request,
                 std::string("command: enter milk into Search\nafter: ") + kNavScreen +
                     "\nWas the command accomplished?",
                 "<s_completeness> 0 </s_completeness>");
        request.turns.push_back({ChatRole::user, "command: " + command + "\nafter: " + after_text +
                                                     "\nWas the command accomplished?"});
    }
    return request;
}

ChatRequest build_planner_request(const std::string& instruction,
                                  const std::vector<std::string>& executed_commands,
                                  FeedbackKind feedback, const std::string& feedback_detail,
                                  const std::optional<std::string>& screen_text,
                                  const std::string& model) {
    if (feedback == FeedbackKind::none && screen_text.has_value())
        throw ValidationError("first-attempt planning is screen-blind; a screen may only "
                              "accompany replanning feedback");
    if (feedback != FeedbackKind::none && !screen_text.has_value())
        throw ValidationError("replanning feedback requires the current screen");

    ChatRequest request;
    request.model = model;
    request.max_tokens = 64;
    request.system_prompt =
        "You operate a UI one step at a time to carry out a task. Reply with exactly one "
        "low-level command per turn, chosen from these templates:\n"
        "  select the {element_caption} item\n"
        "  click the item to the right of {element_caption}\n"
        "  enter {words} into {element_caption}\n"
        "  scroll until {element_caption}\n"
        "Reply with the single word done when the task is already finished, or give up when "
        "it cannot proceed. Placeholders written as {name} stand for stored private values; "
        "use them verbatim instead of guessing the real contents. When a command of yours "
        "was rejected, you will be told why and shown the current screen; plan a different "
        "command that works on that screen.";

    add_demo(request,
             "task: Search the shop for a wireless mouse.\nexecuted steps so far:\n(none)\n"
             "next command?",
             "enter wireless mouse into Search");
    add_demo(request,
             "task: Open the cart page.\nexecuted steps so far:\n1. select the Cart item\n"
             "next command?",
             "done");

    std::ostringstream user;
    user << "task: " << instruction << "\nexecuted steps so far:\n";
    if (executed_commands.empty()) {
        user << "(none)\n";
    } else {
        for (std::size_t i = 0; i < executed_commands.size(); ++i)
            user << i + 1 << ". " << executed_commands[i] << "\n";
    }
    if (feedback != FeedbackKind::none) {
        user << "feedback: the previous command was judged " << to_string(feedback);
        if (!feedback_detail.empty()) user << " (" << feedback_detail << ")";
        user << "\ncurrent screen: " << *screen_text << "\n";
    }
    user << "next command?";
    request.turns.push_back({ChatRole::user, user.str()});
    return request;
}

}  // namespace taskguard
