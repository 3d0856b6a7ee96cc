#include <doctest.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "taskguard/errors.hpp"
#include "taskguard/llm.hpp"
#include "taskguard/privacy.hpp"
#include "taskguard/screen.hpp"

using namespace taskguard;

namespace {

ChatRequest simple_request(const std::string& content = "hello") {
    ChatRequest r;
    r.system_prompt = "You answer briefly.";
    r.turns = {{ChatRole::user, content}};
    return r;
}

// Fails the first `failures` sends with a retryable error, then succeeds.
class FlakyTransport : public Transport {
public:
    explicit FlakyTransport(int failures) : failures_(failures) {}
    std::string send(const ChatRequest&) override {
        ++attempts;
        if (attempts <= failures_) throw TransportError("socket reset", /*retryable=*/true);
        return "recovered";
    }
    int attempts = 0;

private:
    int failures_;
};

class CountingTransport : public Transport {
public:
    std::string send(const ChatRequest&) override {
        ++sends;
        return "ok";
    }
    int sends = 0;
};

}  // namespace

TEST_CASE("canonical request json is byte-stable") {
    ChatRequest r = simple_request();
    std::string a = chat_request_json(r).dump();
    std::string b = chat_request_json(r).dump();
    CHECK(a == b);
    CHECK(a.find("\"system\"") != std::string::npos);

    std::string fp = request_fingerprint(r);
    CHECK(fp.size() == 16);
    CHECK(fp.find_first_not_of("0123456789abcdef") == std::string::npos);
    CHECK(fp == request_fingerprint(r));

    ChatRequest other = simple_request("different content");
    CHECK(request_fingerprint(other) != fp);
}

TEST_CASE("request validation catches malformed conversations") {
    ChatRequest empty;
    empty.system_prompt = "sys";
    CHECK_THROWS_AS(validate(empty), ValidationError);  // no turns

    ChatRequest bad = simple_request();
    bad.turns.push_back({ChatRole::user, "two users in a row"});
    CHECK_THROWS_AS(validate(bad), ValidationError);

    ChatRequest assistant_first = simple_request();
    assistant_first.turns[0].role = ChatRole::assistant;
    CHECK_THROWS_AS(validate(assistant_first), ValidationError);

    ChatRequest bad_temp = simple_request();
    bad_temp.temperature = 3.0;
    CHECK_THROWS_AS(validate(bad_temp), ValidationError);
}

TEST_CASE("the scripted transport replays replies and records requests") {
    ScriptedTransport transport;
    transport.push_reply("first");
    transport.push_reply("second");

    LlmClient client(transport);
    CHECK(client.complete(simple_request("a")) == "first");
    CHECK(client.complete(simple_request("b")) == "second");
    REQUIRE(transport.requests().size() == 2);
    CHECK(transport.requests()[0].turns[0].content == "a");

    CHECK_THROWS_AS((void)client.complete(simple_request("c")), TransportError);
}

TEST_CASE("retryable transport failures are retried with exponential backoff") {
    FlakyTransport transport(2);
    std::vector<std::chrono::milliseconds> naps;
    LlmClient client(transport, nullptr, RetryPolicy{},
                     [&naps](std::chrono::milliseconds d) { naps.push_back(d); });

    CHECK(client.complete(simple_request()) == "recovered");
    CHECK(transport.attempts == 3);
    REQUIRE(naps.size() == 2);
    CHECK(naps[0] == std::chrono::milliseconds{1000});
    CHECK(naps[1] == std::chrono::milliseconds{2000});
}

TEST_CASE("retries stop at the attempt budget") {
    FlakyTransport transport(99);
    int sleeps = 0;
    LlmClient client(transport, nullptr, RetryPolicy{},
                     [&sleeps](std::chrono::milliseconds) { ++sleeps; });
    CHECK_THROWS_AS((void)client.complete(simple_request()), TransportError);
    CHECK(transport.attempts == 3);
    CHECK(sleeps == 2);
}

TEST_CASE("non-retryable failures are not retried") {
    class Refusing : public Transport {
    public:
        std::string send(const ChatRequest&) override {
            ++attempts;
            throw TransportError("401 unauthorized", /*retryable=*/false);
        }
        int attempts = 0;
    } transport;

    LlmClient client(transport, nullptr, RetryPolicy{},
                     [](std::chrono::milliseconds) { FAIL("no backoff expected"); });
    CHECK_THROWS_AS((void)client.complete(simple_request()), TransportError);
    CHECK(transport.attempts == 1);
}

TEST_CASE("a request carrying a stored secret never reaches the transport") {
    PlaceholderMemory memory;
    memory.put("password", "s3cretPW9");

    CountingTransport transport;
    LlmClient client(transport, &memory);

    CHECK_THROWS_AS((void)client.complete(simple_request("the password is s3cretPW9")),
                    PrivacyViolationError);
    CHECK(transport.sends == 0);

    // Placeholder form is fine.
    CHECK(client.complete(simple_request("the password is {password}")) == "ok");
    CHECK(transport.sends == 1);
}

TEST_CASE("the fixture transport replays recorded completions by fingerprint") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / ("taskguard_fx_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);

    ChatRequest request = simple_request("what now");
    {
        std::ofstream out(dir / (request_fingerprint(request) + ".txt"));
        out << "recorded reply";
    }

    FixtureTransport transport(dir);
    CHECK(transport.send(request) == "recorded reply");

    ChatRequest unknown = simple_request("never recorded");
    try {
        (void)transport.send(unknown);
        FAIL("expected TransportError");
    } catch (const TransportError& e) {
        CHECK_FALSE(e.retryable);
        CHECK(std::string(e.what()).find(request_fingerprint(unknown)) != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("feasibility prompts carry the screen, the command, and demonstrations") {
    Screen s;
    s.screen_id = "p";
    s.width = 1280;
    s.height = 800;
    UiElement e;
    e.index = 0;
    e.text = "Add to Cart";
    e.bbox = {10, 20, 110, 50};
    s.elements = {e};

    ChatRequest r =
        build_feasibility_request(serialize_screen(s), "select the Add to Cart item", "gpt-4");
    CHECK(r.model == "gpt-4");
    CHECK_NOTHROW(validate(r));

    const std::string& query = r.turns.back().content;
    CHECK(query.find(serialize_screen(s)) != std::string::npos);
    CHECK(query.find("select the Add to Cart item") != std::string::npos);

    int demos = 0;
    for (const ChatTurn& turn : r.turns)
        if (turn.role == ChatRole::assistant) ++demos;
    CHECK(demos >= 2);
}

TEST_CASE("planner prompts attach the screen only with replanning feedback") {
    ChatRequest blind = build_planner_request("Buy gloves.", {"select the Search item"},
                                              FeedbackKind::none, "", std::nullopt, "gpt-4");
    const std::string marker = "location: [";
    for (const ChatTurn& turn : blind.turns) {
        INFO(turn.content);
        CHECK(turn.content.find(marker) == std::string::npos);
    }

    std::string screen_text =
        R"({0: {text: "Add to Cart", location: [10,20,110,50], type: button}})";
    ChatRequest sighted =
        build_planner_request("Buy gloves.", {"select the Search item"}, FeedbackKind::infeasible,
                              "caption not on screen", screen_text, "gpt-4");
    CHECK(sighted.turns.back().content.find(screen_text) != std::string::npos);
    CHECK(sighted.turns.back().content.find("caption not on screen") != std::string::npos);

    CHECK_THROWS_AS((void)build_planner_request("Buy gloves.", {}, FeedbackKind::none, "",
                                                screen_text, "gpt-4"),
                    ValidationError);
    CHECK_THROWS_AS((void)build_planner_request("Buy gloves.", {}, FeedbackKind::incomplete,
                                                "stuck", std::nullopt, "gpt-4"),
                    ValidationError);
}

TEST_CASE("prompt builders are pure functions of their inputs") {
    ChatRequest a = build_completeness_request(std::nullopt, "select the Cart item",
                                               "{0: ...}", "gpt-4");
    ChatRequest b = build_completeness_request(std::nullopt, "select the Cart item",
                                               "{0: ...}", "gpt-4");
    CHECK(chat_request_json(a).dump() == chat_request_json(b).dump());
    CHECK(request_fingerprint(a) == request_fingerprint(b));
}
