#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "taskguard/command.hpp"
#include "taskguard/corpus.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/guards.hpp"
#include "taskguard/screen.hpp"
#include "taskguard/sim.hpp"

using namespace taskguard;

namespace {

const std::string kRepoRoot = TASKGUARD_REPO_ROOT;

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

Screen checkout_page() {
    return extract_leaf_elements(slurp(kRepoRoot + "/pages/checkout.html"), "checkout");
}

}  // namespace

TEST_CASE("a lone button becomes one captioned element") {
    Screen s = extract_leaf_elements("<button>Add to Cart</button>", "page");
    REQUIRE(s.elements.size() == 1);
    CHECK(s.elements[0].text == "Add to Cart");
    CHECK(s.elements[0].etype == ElementType::button);
    CHECK(s.elements[0].index == 0);
}

TEST_CASE("inputs are captioned by their placeholder") {
    Screen s = extract_leaf_elements(R"(<input placeholder="Search Amazon">)", "page");
    REQUIRE(s.elements.size() == 1);
    CHECK(s.elements[0].text == "Search Amazon");
    CHECK(s.elements[0].etype == ElementType::input);
}

TEST_CASE("caption sources apply in priority order") {
    const std::string label = R"(<label for="f1">Label text</label>)";

    auto button_caption = [&](const std::string& attrs, const std::string& inner,
                              bool with_label) {
        std::string html = (with_label ? label : "") + "<button id=\"f1\" " + attrs + ">" +
                           inner + "</button>";
        Screen s = extract_leaf_elements(html, "page");
        // The <label> is itself a captioned element and always precedes the
        // button, so the button sits at index 1 when the label is present.
        const std::size_t at = with_label ? 1 : 0;
        if (s.elements.size() <= at) return std::string("<dropped>");
        return s.elements[at].text;
    };

    const std::string all =
        R"(value="From value" aria-label="From aria" alt="From alt" placeholder="From placeholder")";
    CHECK(button_caption(all, "Inner text", true) == "Inner text");
    CHECK(button_caption(all, "", true) == "From value");
    CHECK(button_caption(R"(aria-label="From aria" alt="From alt" placeholder="From placeholder")",
                         "", true) == "From aria");
    CHECK(button_caption(R"(alt="From alt" placeholder="From placeholder")", "", true) ==
          "From alt");
    CHECK(button_caption(R"(placeholder="From placeholder")", "", true) == "Label text");
    CHECK(button_caption(R"(placeholder="From placeholder")", "", false) == "From placeholder");
    // No caption source at all: the element is dropped.
    CHECK(button_caption("", "", false) == "<dropped>");
}

TEST_CASE("script, style, and title subtrees contribute nothing") {
    Screen s = extract_leaf_elements(
        "<title>Page</title><style>p { color: red }</style>"
        "<script>var add = 'to cart';</script><noscript>enable js</noscript>"
        "<button>Real</button>",
        "page");
    REQUIRE(s.elements.size() == 1);
    CHECK(s.elements[0].text == "Real");
}

TEST_CASE("comments hide markup and entities decode") {
    Screen s = extract_leaf_elements(
        "<!-- <button>Ghost</button> --><button>Fish &amp; Chips</button>", "page");
    REQUIRE(s.elements.size() == 1);
    CHECK(s.elements[0].text == "Fish & Chips");
}

TEST_CASE("svg subtrees collapse into a single icon") {
    Screen s = extract_leaf_elements(
        R"(<svg aria-label="Cart icon"><circle r="4"/><path d="M0 0"/></svg>)", "page");
    REQUIRE(s.elements.size() == 1);
    CHECK(s.elements[0].etype == ElementType::icon);
    CHECK(s.elements[0].text == "Cart icon");
}

TEST_CASE("images become icons captioned by alt text") {
    Screen s = extract_leaf_elements(R"(<img src="x.png" alt="Product photo">)", "page");
    REQUIRE(s.elements.size() == 1);
    CHECK(s.elements[0].etype == ElementType::icon);
    CHECK(s.elements[0].text == "Product photo");
}

TEST_CASE("elements flow through a fixed three-column layout") {
    Screen s = extract_leaf_elements(
        "<button>A</button><button>B</button><button>C</button><button>D</button>", "page");
    REQUIRE(s.elements.size() == 4);
    CHECK(s.width == 1280);
    CHECK(s.height == 104);  // two rows
    CHECK(s.elements[0].bbox == BBox{8, 8, 408, 44});
    CHECK(s.elements[1].bbox == BBox{428, 8, 828, 44});
    CHECK(s.elements[2].bbox == BBox{848, 8, 1248, 44});
    CHECK(s.elements[3].bbox == BBox{8, 52, 408, 88});
}

TEST_CASE("an empty page extracts to an empty screen") {
    Screen s = extract_leaf_elements("", "page");
    CHECK(s.elements.empty());
    CHECK(s.width == 1280);
    CHECK(s.height == 720);
    CHECK(s.screen_id == "page");
}

TEST_CASE("the bundled checkout page extracts its full element table") {
    Screen s = checkout_page();
    REQUIRE(s.elements.size() == 22);
    CHECK(s.height == 368);

    // Inner text beats five competing attribute sources on the promo button.
    CHECK(s.elements[18].text == "Promotions & Offers");
    CHECK(s.elements[18].etype == ElementType::button);
    // aria-label on a bare input.
    CHECK(s.elements[10].text == "Shipping Address");
    CHECK(s.elements[10].etype == ElementType::input);
    // value attribute on a submit input.
    CHECK(s.elements[16].text == "Apply Coupon");
    // svg icon.
    CHECK(s.elements[1] == UiElement{1, "Cart icon", {428, 8, 828, 44}, ElementType::icon});
    // label + its input share a caption, so lookups on it are ambiguous.
    CHECK(caption_present(s, "Full Name"));
    CHECK_THROWS_AS((void)find_by_caption(s, "Full Name"), GroundingError);
}

TEST_CASE("the bundled dashboard page keeps textarea content and labels") {
    Screen s = extract_leaf_elements(slurp(kRepoRoot + "/pages/dashboard.html"), "dashboard");
    REQUIRE(s.elements.size() == 15);
    CHECK(s.elements[8] ==
          UiElement{8, "Sent from my tablet", {848, 96, 1248, 132}, ElementType::input});
    CHECK(s.elements[3].etype == ElementType::icon);  // svg bell
    CHECK(s.elements[12].text == "Restore defaults");
    CHECK(s.elements[12].etype == ElementType::input);
}

TEST_CASE("feasibility samples are labelled exactly as the oracle judges them") {
    Screen screen = checkout_page();
    std::vector<CorpusSample> samples = gen_feasibility_samples(screen, 60, 60, 11);
    REQUIRE(samples.size() == 120);

    OracleFeasibilityGuard oracle;
    int positives = 0;
    std::set<Verb> seen_verbs;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const CorpusSample& sample = samples[i];
        CHECK(sample.kind == CorpusSample::Kind::feasibility);
        CHECK(sample.index == static_cast<int>(i));
        CHECK(sample.seed == 11);
        REQUIRE(sample.screen.has_value());
        if (sample.label) ++positives;

        // Every command, positive or negative, stays inside the grammar.
        CommandIntent intent = parse_command(sample.command);
        if (sample.label) seen_verbs.insert(intent.verb);
        CHECK(oracle.assess(*sample.screen, sample.command).positive == sample.label);
    }
    CHECK(positives == 60);
    CHECK(seen_verbs.size() >= 3);
}

TEST_CASE("negative feasibility captions are absent from the screen") {
    Screen screen = checkout_page();
    std::vector<CorpusSample> samples = gen_feasibility_samples(screen, 5, 40, 3);
    for (const CorpusSample& sample : samples) {
        if (sample.label) continue;
        CommandIntent intent = parse_command(sample.command);
        CHECK_FALSE(caption_present(*sample.screen, intent.caption));
    }
}

TEST_CASE("feasibility generation is deterministic under its seed") {
    Screen screen = checkout_page();
    std::vector<CorpusSample> a = gen_feasibility_samples(screen, 25, 25, 42);
    std::vector<CorpusSample> b = gen_feasibility_samples(screen, 25, 25, 42);
    CHECK(a == b);
    std::vector<CorpusSample> c = gen_feasibility_samples(screen, 25, 25, 43);
    CHECK(a != c);
}

TEST_CASE("a screen with nothing to ground on cannot seed a corpus") {
    Screen empty = extract_leaf_elements("", "page");
    CHECK_THROWS_AS((void)gen_feasibility_samples(empty, 5, 5, 1), CorpusError);
}

TEST_CASE("completeness samples agree with the exact verifier") {
    std::vector<Scenario> scenarios = load_scenario_dir(kRepoRoot + "/scenarios");
    std::vector<CorpusSample> samples = gen_completeness_samples(scenarios, 40, 40, 7);
    REQUIRE(samples.size() == 80);

    OracleCompletenessGuard oracle(scenarios);
    int positives = 0;
    for (const CorpusSample& sample : samples) {
        CHECK(sample.kind == CorpusSample::Kind::completeness);
        REQUIRE(sample.screen_before.has_value());
        REQUIRE(sample.screen_after.has_value());
        if (sample.label) ++positives;
        CompletenessQuery query{*sample.screen_before, sample.command, *sample.screen_after};
        CHECK(oracle.assess(query).positive == sample.label);
    }
    CHECK(positives == 40);

    std::vector<CorpusSample> again = gen_completeness_samples(scenarios, 40, 40, 7);
    CHECK(samples == again);
}

TEST_CASE("label noise flips a seeded, reproducible subset") {
    Screen screen = checkout_page();
    std::vector<CorpusSample> clean = gen_feasibility_samples(screen, 100, 100, 5);

    std::vector<CorpusSample> untouched = clean;
    CHECK(apply_label_noise(untouched, 0.0, 99) == 0);
    CHECK(untouched == clean);

    std::vector<CorpusSample> inverted = clean;
    CHECK(apply_label_noise(inverted, 1.0, 99) == 200);
    for (std::size_t i = 0; i < clean.size(); ++i)
        CHECK(inverted[i].label == !clean[i].label);

    std::vector<CorpusSample> noisy_a = clean;
    std::vector<CorpusSample> noisy_b = clean;
    int flips_a = apply_label_noise(noisy_a, 0.2, 99);
    int flips_b = apply_label_noise(noisy_b, 0.2, 99);
    CHECK(flips_a == flips_b);
    CHECK(noisy_a == noisy_b);

    int observed = 0;
    for (std::size_t i = 0; i < clean.size(); ++i)
        if (noisy_a[i].label != clean[i].label) ++observed;
    CHECK(observed == flips_a);
    CHECK(flips_a > 10);   // ~40 expected of 200
    CHECK(flips_a < 80);
}

TEST_CASE("corpus files round-trip sample for sample") {
    Screen screen = checkout_page();
    std::vector<CorpusSample> samples = gen_feasibility_samples(screen, 10, 10, 13);
    std::filesystem::path path = std::filesystem::temp_directory_path() /
                                 ("taskguard_corpus_" + std::to_string(::getpid()) + ".jsonl");
    write_corpus(path.string(), samples);
    std::vector<CorpusSample> back = read_corpus(path.string());
    CHECK(back == samples);
    std::filesystem::remove(path);
}

TEST_CASE("single samples round-trip through json") {
    Screen screen = checkout_page();
    std::vector<CorpusSample> samples = gen_feasibility_samples(screen, 1, 1, 2);
    for (const CorpusSample& sample : samples) {
        CHECK(sample_from_json(sample_to_json(sample)) == sample);
    }
}

TEST_CASE("a corrupt corpus line is reported with its line number") {
    std::filesystem::path path = std::filesystem::temp_directory_path() /
                                 ("taskguard_bad_" + std::to_string(::getpid()) + ".jsonl");
    Screen screen = checkout_page();
    std::vector<CorpusSample> samples = gen_feasibility_samples(screen, 1, 1, 2);
    {
        std::ofstream out(path);
        out << sample_to_json(samples[0]).dump() << "\n";
        out << "{ not json\n";
    }
    try {
        (void)read_corpus(path.string());
        FAIL("expected CorpusError");
    } catch (const CorpusError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::filesystem::remove(path);

    CHECK_THROWS_AS((void)read_corpus("/nonexistent/corpus.jsonl"), IoError);
}
