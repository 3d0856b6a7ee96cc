#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "taskguard/screen.hpp"
#include "taskguard/sim.hpp"

namespace taskguard {

// One labelled guard-classifier example. Feasibility samples carry a single
// screen; completeness samples carry a before/after pair.
struct CorpusSample {
    enum class Kind { feasibility, completeness };

    Kind kind = Kind::feasibility;
    std::optional<Screen> screen;         // feasibility only
    std::optional<Screen> screen_before;  // completeness only
    std::optional<Screen> screen_after;   // completeness only
    std::string command;
    bool label = false;
    std::uint64_t seed = 0;  // generation seed, echoed for provenance
    int index = 0;           // position within the generated batch

    bool operator==(const CorpusSample&) const = default;
};

const char* to_string(CorpusSample::Kind kind);

Json sample_to_json(const CorpusSample& sample);
CorpusSample sample_from_json(const Json& j);

// JSONL, one sample per line. Reading throws CorpusError naming the bad line;
// writing throws IoError when the path cannot be opened.
std::vector<CorpusSample> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<CorpusSample>& samples);

// Lenient HTML scrape: leaf tags (nothing element-like inside) become
// UiElements, captioned by the first non-empty source in priority order
// inner text > value > aria-label > alt > <label for=...> text > placeholder.
// Uncaptioned leaves are dropped. <svg> subtrees count as one atomic icon,
// script/style/title/noscript contents are discarded. Nothing here renders,
// so boxes come from a fixed three-column flow layout on a 1280-wide screen.
Screen extract_leaf_elements(const std::string& html, const std::string& screen_id);

// n_pos commands drawn uniformly over (element, template) pairs that actually
// ground on the screen; n_neg commands built around fake captions
// rejection-sampled until absent from the screen, so every template parses but
// nothing grounds. Deterministic under seed. Throws CorpusError when the
// screen offers no groundable pair (or the fake-caption pool runs dry).
std::vector<CorpusSample> gen_feasibility_samples(const Screen& screen, int n_pos, int n_neg,
                                                  std::uint64_t seed);

// Positives replay real click transitions as (before, "select the X item",
// after) triples; each negative takes a real triple and corrupts exactly one
// slot — before screen, caption, or after screen — rejection-sampled until the
// exact verifier genuinely rejects it.
std::vector<CorpusSample> gen_completeness_samples(const std::vector<Scenario>& scenarios,
                                                   int n_pos, int n_neg, std::uint64_t seed);

// Flips each label independently with probability p under the seed; returns
// how many flipped. Gives the eval pipeline corpora with known error rates.
int apply_label_noise(std::vector<CorpusSample>& samples, double p, std::uint64_t seed);

}  // namespace taskguard
