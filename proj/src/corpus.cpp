#include "taskguard/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "taskguard/command.hpp"
#include "taskguard/errors.hpp"
#include "taskguard/guards.hpp"
#include "taskguard/rng.hpp"

namespace taskguard {

const char* to_string(CorpusSample::Kind kind) {
    return kind == CorpusSample::Kind::feasibility ? "feasibility" : "completeness";
}

// ---------------------------------------------------------------------------
// JSONL serialization

Json sample_to_json(const CorpusSample& sample) {
    Json j;
    j["kind"] = to_string(sample.kind);
    if (sample.kind == CorpusSample::Kind::feasibility) {
        if (!sample.screen) throw ValidationError("feasibility sample is missing its screen");
        j["screen"] = screen_to_json(*sample.screen);
    } else {
        if (!sample.screen_before || !sample.screen_after)
            throw ValidationError("completeness sample is missing a before/after screen");
        j["screen_before"] = screen_to_json(*sample.screen_before);
        j["screen_after"] = screen_to_json(*sample.screen_after);
    }
    j["command"] = sample.command;
    j["label"] = sample.label ? 1 : 0;
    j["seed_meta"] = Json{{"seed", sample.seed}, {"index", sample.index}};
    return j;
}

CorpusSample sample_from_json(const Json& j) {
    if (!j.is_object()) throw ValidationError("corpus sample must be a JSON object");
    CorpusSample sample;

    const std::string kind = j.value("kind", std::string());
    if (kind == "feasibility") {
        sample.kind = CorpusSample::Kind::feasibility;
        if (!j.contains("screen")) throw ValidationError("feasibility sample lacks 'screen'");
        sample.screen = screen_from_json(j.at("screen"));
    } else if (kind == "completeness") {
        sample.kind = CorpusSample::Kind::completeness;
        if (!j.contains("screen_before") || !j.contains("screen_after"))
            throw ValidationError("completeness sample lacks 'screen_before'/'screen_after'");
        sample.screen_before = screen_from_json(j.at("screen_before"));
        sample.screen_after = screen_from_json(j.at("screen_after"));
    } else {
        throw ValidationError("corpus sample kind must be 'feasibility' or 'completeness', got '" +
                              kind + "'");
    }

    if (!j.contains("command") || !j.at("command").is_string())
        throw ValidationError("corpus sample lacks a string 'command'");
    sample.command = j.at("command").get<std::string>();

    if (!j.contains("label")) throw ValidationError("corpus sample lacks 'label'");
    const Json& label = j.at("label");
    if (label.is_boolean()) {
        sample.label = label.get<bool>();
    } else if (label.is_number_integer() &&
               (label.get<int>() == 0 || label.get<int>() == 1)) {
        sample.label = label.get<int>() == 1;
    } else {
        throw ValidationError("corpus sample label must be 0 or 1");
    }

    if (j.contains("seed_meta") && j.at("seed_meta").is_object()) {
        const Json& meta = j.at("seed_meta");
        sample.seed = meta.value("seed", std::uint64_t{0});
        sample.index = meta.value("index", 0);
    }
    return sample;
}

std::vector<CorpusSample> read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file '" + path + "'");
    std::vector<CorpusSample> samples;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw CorpusError("corpus file '" + path + "' line " + std::to_string(line_no) +
                              ": " + e.what());
        }
        try {
            samples.push_back(sample_from_json(j));
        } catch (const ValidationError& e) {
            throw CorpusError("corpus file '" + path + "' line " + std::to_string(line_no) +
                              ": " + e.what());
        }
    }
    return samples;
}

void write_corpus(const std::string& path, const std::vector<CorpusSample>& samples) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write corpus file '" + path + "'");
    for (const CorpusSample& sample : samples) out << sample_to_json(sample).dump() << "\n";
    if (!out) throw IoError("short write to corpus file '" + path + "'");
}

// ---------------------------------------------------------------------------
// HTML leaf extraction

namespace {

std::string lower_ascii(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool pending_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!out.empty()) pending_space = true;
        } else {
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
    }
    return out;
}

std::string decode_entities(const std::string& s) {
    static const std::map<std::string, std::string> named = {
        {"amp", "&"}, {"lt", "<"},   {"gt", ">"},    {"quot", "\""},
        {"apos", "'"}, {"nbsp", " "}, {"copy", "(c)"}, {"ndash", "-"},
        {"mdash", "-"}};
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out += s[i++];
            continue;
        }
        std::size_t semi = s.find(';', i + 1);
        if (semi == std::string::npos || semi - i > 8) {
            out += s[i++];
            continue;
        }
        std::string body = s.substr(i + 1, semi - i - 1);
        if (!body.empty() && body[0] == '#') {
            int code = 0;
            bool ok = body.size() > 1;
            for (std::size_t k = 1; k < body.size() && ok; ++k) {
                if (!std::isdigit(static_cast<unsigned char>(body[k]))) ok = false;
                else code = code * 10 + (body[k] - '0');
            }
            if (ok && code > 0 && code < 128) {
                out += static_cast<char>(code);
                i = semi + 1;
                continue;
            }
        } else {
            auto found = named.find(lower_ascii(body));
            if (found != named.end()) {
                out += found->second;
                i = semi + 1;
                continue;
            }
        }
        out += s[i++];  // unknown entity: keep literal
    }
    return out;
}

bool is_void_tag(const std::string& tag) {
    static const std::set<std::string> tags = {"area",  "base", "br",    "col",  "embed",
                                               "hr",    "img",  "input", "link", "meta",
                                               "param", "source", "track", "wbr"};
    return tags.count(tag) > 0;
}

// Structural chrome that never becomes a UI element even when it is a leaf.
bool is_excluded_tag(const std::string& tag) {
    static const std::set<std::string> tags = {"html", "head",   "body",     "title", "meta",
                                               "link", "script", "style", "noscript"};
    return tags.count(tag) > 0;
}

// Contents are raw text, invisible to the page; the tag does not even make its
// parent a non-leaf.
bool is_invisible_raw_tag(const std::string& tag) {
    return tag == "script" || tag == "style" || tag == "noscript" || tag == "title";
}

struct LeafCandidate {
    std::size_t serial = 0;  // document order of the open tag
    std::string tag;
    std::map<std::string, std::string> attrs;
    std::string text;
};

struct OpenNode {
    std::size_t serial = 0;
    std::string tag;
    std::map<std::string, std::string> attrs;
    std::string text;
    bool has_element_child = false;
};

class HtmlScraper {
public:
    explicit HtmlScraper(const std::string& src) : src_(src) {}

    void run() {
        while (pos_ < src_.size()) {
            if (src_[pos_] != '<') {
                read_text();
            } else if (starts_with("<!--")) {
                skip_comment();
            } else if (starts_with("<!") || starts_with("<?")) {
                skip_until('>');
            } else if (starts_with("</")) {
                read_close_tag();
            } else {
                read_open_tag();
            }
        }
        while (!stack_.empty()) close_top();
        std::sort(leaves_.begin(), leaves_.end(),
                  [](const LeafCandidate& a, const LeafCandidate& b) {
                      return a.serial < b.serial;
                  });
    }

    const std::vector<LeafCandidate>& leaves() const { return leaves_; }
    const std::map<std::string, std::string>& label_for() const { return label_for_; }

private:
    bool starts_with(const char* s) const { return src_.compare(pos_, strlen_(s), s) == 0; }
    static std::size_t strlen_(const char* s) { return std::char_traits<char>::length(s); }

    void skip_until(char c) {
        std::size_t at = src_.find(c, pos_);
        pos_ = at == std::string::npos ? src_.size() : at + 1;
    }

    void skip_comment() {
        std::size_t at = src_.find("-->", pos_ + 4);
        pos_ = at == std::string::npos ? src_.size() : at + 3;
    }

    void read_text() {
        std::size_t at = src_.find('<', pos_);
        if (at == std::string::npos) at = src_.size();
        if (!stack_.empty()) stack_.back().text += decode_entities(src_.substr(pos_, at - pos_));
        pos_ = at;
    }

    std::string read_name() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '-' ||
                src_[pos_] == '_' || src_[pos_] == ':'))
            ++pos_;
        return lower_ascii(src_.substr(start, pos_ - start));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    std::map<std::string, std::string> read_attrs(bool& self_closing) {
        std::map<std::string, std::string> attrs;
        self_closing = false;
        while (pos_ < src_.size()) {
            skip_ws();
            if (pos_ >= src_.size()) break;
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    ++pos_;
                    self_closing = true;
                    break;
                }
                continue;
            }
            std::size_t start = pos_;
            while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
                   src_[pos_] != '=' && src_[pos_] != '>' && src_[pos_] != '/')
                ++pos_;
            std::string name = lower_ascii(src_.substr(start, pos_ - start));
            if (name.empty()) {
                ++pos_;
                continue;
            }
            std::string value;
            skip_ws();
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                skip_ws();
                if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
                    char quote = src_[pos_++];
                    std::size_t end = src_.find(quote, pos_);
                    if (end == std::string::npos) end = src_.size();
                    value = src_.substr(pos_, end - pos_);
                    pos_ = end < src_.size() ? end + 1 : end;
                } else {
                    std::size_t vstart = pos_;
                    while (pos_ < src_.size() &&
                           !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
                           src_[pos_] != '>')
                        ++pos_;
                    value = src_.substr(vstart, pos_ - vstart);
                }
            }
            attrs[name] = decode_entities(value);
        }
        return attrs;
    }

    void mark_parent_element() {
        if (!stack_.empty()) stack_.back().has_element_child = true;
    }

    // Raw-text content up to the matching close tag, which is consumed.
    std::string capture_raw(const std::string& tag) {
        std::string needle = "</" + tag;
        std::size_t at = src_.find(needle, pos_);
        std::string content;
        if (at == std::string::npos) {
            content = src_.substr(pos_);
            pos_ = src_.size();
        } else {
            content = src_.substr(pos_, at - pos_);
            pos_ = at;
            skip_until('>');
        }
        return content;
    }

    void read_open_tag() {
        ++pos_;  // '<'
        std::string tag = read_name();
        if (tag.empty()) {  // stray '<'
            if (!stack_.empty()) stack_.back().text += '<';
            return;
        }
        bool self_closing = false;
        auto attrs = read_attrs(self_closing);

        if (tag == "svg") {
            // Atomic: whatever is inside is one icon, not elements.
            if (!self_closing) capture_raw("svg");
            mark_parent_element();
            leaves_.push_back({serial_++, tag, std::move(attrs), ""});
            return;
        }
        if (is_invisible_raw_tag(tag)) {
            if (!self_closing) capture_raw(tag);
            return;
        }
        if (tag == "textarea") {
            std::string content = self_closing ? "" : capture_raw(tag);
            mark_parent_element();
            leaves_.push_back({serial_++, tag, std::move(attrs), decode_entities(content)});
            return;
        }
        if (is_void_tag(tag) || self_closing) {
            mark_parent_element();
            leaves_.push_back({serial_++, tag, std::move(attrs), ""});
            return;
        }
        mark_parent_element();
        stack_.push_back({serial_++, tag, std::move(attrs), "", false});
    }

    void read_close_tag() {
        pos_ += 2;  // '</'
        std::string tag = read_name();
        skip_until('>');
        bool open = false;
        for (const OpenNode& node : stack_)
            if (node.tag == tag) {
                open = true;
                break;
            }
        if (!open) return;  // stray close: ignore
        while (!stack_.empty() && stack_.back().tag != tag) close_top();
        if (!stack_.empty()) close_top();
    }

    void close_top() {
        OpenNode node = std::move(stack_.back());
        stack_.pop_back();
        if (node.tag == "label") {
            auto found = node.attrs.find("for");
            if (found != node.attrs.end() && !found->second.empty())
                label_for_.emplace(found->second, collapse_ws(node.text));
        }
        if (!node.has_element_child)
            leaves_.push_back({node.serial, node.tag, node.attrs, node.text});
        // Text stays visible to ancestors either way, so <label><b>X</b></label>
        // still captions through the label-for map.
        if (!stack_.empty()) stack_.back().text += " " + node.text;
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    std::size_t serial_ = 0;
    std::vector<OpenNode> stack_;
    std::vector<LeafCandidate> leaves_;
    std::map<std::string, std::string> label_for_;
};

std::string attr_or_empty(const std::map<std::string, std::string>& attrs, const char* name) {
    auto found = attrs.find(name);
    return found == attrs.end() ? std::string() : found->second;
}

ElementType etype_for_tag(const std::string& tag) {
    if (tag == "input" || tag == "textarea") return ElementType::input;
    if (tag == "img" || tag == "svg") return ElementType::icon;
    return ElementType::button;
}

}  // namespace

Screen extract_leaf_elements(const std::string& html, const std::string& screen_id) {
    HtmlScraper scraper(html);
    scraper.run();

    Screen screen;
    screen.screen_id = screen_id;
    screen.width = 1280;

    for (const LeafCandidate& leaf : scraper.leaves()) {
        if (is_excluded_tag(leaf.tag)) continue;

        std::string caption = collapse_ws(leaf.text);
        if (caption.empty()) caption = collapse_ws(attr_or_empty(leaf.attrs, "value"));
        if (caption.empty()) caption = collapse_ws(attr_or_empty(leaf.attrs, "aria-label"));
        if (caption.empty()) caption = collapse_ws(attr_or_empty(leaf.attrs, "alt"));
        if (caption.empty()) {
            const std::string id = attr_or_empty(leaf.attrs, "id");
            if (!id.empty()) {
                auto found = scraper.label_for().find(id);
                if (found != scraper.label_for().end()) caption = found->second;
            }
        }
        if (caption.empty()) caption = collapse_ws(attr_or_empty(leaf.attrs, "placeholder"));
        if (caption.empty()) continue;

        UiElement element;
        element.index = static_cast<int>(screen.elements.size());
        element.text = caption;
        element.etype = etype_for_tag(leaf.tag);
        const int col = element.index % 3;
        const int row = element.index / 3;
        element.bbox = {8 + col * 420, 8 + row * 44, 8 + col * 420 + 400, 8 + row * 44 + 36};
        screen.elements.push_back(std::move(element));
    }

    const int rows = (static_cast<int>(screen.elements.size()) + 2) / 3;
    screen.height = rows > 0 ? rows * 44 + 16 : 720;
    validate(screen);
    return screen;
}

// ---------------------------------------------------------------------------
// Sample generation

namespace {

const std::vector<std::string>& adjective_pool() {
    static const std::vector<std::string> pool = {
        "Quantum", "Velvet",  "Crimson", "Hollow", "Gilded", "Restless", "Mossy",
        "Brazen",  "Lucid",   "Pewter",  "Glacial", "Saffron", "Umbral",  "Copper",
        "Vivid",   "Torrid",  "Wayward", "Sable",  "Amber",  "Feral"};
    return pool;
}

const std::vector<std::string>& noun_pool() {
    static const std::vector<std::string> pool = {
        "Llama",   "Anvil",   "Orchid", "Turbine", "Satchel", "Lantern", "Gondola",
        "Parapet", "Mandolin", "Obelisk", "Falcon", "Bramble", "Sextant", "Tundra",
        "Citadel", "Dynamo",  "Pergola", "Quince", "Railcar", "Vestibule"};
    return pool;
}

const std::vector<std::string>& typed_word_pool() {
    static const std::vector<std::string> pool = {
        "blue",   "kettle",  "running", "shoes", "budget", "meeting", "notes",
        "wireless", "mouse", "garden",  "chair", "travel", "mug",     "python",
        "tutorial", "oak",   "desk",    "lamp",  "cotton", "towel"};
    return pool;
}

std::string draw_typed_words(SeededRng& rng) {
    const int count = rng.range(1, 3);
    std::string words;
    for (int i = 0; i < count; ++i) {
        if (i) words += ' ';
        words += rng.pick(typed_word_pool());
    }
    return words;
}

// A two-word caption guaranteed absent from every given screen.
std::string draw_fake_caption(SeededRng& rng, const std::vector<const Screen*>& screens) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::string caption = rng.pick(adjective_pool()) + " " + rng.pick(noun_pool());
        bool clash = false;
        for (const Screen* screen : screens)
            if (caption_present(*screen, caption)) {
                clash = true;
                break;
            }
        if (!clash) return caption;
    }
    throw CorpusError("fake-caption pool exhausted: screens cover every adjective+noun pair");
}

bool has_right_neighbor(const Screen& screen, const UiElement& element) {
    for (const UiElement& other : screen.elements) {
        if (other.index == element.index) continue;
        if (vertical_overlap(other.bbox, element.bbox) >= 1 &&
            other.bbox.center_x() > element.bbox.center_x())
            return true;
    }
    return false;
}

struct TemplatePick {
    int element = 0;
    Verb verb = Verb::select;
};

std::vector<TemplatePick> groundable_pairs(const Screen& screen) {
    std::map<std::string, int> caption_count;
    for (const UiElement& e : screen.elements)
        if (!e.text.empty()) ++caption_count[normalize_caption(e.text)];

    std::vector<TemplatePick> pairs;
    for (const UiElement& e : screen.elements) {
        if (e.text.empty() || caption_count[normalize_caption(e.text)] != 1) continue;
        pairs.push_back({e.index, Verb::select});
        pairs.push_back({e.index, Verb::scroll_until});
        if (e.etype == ElementType::input) pairs.push_back({e.index, Verb::enter});
        if (has_right_neighbor(screen, e)) pairs.push_back({e.index, Verb::click_right_of});
    }
    return pairs;
}

std::string render_for(Verb verb, const std::string& caption, SeededRng& rng) {
    CommandIntent intent;
    intent.verb = verb;
    intent.caption = caption;
    if (verb == Verb::enter) intent.words = draw_typed_words(rng);
    return render_command(intent);
}

}  // namespace

std::vector<CorpusSample> gen_feasibility_samples(const Screen& screen, int n_pos, int n_neg,
                                                  std::uint64_t seed) {
    if (n_pos < 0 || n_neg < 0) throw ValidationError("sample counts must be >= 0");
    validate(screen);

    SeededRng rng(seed);
    const auto pairs = groundable_pairs(screen);
    if (n_pos > 0 && pairs.empty())
        throw CorpusError("screen '" + screen.screen_id +
                          "' offers no groundable (element, template) pair");

    std::vector<CorpusSample> samples;
    samples.reserve(static_cast<std::size_t>(n_pos + n_neg));

    for (int i = 0; i < n_pos; ++i) {
        const TemplatePick& pick = rng.pick(pairs);
        CorpusSample sample;
        sample.kind = CorpusSample::Kind::feasibility;
        sample.screen = screen;
        sample.command = render_for(pick.verb, screen.element_at(pick.element)->text, rng);
        sample.label = true;
        sample.seed = seed;
        sample.index = static_cast<int>(samples.size());
        samples.push_back(std::move(sample));
    }

    static const Verb kAllVerbs[] = {Verb::select, Verb::click_right_of, Verb::enter,
                                     Verb::scroll_until};
    for (int i = 0; i < n_neg; ++i) {
        const Verb verb = kAllVerbs[rng.below(4)];
        CorpusSample sample;
        sample.kind = CorpusSample::Kind::feasibility;
        sample.screen = screen;
        sample.command = render_for(verb, draw_fake_caption(rng, {&screen}), rng);
        sample.label = false;
        sample.seed = seed;
        sample.index = static_cast<int>(samples.size());
        samples.push_back(std::move(sample));
    }
    return samples;
}

namespace {

struct TransitionRef {
    const Scenario* scenario = nullptr;
    std::string page_id;
    int element = 0;
    std::string caption;
    std::string target;
};

std::vector<TransitionRef> clickable_transitions(const std::vector<Scenario>& scenarios) {
    std::vector<TransitionRef> refs;
    for (const Scenario& scenario : scenarios) {
        for (const auto& [page_id, page] : scenario.pages) {
            std::map<std::string, int> caption_count;
            for (const UiElement& e : page.screen.elements)
                if (!e.text.empty()) ++caption_count[normalize_caption(e.text)];
            for (const auto& [key, target] : page.transitions) {
                const auto [index, action] = key;
                if (action != ActionKind::click) continue;
                const UiElement* element = page.screen.element_at(index);
                if (!element) continue;  // hidden until scrolled: not a base-screen sample
                if (element->text.empty() ||
                    caption_count[normalize_caption(element->text)] != 1)
                    continue;
                if (!scenario.pages.count(target)) continue;
                refs.push_back({&scenario, page_id, index, element->text, target});
            }
        }
    }
    return refs;
}

}  // namespace

std::vector<CorpusSample> gen_completeness_samples(const std::vector<Scenario>& scenarios,
                                                   int n_pos, int n_neg, std::uint64_t seed) {
    if (n_pos < 0 || n_neg < 0) throw ValidationError("sample counts must be >= 0");

    SeededRng rng(seed);
    const auto refs = clickable_transitions(scenarios);
    if ((n_pos > 0 || n_neg > 0) && refs.empty())
        throw CorpusError("scenarios offer no uniquely-captioned visible click transition");

    // Every page across all scenarios, for slot substitution.
    std::vector<const Screen*> all_screens;
    for (const Scenario& scenario : scenarios)
        for (const auto& [page_id, page] : scenario.pages) all_screens.push_back(&page.screen);

    OracleCompletenessGuard oracle(scenarios);
    auto oracle_rejects = [&](const Screen& before, const std::string& command,
                              const Screen& after) {
        try {
            return !oracle.assess({before, command, after}).positive;
        } catch (const GuardUnavailableError&) {
            return false;  // not a clean negative; resample
        }
    };

    std::vector<CorpusSample> samples;
    samples.reserve(static_cast<std::size_t>(n_pos + n_neg));

    auto command_for = [](const TransitionRef& ref) {
        return render_command({Verb::select, ref.caption, ""});
    };

    for (int i = 0; i < n_pos; ++i) {
        const TransitionRef& ref = rng.pick(refs);
        CorpusSample sample;
        sample.kind = CorpusSample::Kind::completeness;
        sample.screen_before = ref.scenario->pages.at(ref.page_id).screen;
        sample.screen_after = ref.scenario->pages.at(ref.target).screen;
        sample.command = command_for(ref);
        sample.label = true;
        sample.seed = seed;
        sample.index = static_cast<int>(samples.size());
        samples.push_back(std::move(sample));
    }

    for (int i = 0; i < n_neg; ++i) {
        const TransitionRef& ref = rng.pick(refs);
        const Screen& true_before = ref.scenario->pages.at(ref.page_id).screen;
        const Screen& true_after = ref.scenario->pages.at(ref.target).screen;
        std::string command = command_for(ref);

        const Screen* before = &true_before;
        const Screen* after = &true_after;
        bool found = false;
        for (int attempt = 0; attempt < 100 && !found; ++attempt) {
            before = &true_before;
            after = &true_after;
            command = command_for(ref);
            switch (rng.below(3)) {
                case 0: {  // swap the before screen for an unrelated page
                    const Screen* substitute = all_screens[rng.below(all_screens.size())];
                    if (substitute->screen_id == true_before.screen_id) continue;
                    before = substitute;
                    break;
                }
                case 1: {  // swap the caption for a fake one
                    command = render_command(
                        {Verb::select, draw_fake_caption(rng, {&true_before}), ""});
                    break;
                }
                default: {  // swap the after screen
                    const Screen* substitute = all_screens[rng.below(all_screens.size())];
                    if (substitute->screen_id == true_after.screen_id) continue;
                    after = substitute;
                    break;
                }
            }
            found = oracle_rejects(*before, command, *after);
        }
        if (!found) {
            // Guaranteed negative: the caption cannot ground on the before page.
            before = &true_before;
            after = &true_after;
            command = render_command({Verb::select, draw_fake_caption(rng, {&true_before}), ""});
        }

        CorpusSample sample;
        sample.kind = CorpusSample::Kind::completeness;
        sample.screen_before = *before;
        sample.screen_after = *after;
        sample.command = command;
        sample.label = false;
        sample.seed = seed;
        sample.index = static_cast<int>(samples.size());
        samples.push_back(std::move(sample));
    }
    return samples;
}

int apply_label_noise(std::vector<CorpusSample>& samples, double p, std::uint64_t seed) {
    if (p < 0.0 || p > 1.0) throw ValidationError("noise probability must be in [0, 1]");
    SeededRng rng(seed);
    int flipped = 0;
    for (CorpusSample& sample : samples)
        if (rng.chance(p)) {
            sample.label = !sample.label;
            ++flipped;
        }
    return flipped;
}

}  // namespace taskguard
