#include "taskguard/screen.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "taskguard/errors.hpp"

namespace taskguard {

const char* to_string(ElementType t) {
    switch (t) {
        case ElementType::button: return "button";
        case ElementType::input: return "input";
        case ElementType::icon: return "icon";
    }
    return "button";
}

ElementType element_type_from_string(const std::string& s) {
    if (s == "button") return ElementType::button;
    if (s == "input") return ElementType::input;
    if (s == "icon") return ElementType::icon;
    throw ValidationError("unknown element type '" + s + "'");
}

const UiElement* Screen::element_at(int index) const {
    for (const auto& e : elements)
        if (e.index == index) return &e;
    return nullptr;
}

void validate(const Screen& screen) {
    if (screen.screen_id.empty())
        throw ValidationError("screen has empty screen_id");
    if (screen.width <= 0 || screen.height <= 0)
        throw ValidationError("screen '" + screen.screen_id + "' has non-positive dimensions");

    std::vector<bool> seen(screen.elements.size(), false);
    for (const auto& e : screen.elements) {
        const std::string where =
            "screen '" + screen.screen_id + "' element " + std::to_string(e.index);
        if (e.index < 0 || static_cast<std::size_t>(e.index) >= screen.elements.size())
            throw ValidationError(where + ": index out of range (must be contiguous from 0)");
        if (seen[static_cast<std::size_t>(e.index)])
            throw ValidationError(where + ": duplicate index");
        seen[static_cast<std::size_t>(e.index)] = true;
        if (!e.bbox.well_formed())
            throw ValidationError(where + ": degenerate bbox");
        if (e.bbox.x_min < 0 || e.bbox.y_min < 0 || e.bbox.x_max > screen.width ||
            e.bbox.y_max > screen.height)
            throw ValidationError(where + ": bbox exceeds screen bounds");
        if (e.etype == ElementType::icon && e.text.empty())
            throw ValidationError(where + ": icon element without a category name");
    }
    for (const auto& [idx, value] : screen.typed_values) {
        (void)value;
        const UiElement* e = screen.element_at(idx);
        if (!e)
            throw ValidationError("screen '" + screen.screen_id + "' typed value for missing element " +
                                  std::to_string(idx));
        if (e->etype != ElementType::input)
            throw ValidationError("screen '" + screen.screen_id + "' typed value for non-input element " +
                                  std::to_string(idx));
    }
}

std::string normalize_caption(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

namespace {

std::string quote(const std::string& s) { return Json(s).dump(); }

}  // namespace

std::string serialize_screen(const Screen& screen) {
    validate(screen);
    std::vector<const UiElement*> ordered(screen.elements.size());
    for (const auto& e : screen.elements) ordered[static_cast<std::size_t>(e.index)] = &e;

    std::ostringstream out;
    out << '{';
    bool first = true;
    for (const UiElement* e : ordered) {
        if (!first) out << ", ";
        first = false;
        out << e->index << ": {text: " << quote(e->text) << ", location: [" << e->bbox.x_min
            << ',' << e->bbox.y_min << ',' << e->bbox.x_max << ',' << e->bbox.y_max
            << "], type: " << to_string(e->etype);
        auto tv = screen.typed_values.find(e->index);
        if (tv != screen.typed_values.end()) out << ", value: " << quote(tv->second);
        out << '}';
    }
    out << '}';
    return out.str();
}

namespace {

// Tiny cursor over the canonical dict text. The format is machine-emitted, so
// errors are terse.
struct Cursor {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError("screen text at offset " + std::to_string(pos) + ": " + msg);
    }
    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }
    void expect_word(const char* w) {
        skip_ws();
        std::size_t n = std::string(w).size();
        if (s.compare(pos, n, w) != 0) fail(std::string("expected '") + w + "'");
        pos += n;
    }
    int integer() {
        skip_ws();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (pos == start) fail("expected integer");
        return std::stoi(s.substr(start, pos - start));
    }
    std::string json_string() {
        skip_ws();
        if (pos >= s.size() || s[pos] != '"') fail("expected quoted string");
        std::size_t start = pos++;
        while (pos < s.size()) {
            if (s[pos] == '\\') {
                pos += 2;
                continue;
            }
            if (s[pos] == '"') {
                ++pos;
                return Json::parse(s.substr(start, pos - start)).get<std::string>();
            }
            ++pos;
        }
        fail("unterminated string");
    }
    std::string word() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected word");
        return s.substr(start, pos - start);
    }
};

}  // namespace

Screen parse_serialized_screen(const std::string& text, const std::string& screen_id,
                               int width, int height) {
    Screen screen;
    screen.screen_id = screen_id;
    screen.width = width;
    screen.height = height;

    Cursor c{text};
    c.expect('{');
    if (!c.eat('}')) {
        do {
            UiElement e;
            e.index = c.integer();
            c.expect(':');
            c.expect('{');
            c.expect_word("text");
            c.expect(':');
            e.text = c.json_string();
            c.expect(',');
            c.expect_word("location");
            c.expect(':');
            c.expect('[');
            e.bbox.x_min = c.integer();
            c.expect(',');
            e.bbox.y_min = c.integer();
            c.expect(',');
            e.bbox.x_max = c.integer();
            c.expect(',');
            e.bbox.y_max = c.integer();
            c.expect(']');
            c.expect(',');
            c.expect_word("type");
            c.expect(':');
            e.etype = element_type_from_string(c.word());
            if (c.eat(',')) {
                c.expect_word("value");
                c.expect(':');
                screen.typed_values[e.index] = c.json_string();
            }
            c.expect('}');
            screen.elements.push_back(std::move(e));
        } while (c.eat(','));
        c.expect('}');
    }
    c.skip_ws();
    if (c.pos != text.size()) c.fail("trailing characters");

    validate(screen);
    return screen;
}

const UiElement* find_by_caption(const Screen& screen, const std::string& caption) {
    const std::string wanted = normalize_caption(caption);
    const UiElement* found = nullptr;
    std::vector<int> matches;
    for (const auto& e : screen.elements) {
        if (normalize_caption(e.text) == wanted) {
            matches.push_back(e.index);
            found = &e;
        }
    }
    if (matches.empty()) return nullptr;
    if (matches.size() > 1) {
        std::sort(matches.begin(), matches.end());
        std::ostringstream msg;
        msg << "caption '" << caption << "' is ambiguous on screen '" << screen.screen_id
            << "' (elements";
        for (int i : matches) msg << ' ' << i;
        msg << ')';
        throw GroundingError(GroundingErrorKind::ambiguous_caption, msg.str());
    }
    return found;
}

bool caption_present(const Screen& screen, const std::string& caption) {
    const std::string wanted = normalize_caption(caption);
    for (const auto& e : screen.elements)
        if (normalize_caption(e.text) == wanted) return true;
    return false;
}

Json screen_to_json(const Screen& screen) {
    validate(screen);
    Json j;
    j["screen_id"] = screen.screen_id;
    j["width"] = screen.width;
    j["height"] = screen.height;
    Json elems = Json::array();
    std::vector<const UiElement*> ordered(screen.elements.size());
    for (const auto& e : screen.elements) ordered[static_cast<std::size_t>(e.index)] = &e;
    for (const UiElement* e : ordered) {
        Json je;
        je["index"] = e->index;
        je["text"] = e->text;
        je["bbox"] = {e->bbox.x_min, e->bbox.y_min, e->bbox.x_max, e->bbox.y_max};
        je["type"] = to_string(e->etype);
        elems.push_back(std::move(je));
    }
    j["elements"] = std::move(elems);
    if (!screen.typed_values.empty()) {
        Json tv;
        for (const auto& [idx, value] : screen.typed_values) tv[std::to_string(idx)] = value;
        j["typed_values"] = std::move(tv);
    }
    return j;
}

Screen screen_from_json(const Json& j) {
    Screen screen;
    try {
        screen.screen_id = j.at("screen_id").get<std::string>();
        screen.width = j.at("width").get<int>();
        screen.height = j.at("height").get<int>();
        for (const auto& je : j.at("elements")) {
            UiElement e;
            e.index = je.at("index").get<int>();
            e.text = je.at("text").get<std::string>();
            const auto& bb = je.at("bbox");
            if (!bb.is_array() || bb.size() != 4)
                throw ValidationError("bbox must be a 4-int array");
            e.bbox = {bb[0].get<int>(), bb[1].get<int>(), bb[2].get<int>(), bb[3].get<int>()};
            e.etype = element_type_from_string(je.at("type").get<std::string>());
            screen.elements.push_back(std::move(e));
        }
        if (j.contains("typed_values"))
            for (const auto& [key, value] : j.at("typed_values").items())
                screen.typed_values[std::stoi(key)] = value.get<std::string>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("bad screen JSON: ") + e.what());
    }
    validate(screen);
    return screen;
}

}  // namespace taskguard
