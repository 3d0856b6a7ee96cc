#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "taskguard/geometry.hpp"

namespace taskguard {

using Json = nlohmann::ordered_json;

enum class ElementType { button, input, icon };

const char* to_string(ElementType t);
ElementType element_type_from_string(const std::string& s);

struct UiElement {
    int index = 0;
    std::string text;  // caption; for icons this is the icon's category name
    BBox bbox;
    ElementType etype = ElementType::button;

    bool operator==(const UiElement&) const = default;
};

// One visible UI surface. typed_values maps element index -> current content of
// an input element (what has been typed into it so far).
struct Screen {
    std::string screen_id;
    int width = 0;
    int height = 0;
    std::vector<UiElement> elements;
    std::map<int, std::string> typed_values;

    bool operator==(const Screen&) const = default;

    const UiElement* element_at(int index) const;
};

// Throws ValidationError naming the offending element/field. Checks: non-empty
// id, positive dimensions, indices unique and contiguous from 0, boxes
// well-formed and inside the screen, icons captioned, typed_values keyed to
// existing input elements.
void validate(const Screen& screen);

// trim + collapse internal whitespace + ASCII case-fold. Both sides of every
// caption comparison go through this.
std::string normalize_caption(const std::string& text);

// Canonical single-line dictionary text, e.g.
//   {0: {text: "Add to Cart", location: [10,20,110,50], type: button}}
// Elements ordered by index; text JSON-escaped; input elements with a typed
// value carry an extra `value: "..."` key. Validates first.
std::string serialize_screen(const Screen& screen);

// Inverse of serialize_screen for the element list: screen_id/width/height are
// not part of the text form, so the caller supplies them.
Screen parse_serialized_screen(const std::string& text, const std::string& screen_id,
                               int width, int height);

// Unique caption match after normalization. nullptr when absent; throws
// GroundingError{ambiguous_caption} listing the indices when 2+ match.
const UiElement* find_by_caption(const Screen& screen, const std::string& caption);

// True when at least one element carries the caption (ambiguity allowed).
bool caption_present(const Screen& screen, const std::string& caption);

// JSON shape used in corpus files and adapter payloads.
Json screen_to_json(const Screen& screen);
Screen screen_from_json(const Json& j);

}  // namespace taskguard
