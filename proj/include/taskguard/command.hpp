#pragma once

#include <string>

namespace taskguard {

// The four accepted command templates:
//   select the {caption} item
//   click the item to the right of {caption}
//   enter {words} into {caption}
//   scroll until {caption}
enum class Verb { select, click_right_of, enter, scroll_until };

const char* to_string(Verb verb);

struct CommandIntent {
    Verb verb = Verb::select;
    std::string caption;
    std::string words;  // enter only

    bool operator==(const CommandIntent&) const = default;
};

// Whitespace is collapsed and the fixed template words match case-insensitively;
// caption and words are captured as written. `enter W into C` splits at the
// first " into " so captions may contain the word; `select the C item` strips
// the final " item" so captions may end with it. Throws CommandParseError when
// no template matches.
CommandIntent parse_command(const std::string& text);

// Inverse of parse_command over the same templates. Validates that the intent
// round-trips (non-empty caption; enter words non-empty and free of " into ").
std::string render_command(const CommandIntent& intent);

}  // namespace taskguard
