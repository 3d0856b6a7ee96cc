#include "taskguard/command.hpp"

#include <cctype>

#include "taskguard/errors.hpp"

namespace taskguard {

const char* to_string(Verb verb) {
    switch (verb) {
        case Verb::select: return "select";
        case Verb::click_right_of: return "click_right_of";
        case Verb::enter: return "enter";
        case Verb::scroll_until: return "scroll_until";
    }
    return "?";
}

namespace {

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool pending = false;
    for (unsigned char c : s) {
        if (std::isspace(c)) {
            if (!out.empty()) pending = true;
            continue;
        }
        if (pending) {
            out.push_back(' ');
            pending = false;
        }
        out.push_back(static_cast<char>(c));
    }
    return out;
}

bool ci_eq(char a, char b) {
    return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
}

bool ci_starts_with(const std::string& s, const std::string& prefix) {
    if (s.size() < prefix.size()) return false;
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (!ci_eq(s[i], prefix[i])) return false;
    return true;
}

bool ci_ends_with(const std::string& s, const std::string& suffix) {
    if (s.size() < suffix.size()) return false;
    std::size_t off = s.size() - suffix.size();
    for (std::size_t i = 0; i < suffix.size(); ++i)
        if (!ci_eq(s[off + i], suffix[i])) return false;
    return true;
}

std::size_t ci_find(const std::string& s, const std::string& needle) {
    if (needle.empty() || s.size() < needle.size()) return std::string::npos;
    for (std::size_t i = 0; i + needle.size() <= s.size(); ++i) {
        bool hit = true;
        for (std::size_t k = 0; k < needle.size(); ++k)
            if (!ci_eq(s[i + k], needle[k])) {
                hit = false;
                break;
            }
        if (hit) return i;
    }
    return std::string::npos;
}

}  // namespace

CommandIntent parse_command(const std::string& text) {
    const std::string s = collapse_ws(text);

    static const std::string kSelect = "select the ";
    static const std::string kItem = " item";
    static const std::string kRightOf = "click the item to the right of ";
    static const std::string kEnter = "enter ";
    static const std::string kInto = " into ";
    static const std::string kScroll = "scroll until ";

    if (ci_starts_with(s, kSelect) && ci_ends_with(s, kItem) &&
        s.size() > kSelect.size() + kItem.size()) {
        CommandIntent intent;
        intent.verb = Verb::select;
        intent.caption = s.substr(kSelect.size(), s.size() - kSelect.size() - kItem.size());
        return intent;
    }
    if (ci_starts_with(s, kRightOf) && s.size() > kRightOf.size()) {
        CommandIntent intent;
        intent.verb = Verb::click_right_of;
        intent.caption = s.substr(kRightOf.size());
        return intent;
    }
    if (ci_starts_with(s, kEnter)) {
        const std::string rest = s.substr(kEnter.size());
        std::size_t split = ci_find(rest, kInto);
        if (split != std::string::npos && split > 0 && split + kInto.size() < rest.size()) {
            CommandIntent intent;
            intent.verb = Verb::enter;
            intent.words = rest.substr(0, split);
            intent.caption = rest.substr(split + kInto.size());
            return intent;
        }
    }
    if (ci_starts_with(s, kScroll) && s.size() > kScroll.size()) {
        CommandIntent intent;
        intent.verb = Verb::scroll_until;
        intent.caption = s.substr(kScroll.size());
        return intent;
    }
    throw CommandParseError("command matches no template: '" + s + "'");
}

std::string render_command(const CommandIntent& intent) {
    if (collapse_ws(intent.caption).empty())
        throw ValidationError("command intent has empty caption");
    switch (intent.verb) {
        case Verb::select:
            return "select the " + intent.caption + " item";
        case Verb::click_right_of:
            return "click the item to the right of " + intent.caption;
        case Verb::enter: {
            if (collapse_ws(intent.words).empty())
                throw ValidationError("enter intent has empty words");
            if (ci_find(intent.words, " into ") != std::string::npos)
                throw ValidationError("enter words must not contain ' into '");
            return "enter " + intent.words + " into " + intent.caption;
        }
        case Verb::scroll_until:
            return "scroll until " + intent.caption;
    }
    throw ValidationError("bad verb");
}

}  // namespace taskguard
