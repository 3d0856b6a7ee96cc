#include "taskguard/codec.hpp"

#include <array>
#include <cctype>
#include <sstream>
#include <vector>

namespace taskguard {

const char* to_string(CodecErrorKind kind) {
    switch (kind) {
        case CodecErrorKind::syntax: return "syntax error";
        case CodecErrorKind::unknown_tag: return "unknown tag";
        case CodecErrorKind::mismatched_tags: return "mismatched tags";
        case CodecErrorKind::payload_domain: return "payload out of domain";
        case CodecErrorKind::missing_subtag: return "missing subtag";
        case CodecErrorKind::duplicate_subtag: return "duplicate subtag";
        case CodecErrorKind::subtag_order: return "subtag out of order";
        case CodecErrorKind::degenerate_bbox: return "degenerate bbox";
    }
    return "codec error";
}

const char* to_string(ResultKind kind) {
    switch (kind) {
        case ResultKind::feasibility: return "s_feasibility";
        case ResultKind::completeness: return "s_completeness";
        case ResultKind::locate: return "locate_element";
    }
    return "?";
}

StructuredResult StructuredResult::feasibility(int bit) {
    if (bit != 0 && bit != 1)
        throw CodecError(CodecErrorKind::payload_domain, "feasibility bit must be 0 or 1");
    return {ResultKind::feasibility, bit, {}};
}

StructuredResult StructuredResult::completeness(int bit) {
    if (bit != 0 && bit != 1)
        throw CodecError(CodecErrorKind::payload_domain, "completeness bit must be 0 or 1");
    return {ResultKind::completeness, bit, {}};
}

StructuredResult StructuredResult::locate(const BBox& box) {
    if (!box.well_formed())
        throw CodecError(CodecErrorKind::degenerate_bbox, "locate bbox must have positive extent");
    return {ResultKind::locate, 0, box};
}

std::string emit(const StructuredResult& result) {
    std::ostringstream out;
    switch (result.kind) {
        case ResultKind::feasibility:
            out << "<s_feasibility> " << result.bit << " </s_feasibility>";
            break;
        case ResultKind::completeness:
            out << "<s_completeness> " << result.bit << " </s_completeness>";
            break;
        case ResultKind::locate:
            out << "<locate_element> <x_min> " << result.bbox.x_min << " </x_min> <y_min> "
                << result.bbox.y_min << " </y_min> <x_max> " << result.bbox.x_max
                << " </x_max> <y_max> " << result.bbox.y_max << " </y_max> </locate_element>";
            break;
    }
    return out.str();
}

namespace {

[[noreturn]] void fail(CodecErrorKind kind, const std::string& msg) {
    throw CodecError(kind, msg);
}

// Tokens are either complete <...> tags or maximal runs of non-space,
// non-'<' characters, so "<x_min>10</x_min>" splits the same way as the
// space-separated canonical form.
std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        if (text[i] == '<') {
            std::size_t close = text.find('>', i);
            if (close == std::string::npos) fail(CodecErrorKind::syntax, "unterminated tag");
            std::string tag = text.substr(i, close - i + 1);
            for (char tc : tag)
                if (std::isspace(static_cast<unsigned char>(tc)))
                    fail(CodecErrorKind::syntax, "whitespace inside tag");
            tokens.push_back(std::move(tag));
            i = close + 1;
            continue;
        }
        std::size_t start = i;
        while (i < text.size() && text[i] != '<' &&
               !std::isspace(static_cast<unsigned char>(text[i])))
            ++i;
        tokens.push_back(text.substr(start, i - start));
    }
    return tokens;
}

bool is_tag(const std::string& tok) { return tok.size() >= 2 && tok.front() == '<'; }
bool is_close_tag(const std::string& tok) { return tok.rfind("</", 0) == 0; }

std::string tag_name(const std::string& tok) {
    std::size_t start = is_close_tag(tok) ? 2 : 1;
    return tok.substr(start, tok.size() - start - 1);
}

int parse_int(const std::string& tok) {
    std::size_t i = (tok[0] == '-') ? 1 : 0;
    if (i == tok.size()) fail(CodecErrorKind::syntax, "expected integer, got '" + tok + "'");
    for (; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i])))
            fail(CodecErrorKind::syntax, "expected integer, got '" + tok + "'");
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        fail(CodecErrorKind::syntax, "integer out of range: '" + tok + "'");
    }
}

StructuredResult parse_bit(ResultKind kind, const std::vector<std::string>& toks) {
    const std::string name = to_string(kind);
    if (toks.size() < 3) fail(CodecErrorKind::syntax, "truncated " + name + " block");
    if (is_tag(toks[1]))
        fail(CodecErrorKind::syntax, "expected payload after <" + name + ">");
    int bit = parse_int(toks[1]);
    const std::string& close = toks[2];
    if (!is_close_tag(close))
        fail(CodecErrorKind::syntax, "expected closing tag for <" + name + ">");
    if (tag_name(close) != name)
        fail(CodecErrorKind::mismatched_tags,
             "<" + name + "> closed by </" + tag_name(close) + ">");
    if (toks.size() > 3) fail(CodecErrorKind::syntax, "trailing tokens after </" + name + ">");
    if (bit != 0 && bit != 1)
        fail(CodecErrorKind::payload_domain, name + " payload must be 0 or 1, got " + toks[1]);
    return kind == ResultKind::feasibility ? StructuredResult::feasibility(bit)
                                           : StructuredResult::completeness(bit);
}

StructuredResult parse_locate(const std::vector<std::string>& toks) {
    static const std::array<const char*, 4> order = {"x_min", "y_min", "x_max", "y_max"};
    std::array<bool, 4> seen{};
    std::array<int, 4> value{};
    std::vector<std::size_t> sequence;

    std::size_t i = 1;
    while (true) {
        if (i >= toks.size()) fail(CodecErrorKind::syntax, "unterminated <locate_element>");
        const std::string& tok = toks[i];
        if (is_close_tag(tok) && tag_name(tok) == "locate_element") {
            ++i;
            break;
        }
        if (!is_tag(tok) || is_close_tag(tok))
            fail(CodecErrorKind::syntax, "expected coordinate subtag, got '" + tok + "'");
        const std::string name = tag_name(tok);
        std::size_t slot = order.size();
        for (std::size_t k = 0; k < order.size(); ++k)
            if (name == order[k]) slot = k;
        if (slot == order.size())
            fail(CodecErrorKind::unknown_tag, "unknown subtag <" + name + ">");
        if (seen[slot]) fail(CodecErrorKind::duplicate_subtag, "subtag <" + name + "> repeated");
        if (i + 2 >= toks.size()) fail(CodecErrorKind::syntax, "truncated <" + name + "> block");
        if (is_tag(toks[i + 1]))
            fail(CodecErrorKind::syntax, "expected payload inside <" + name + ">");
        value[slot] = parse_int(toks[i + 1]);
        const std::string& close = toks[i + 2];
        if (!is_close_tag(close))
            fail(CodecErrorKind::syntax, "expected closing tag for <" + name + ">");
        if (tag_name(close) != name)
            fail(CodecErrorKind::mismatched_tags, "<" + name + "> closed by </" + tag_name(close) + ">");
        seen[slot] = true;
        sequence.push_back(slot);
        i += 3;
    }
    if (i < toks.size())
        fail(CodecErrorKind::syntax, "trailing tokens after </locate_element>");
    for (std::size_t k = 0; k < order.size(); ++k)
        if (!seen[k]) fail(CodecErrorKind::missing_subtag, std::string("missing <") + order[k] + ">");
    for (std::size_t k = 0; k < sequence.size(); ++k)
        if (sequence[k] != k)
            fail(CodecErrorKind::subtag_order, "coordinate subtags out of canonical order");

    BBox box{value[0], value[1], value[2], value[3]};
    if (!box.well_formed())
        fail(CodecErrorKind::degenerate_bbox, "bbox has non-positive extent");
    return StructuredResult::locate(box);
}

}  // namespace

StructuredResult parse(const std::string& text) {
    std::vector<std::string> toks = tokenize(text);
    if (toks.empty()) fail(CodecErrorKind::syntax, "empty input");
    const std::string& open = toks[0];
    if (!is_tag(open) || is_close_tag(open))
        fail(CodecErrorKind::syntax, "expected opening tag, got '" + open + "'");
    const std::string name = tag_name(open);
    if (name == "s_feasibility") return parse_bit(ResultKind::feasibility, toks);
    if (name == "s_completeness") return parse_bit(ResultKind::completeness, toks);
    if (name == "locate_element") return parse_locate(toks);
    fail(CodecErrorKind::unknown_tag, "unknown tag <" + name + ">");
}

}  // namespace taskguard
