#pragma once

#include <string>

#include "taskguard/errors.hpp"
#include "taskguard/geometry.hpp"

namespace taskguard {

// The three structured replies a model may produce: a feasibility bit, a
// completeness bit, or a located bounding box.
enum class ResultKind { feasibility, completeness, locate };

const char* to_string(ResultKind kind);

struct StructuredResult {
    ResultKind kind = ResultKind::feasibility;
    int bit = 0;   // meaningful for feasibility/completeness
    BBox bbox;     // meaningful for locate

    static StructuredResult feasibility(int bit);
    static StructuredResult completeness(int bit);
    static StructuredResult locate(const BBox& box);

    bool positive() const { return bit == 1; }
    bool operator==(const StructuredResult&) const = default;
};

// Canonical emission, single space between tokens:
//   <s_feasibility> 1 </s_feasibility>
//   <s_completeness> 0 </s_completeness>
//   <locate_element> <x_min> 10 </x_min> ... </locate_element>
std::string emit(const StructuredResult& result);

// Whitespace-tolerant parse of the grammar (tags need not be space-separated
// from payloads). Throws CodecError with a kind from CodecErrorKind; never
// crashes on arbitrary input.
StructuredResult parse(const std::string& text);

}  // namespace taskguard
