#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "puzzleforge/domain.hpp"

namespace puzzleforge {

/// Rewrites a Python-ish literal toward JSON: single-quoted strings become
/// double-quoted, and braces with no top-level ':' (set literals) become
/// brackets. Anything else is left untouched.
std::string normalize_literal(std::string_view segment);

/// Every top-level bracketed segment of `text` that parses as JSON after
/// normalization, in order of appearance. Segments that fail to parse are
/// skipped whole; their insides are not searched.
std::vector<json> json_segments(std::string_view text);

/// Every double- or single-quoted string literal in `text`, in order.
std::vector<std::string> quoted_strings(std::string_view text);

}  // namespace puzzleforge
