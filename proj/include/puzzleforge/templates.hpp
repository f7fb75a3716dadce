#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "puzzleforge/domain.hpp"
#include "puzzleforge/puzzle.hpp"

namespace puzzleforge {

/// Prompt templates per language. Placeholders are written `[[[name]]]`.
///
/// Names used by the pipeline: formulate, generate, expand, solve, dsl.
class TemplateSet {
public:
    /// Templates compiled into the library from templates/.
    static TemplateSet builtin();
    /// Builtins overridden by any `<dir>/<en|cn>/<name>.txt` present.
    static TemplateSet load(const std::filesystem::path& dir);

    const std::string& get(Language language, std::string_view name) const;
    /// Hex SHA-256 of every template, keyed "en/solve" and so on.
    json hashes() const;

private:
    std::map<std::string, std::string, std::less<>> texts_;
};

/// Substitutes every `[[[key]]]`. Throws PreconditionError when a placeholder
/// in the template has no value.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Whether `[[[name]]]` occurs in the template.
bool has_placeholder(std::string_view tmpl, std::string_view name);

/// Human-readable answer format, one line per field.
std::string describe_schema(const ArrangementSchema& schema, Language language);

/// Constraints as a numbered list "1. text".
std::string numbered_constraints(const PuzzleSpec& puzzle);

}  // namespace puzzleforge
