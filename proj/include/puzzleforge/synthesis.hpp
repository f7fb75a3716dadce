#pragma once

#include <string>
#include <vector>

#include "puzzleforge/llm.hpp"
#include "puzzleforge/puzzle.hpp"
#include "puzzleforge/templates.hpp"

namespace puzzleforge {

class MalformedLLMOutput : public Error {
public:
    using Error::Error;
};

/// A generated constraint expression failed to parse or type-check.
class DslRejected : public Error {
public:
    using Error::Error;
};

class ExampleNonconformant : public Error {
public:
    using Error::Error;
};

struct CorpusItem {
    std::string id;
    Language language = Language::EN;
    std::string text;
};

/// Reads {id, language?, question|text}; options and answers are ignored.
CorpusItem corpus_item_from_json(const json& j);

struct Draft {
    std::string background;
    std::vector<std::string> constraints;
};

/// Splits on ';' and the full-width '；', trimming and dropping empty parts.
std::vector<std::string> split_constraints(std::string_view text);

/// The last JSON object in `response` holding `background` and
/// `logic_constraints` (a delimited string or a list). Throws MalformedLLMOutput.
Draft parse_draft(std::string_view response);

/// The last JSON object holding `domain`, `constraints` and `example`, built
/// into a puzzle. Throws MalformedLLMOutput, DslRejected or ExampleNonconformant.
PuzzleSpec parse_spec(std::string_view response, const std::string& id, Language language,
                      const std::string& background);

struct GenerationOptions {
    std::string model;
    double temperature = 0.2;
    int max_tokens = 2048;
    std::int64_t seed = 0;
};

Draft formulate(const CorpusItem& item, Client& client, const TemplateSet& templates,
                const GenerationOptions& options);
PuzzleSpec generate_spec(const CorpusItem& item, const Draft& draft, Client& client, const TemplateSet& templates,
                         const GenerationOptions& options);

enum class ValidationStatus { Valid, EmptySolutionSpace, ParseFailure, SchemaMismatch, TooLarge, Timeout };

std::string_view status_name(ValidationStatus s);

struct ValidationReport {
    std::string puzzle_id;
    ValidationStatus status = ValidationStatus::Valid;
    int attempts = 0;
    std::string stage;  // formulate | generate | validate
    std::string detail;
    std::optional<SpaceSummary> space;

    bool valid() const noexcept { return status == ValidationStatus::Valid; }
};

json report_to_json(const ValidationReport& r);

/// Runs the traversal; valid iff at least one solution exists.
ValidationReport cross_validate(const PuzzleSpec& puzzle, const SolveOptions& options = {});

struct SynthesisOptions {
    GenerationOptions generation;
    /// Regenerations allowed per stage after the first attempt.
    int retries = 3;
    SolveOptions solve;
    std::size_t workers = 1;
};

struct Duplicate {
    std::string id;
    std::string kept;
};

struct SynthesisResult {
    std::vector<PuzzleSpec> puzzles;           // sorted by id, each with its solution space
    std::vector<ValidationReport> quarantine;  // sorted by id
    std::vector<Duplicate> duplicates;         // valid puzzles folded into an earlier id
};

/// Normalized background plus the sorted printed constraint expressions.
std::string fingerprint(const PuzzleSpec& puzzle);

/// Every item yields one puzzle, one quarantine report, or one duplicate
/// entry. Throws PreconditionError on repeated item ids.
SynthesisResult synthesize(const std::vector<CorpusItem>& corpus, Client& client, const TemplateSet& templates,
                           const SynthesisOptions& options);

}  // namespace puzzleforge
