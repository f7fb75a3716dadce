#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "puzzleforge/llm.hpp"
#include "puzzleforge/puzzle.hpp"
#include "puzzleforge/templates.hpp"

namespace puzzleforge {

class EmptyDataset : public Error {
public:
    using Error::Error;
};

std::string render_prompt(const PuzzleSpec& puzzle, const TemplateSet& templates = TemplateSet::builtin());

/// The last JSON value in the response whose root shape matches the schema
/// (an object for multi-slot schemas, the slot's own shape for bare ones).
/// Single quotes and set braces are normalized first. nullopt when none.
std::optional<json> extract_candidate(std::string_view response, const ArrangementSchema& schema);

enum class Extraction { Found, None };

struct Verdict {
    std::string puzzle_id;
    int trial = 0;
    Extraction extraction = Extraction::None;
    FormatReport format;
    std::vector<std::pair<std::string, bool>> constraint_results;
    bool correct = false;
    /// The backend failed; the response is empty and counted incorrect.
    bool flagged = false;
    std::string error;
    std::size_t constraint_count = 0;
    int ratio_bucket = -1;

    std::vector<std::string> failed_constraints() const;
};

json verdict_to_json(const Verdict& v);
Verdict verdict_from_json(const json& j);

/// Extraction, format check, then every constraint; nothing short-circuits.
Verdict verify(std::string_view response, const PuzzleSpec& puzzle, int trial = 0);
/// A verdict for a failed backend call.
Verdict flagged_verdict(const PuzzleSpec& puzzle, int trial, const std::string& error);

struct BucketScore {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0; }
};

struct ScoreReport {
    std::string model;
    std::string dataset;
    std::vector<double> per_trial;
    double mean = 0;
    double std = 0;  // population
    std::size_t flagged = 0;
    double temperature = 0;
    std::map<std::size_t, BucketScore> by_constraint_count;
    std::map<int, BucketScore> by_ratio_bucket;
    /// (constraint count, ratio bucket) cells.
    std::map<std::pair<std::size_t, int>, BucketScore> by_cell;
};

json score_to_json(const ScoreReport& r);

/// Aggregates verdicts of `trials` runs over one dataset. Throws EmptyDataset.
ScoreReport score(const std::vector<Verdict>& verdicts, const std::string& model, const std::string& dataset);

struct EvaluationOptions {
    std::string model;
    std::string dataset;
    int trials = 5;
    double temperature = 1.0;
    int max_tokens = 2048;
    std::size_t max_in_flight = 0;
    SolveOptions solve;
};

struct Evaluation {
    ScoreReport report;
    std::vector<Verdict> verdicts;  // ordered by (trial, puzzle id)
};

/// One completion per puzzle per trial; trial t sends seed t.
/// Throws EmptyDataset, PreconditionError when trials < 1.
Evaluation evaluate(const std::vector<PuzzleSpec>& dataset, Client& client, const EvaluationOptions& options,
                    const TemplateSet& templates = TemplateSet::builtin());

/// Bucket table as markdown or CSV, plus plot data as JSON.
std::string report_markdown(const ScoreReport& r);
std::string report_csv(const ScoreReport& r);
json plot_data(const ScoreReport& r);

}  // namespace puzzleforge
