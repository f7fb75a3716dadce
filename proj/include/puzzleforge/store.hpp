#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "puzzleforge/puzzle.hpp"

namespace puzzleforge {

std::string read_text(const std::filesystem::path& path);

/// Writes to a sibling temp file, then renames over `path`.
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

/// One JSON value per non-blank line. Throws IoError, or SchemaError with the
/// 1-based line number of a line that is not valid JSON.
std::vector<json> read_jsonl(const std::filesystem::path& path);
std::string to_jsonl(const std::vector<json>& rows);
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows);

/// Every line must parse, type-check and carry a conformant example;
/// failures become SchemaError(line).
std::vector<PuzzleSpec> load_puzzles(const std::filesystem::path& path);
void save_puzzles(const std::filesystem::path& path, const std::vector<PuzzleSpec>& puzzles);

std::string sha256_hex(std::string_view data);
std::string file_sha256(const std::filesystem::path& path);

/// UTC ISO-8601. Honors SOURCE_DATE_EPOCH so reruns produce identical manifests.
std::string timestamp_now();

/// Everything needed to rerun a command against recorded transcripts.
struct RunManifest {
    std::string command;
    std::vector<std::string> arguments;
    json config = json::object();
    json seeds = json::object();
    json template_hashes = json::object();
    std::vector<std::string> backends;
    json inputs = json::object();   // path -> sha256
    json outputs = json::object();  // path -> sha256
    json counts = json::object();
    std::string started;
    std::string finished;
};

json manifest_to_json(const RunManifest& m);

/// Path of the manifest written beside `output`.
std::filesystem::path manifest_path(const std::filesystem::path& output);
void write_manifest(const std::filesystem::path& output, const RunManifest& m);

}  // namespace puzzleforge
