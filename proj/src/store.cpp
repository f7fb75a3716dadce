#include "puzzleforge/store.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>
#include <system_error>

namespace puzzleforge {

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("cannot read " + path.string());
    return ss.str();
}

void write_text_atomic(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw IoError("cannot write " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot replace " + path.string());
    }
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::vector<json> rows;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        auto row = json::parse(line, nullptr, false);
        if (row.is_discarded()) throw SchemaError(number, "not valid JSON");
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string to_jsonl(const std::vector<json>& rows) {
    std::string out;
    for (const auto& r : rows) out += r.dump(-1, ' ', false, json::error_handler_t::strict) + "\n";
    return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& rows) {
    write_text_atomic(path, to_jsonl(rows));
}

std::vector<PuzzleSpec> load_puzzles(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    std::vector<PuzzleSpec> out;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (trim(line).empty()) continue;
        auto row = json::parse(line, nullptr, false);
        if (row.is_discarded()) throw SchemaError(number, "not valid JSON");
        try {
            out.push_back(puzzle_from_json(row));
        } catch (const json::exception& e) {
            throw SchemaError(number, e.what());
        } catch (const Error& e) {
            throw SchemaError(number, e.what());
        }
    }
    return out;
}

void save_puzzles(const std::filesystem::path& path, const std::vector<PuzzleSpec>& puzzles) {
    std::vector<json> rows;
    rows.reserve(puzzles.size());
    for (const auto& p : puzzles) rows.push_back(puzzle_to_json(p));
    write_jsonl(path, rows);
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

std::string file_sha256(const std::filesystem::path& path) { return sha256_hex(read_text(path)); }

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch && *epoch) t = std::strtoll(epoch, nullptr, 10);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json manifest_to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["arguments"] = m.arguments;
    j["config"] = m.config;
    j["seeds"] = m.seeds;
    j["template_hashes"] = m.template_hashes;
    j["backends"] = m.backends;
    j["inputs"] = m.inputs;
    j["outputs"] = m.outputs;
    j["counts"] = m.counts;
    j["started"] = m.started;
    j["finished"] = m.finished;
    return j;
}

std::filesystem::path manifest_path(const std::filesystem::path& output) {
    auto p = output;
    p += ".manifest.json";
    return p;
}

void write_manifest(const std::filesystem::path& output, const RunManifest& m) {
    write_text_atomic(manifest_path(output), manifest_to_json(m).dump(2) + "\n");
}

}  // namespace puzzleforge
