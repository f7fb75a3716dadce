#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "puzzleforge/enumerator.hpp"
#include "puzzleforge/llm.hpp"

namespace puzzleforge {

/// Run configuration, read from a JSON file. Keys mirror the struct layout:
///
///   {"backend": {"kind": "http", "url": "...", "model": "...", "key_env": "OPENAI_API_KEY"},
///    "retry": {"max": 3, "base_ms": 500},
///    "concurrency": {"max_in_flight": 4}}
///
/// The API key itself is only ever read from the environment.
struct Config {
    struct Backend {
        std::string kind = "mock";  // mock | http
        std::string url;
        std::string model = "mock-model";
        std::string key_env;
        std::vector<std::string> fixtures;  // mock only; relative to the config file
        int timeout_s = 120;
    } backend;
    RetryPolicy retry;
    std::size_t max_in_flight = 4;

    double generation_temperature = 0.2;
    double sampling_temperature = 1.0;
    double evaluation_temperature = 1.0;
    int max_tokens = 2048;
    int synthesis_retries = 3;
    SolveOptions solve;

    std::filesystem::path base_dir;  // directory of the config file
};

Config config_from_json(const json& j, const std::filesystem::path& base_dir = {});
/// Snapshot for manifests. Never contains the API key.
json config_to_json(const Config& c);
Config load_config(const std::filesystem::path& path);

std::shared_ptr<Backend> make_backend(const Config& c);
Client make_client(const Config& c);

}  // namespace puzzleforge
