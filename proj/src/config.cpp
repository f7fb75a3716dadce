#include "puzzleforge/config.hpp"

#include <cstdlib>

#include "puzzleforge/store.hpp"

namespace puzzleforge {

Config config_from_json(const json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw Error("config must be a JSON object");
    Config c;
    c.base_dir = base_dir;
    try {
        if (j.contains("backend")) {
            const auto& b = j.at("backend");
            c.backend.kind = b.value("kind", b.contains("url") ? "http" : "mock");
            c.backend.url = b.value("url", "");
            c.backend.model = b.value("model", c.backend.model);
            c.backend.key_env = b.value("key_env", "");
            c.backend.timeout_s = b.value("timeout_s", c.backend.timeout_s);
            if (b.contains("fixtures")) {
                if (b.at("fixtures").is_string())
                    c.backend.fixtures.push_back(b.at("fixtures").get<std::string>());
                else
                    c.backend.fixtures = b.at("fixtures").get<std::vector<std::string>>();
            }
        }
        if (j.contains("retry")) {
            c.retry.max = j.at("retry").value("max", c.retry.max);
            c.retry.base = std::chrono::milliseconds(j.at("retry").value("base_ms", std::int64_t{500}));
        }
        if (j.contains("concurrency"))
            c.max_in_flight = j.at("concurrency").value("max_in_flight", c.max_in_flight);
        if (j.contains("sampling")) {
            const auto& s = j.at("sampling");
            c.generation_temperature = s.value("generation_temperature", c.generation_temperature);
            c.sampling_temperature = s.value("sampling_temperature", c.sampling_temperature);
            c.evaluation_temperature = s.value("evaluation_temperature", c.evaluation_temperature);
            c.max_tokens = s.value("max_tokens", c.max_tokens);
        }
        if (j.contains("synthesis")) c.synthesis_retries = j.at("synthesis").value("retries", c.synthesis_retries);
        if (j.contains("solve")) {
            const auto& s = j.at("solve");
            c.solve.timeout = std::chrono::milliseconds(s.value("timeout_ms", std::int64_t{c.solve.timeout.count()}));
            c.solve.domain_cap = s.value("domain_cap", c.solve.domain_cap);
            c.solve.sample_cap = s.value("sample_cap", c.solve.sample_cap);
        }
    } catch (const json::exception& e) {
        throw Error(std::string("bad config: ") + e.what());
    }
    if (c.backend.kind != "mock" && c.backend.kind != "http")
        throw Error("backend.kind must be 'mock' or 'http'");
    if (c.backend.kind == "http" && c.backend.url.empty()) throw Error("backend.url is required for http");
    if (c.retry.max < 0) throw Error("retry.max must be >= 0");
    if (c.max_in_flight < 1) throw Error("concurrency.max_in_flight must be >= 1");
    if (c.synthesis_retries < 0) throw Error("synthesis.retries must be >= 0");
    return c;
}

json config_to_json(const Config& c) {
    json j;
    j["backend"] = {{"kind", c.backend.kind},         {"url", c.backend.url},
                    {"model", c.backend.model},       {"key_env", c.backend.key_env},
                    {"fixtures", c.backend.fixtures}, {"timeout_s", c.backend.timeout_s}};
    j["retry"] = {{"max", c.retry.max}, {"base_ms", c.retry.base.count()}};
    j["concurrency"] = {{"max_in_flight", c.max_in_flight}};
    j["sampling"] = {{"generation_temperature", c.generation_temperature},
                     {"sampling_temperature", c.sampling_temperature},
                     {"evaluation_temperature", c.evaluation_temperature},
                     {"max_tokens", c.max_tokens}};
    j["synthesis"] = {{"retries", c.synthesis_retries}};
    j["solve"] = {{"timeout_ms", c.solve.timeout.count()},
                  {"domain_cap", c.solve.domain_cap},
                  {"sample_cap", c.solve.sample_cap}};
    return j;
}

Config load_config(const std::filesystem::path& path) {
    auto j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded()) throw Error("config " + path.string() + " is not valid JSON");
    return config_from_json(j, path.parent_path());
}

std::shared_ptr<Backend> make_backend(const Config& c) {
    if (c.backend.kind == "http") {
        std::string key;
        if (!c.backend.key_env.empty()) {
            const char* v = std::getenv(c.backend.key_env.c_str());
            if (!v || !*v) throw AuthError("environment variable " + c.backend.key_env + " is not set");
            key = v;
        }
        return std::make_shared<HttpBackend>(c.backend.url, key, std::chrono::seconds(c.backend.timeout_s));
    }
    auto mock = std::make_shared<MockBackend>("mock:" + c.backend.model);
    for (const auto& f : c.backend.fixtures) {
        std::filesystem::path p(f);
        mock->load_file(p.is_absolute() ? p : c.base_dir / p);
    }
    return mock;
}

Client make_client(const Config& c) { return Client(make_backend(c), c.retry, c.max_in_flight); }

}  // namespace puzzleforge
