#include "puzzleforge/llm.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "puzzleforge/store.hpp"

namespace puzzleforge {

namespace {

std::string joined_messages(const CompletionRequest& r) {
    std::string out;
    for (const auto& m : r.messages) {
        out += m.content;
        out += '\n';
    }
    return out;
}

std::int64_t word_count(std::string_view s) {
    std::int64_t n = 0;
    bool in_word = false;
    for (unsigned char c : s) {
        bool space = std::isspace(c) != 0;
        if (!space && !in_word) ++n;
        in_word = !space;
    }
    return n;
}

}  // namespace

void validate(const CompletionRequest& r) {
    if (r.messages.empty()) throw PreconditionError("completion request has no messages");
    for (const auto& m : r.messages)
        if (m.role != "system" && m.role != "user" && m.role != "assistant")
            throw PreconditionError("unknown message role '" + m.role + "'");
    if (!(r.temperature >= 0)) throw PreconditionError("temperature must be >= 0");
    if (r.max_tokens <= 0) throw PreconditionError("max_tokens must be positive");
}

json request_to_json(const CompletionRequest& r) {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
    json j;
    j["model"] = r.model;
    j["messages"] = std::move(messages);
    j["temperature"] = r.temperature;
    j["max_tokens"] = r.max_tokens;
    j["seed"] = r.seed ? json(*r.seed) : json(nullptr);
    return j;
}

CompletionRequest request_from_json(const json& j) {
    CompletionRequest r;
    r.model = j.value("model", "");
    for (const auto& m : j.at("messages")) r.messages.push_back({m.at("role"), m.at("content")});
    r.temperature = j.value("temperature", 0.2);
    r.max_tokens = j.value("max_tokens", 2048);
    if (j.contains("seed") && !j.at("seed").is_null()) r.seed = j.at("seed").get<std::int64_t>();
    return r;
}

std::string request_hash(const CompletionRequest& r) { return sha256_hex(request_to_json(r).dump()); }

json transcript_to_json(const Transcript& t) {
    json j;
    j["request_hash"] = request_hash(t.request);
    j["request"] = request_to_json(t.request);
    j["response"] = t.response;
    j["latency_ms"] = t.latency_ms;
    j["usage"] = {{"prompt_tokens", t.usage.prompt_tokens}, {"completion_tokens", t.usage.completion_tokens}};
    j["backend"] = t.backend;
    return j;
}

Transcript transcript_from_json(const json& j) {
    Transcript t;
    t.request = request_from_json(j.at("request"));
    t.response = j.at("response").get<std::string>();
    t.latency_ms = j.value("latency_ms", 0.0);
    if (j.contains("usage")) {
        t.usage.prompt_tokens = j.at("usage").value("prompt_tokens", std::int64_t{0});
        t.usage.completion_tokens = j.at("usage").value("completion_tokens", std::int64_t{0});
    }
    t.backend = j.value("backend", "");
    return t;
}

// ---------------------------------------------------------------------------

BackendReply MockBackend::send(const CompletionRequest& request) {
    std::lock_guard lock(mutex_);
    ++calls_;
    const auto usage_for = [&](const std::string& text) {
        return Usage{word_count(joined_messages(request)), word_count(text)};
    };
    if (auto it = by_hash_.find(request_hash(request)); it != by_hash_.end())
        return {it->second, usage_for(it->second)};

    const auto haystack = joined_messages(request);
    for (auto& rule : rules_) {
        if (rule.seed && rule.seed != request.seed) continue;
        if (rule.model && *rule.model != request.model) continue;
        bool all = std::all_of(rule.contains.begin(), rule.contains.end(),
                               [&](const std::string& s) { return haystack.find(s) != std::string::npos; });
        if (!all) continue;
        if (!rule.error.empty()) {
            if (rule.times > 0 && rule.fired >= rule.times) continue;
            ++rule.fired;
            if (rule.error == "rate_limited") throw TransientError("mock: rate limited", true);
            if (rule.error == "server") throw TransientError("mock: server error", false);
            if (rule.error == "auth") throw AuthError("mock: unauthorized");
            throw BackendError("mock: scripted failure");
        }
        return {rule.response, usage_for(rule.response)};
    }
    throw BackendError("mock: no fixture for request " + request_hash(request).substr(0, 12));
}

void MockBackend::add_response(const CompletionRequest& request, std::string response) {
    add_hash(request_hash(request), std::move(response));
}

void MockBackend::add_hash(std::string hash, std::string response) {
    std::lock_guard lock(mutex_);
    by_hash_[std::move(hash)] = std::move(response);
}

void MockBackend::add_rule(Rule rule) {
    std::lock_guard lock(mutex_);
    rules_.push_back(std::move(rule));
}

void MockBackend::load(const json& entry) {
    if (entry.contains("match")) {
        Rule rule;
        const auto& m = entry.at("match");
        if (m.contains("contains")) {
            if (m.at("contains").is_string())
                rule.contains.push_back(m.at("contains").get<std::string>());
            else
                rule.contains = m.at("contains").get<std::vector<std::string>>();
        }
        if (m.contains("seed")) rule.seed = m.at("seed").get<std::int64_t>();
        if (m.contains("model")) rule.model = m.at("model").get<std::string>();
        rule.response = entry.value("response", "");
        rule.error = entry.value("error", "");
        rule.times = entry.value("times", 0);
        add_rule(std::move(rule));
    } else if (entry.contains("request")) {
        add_response(request_from_json(entry.at("request")), entry.at("response").get<std::string>());
    } else if (entry.contains("request_hash")) {
        add_hash(entry.at("request_hash").get<std::string>(), entry.at("response").get<std::string>());
    } else {
        throw Error("mock fixture entry needs 'match', 'request' or 'request_hash'");
    }
}

void MockBackend::load_file(const std::filesystem::path& path) {
    for (const auto& row : read_jsonl(path)) load(row);
}

std::size_t MockBackend::calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
}

// ---------------------------------------------------------------------------

HttpBackend::HttpBackend(std::string url, std::string api_key, std::chrono::seconds timeout)
    : url_(std::move(url)), api_key_(std::move(api_key)), timeout_(timeout) {}

BackendReply HttpBackend::send(const CompletionRequest& request) {
    auto scheme_end = url_.find("://");
    if (scheme_end == std::string::npos) throw BackendError("backend url needs a scheme: " + url_);
    auto path_start = url_.find('/', scheme_end + 3);
    std::string origin = path_start == std::string::npos ? url_ : url_.substr(0, path_start);
    std::string path = path_start == std::string::npos ? "/" : url_.substr(path_start);

    httplib::Client cli(origin);
    cli.set_connection_timeout(timeout_);
    cli.set_read_timeout(timeout_);
    cli.set_write_timeout(timeout_);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    auto body = request_to_json(request);
    if (!request.seed) body.erase("seed");
    auto res = cli.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransientError("http: " + httplib::to_string(res.error()), false);
    if (res->status == 401 || res->status == 403) throw AuthError("http " + std::to_string(res->status));
    if (res->status == 429) throw TransientError("http 429", true);
    if (res->status >= 500) throw TransientError("http " + std::to_string(res->status), false);
    if (res->status != 200) throw BackendError("http " + std::to_string(res->status) + ": " + res->body);

    auto reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded()) throw BackendError("http: response is not JSON");
    try {
        BackendReply out;
        out.text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
        if (reply.contains("usage") && reply.at("usage").is_object()) {
            out.usage.prompt_tokens = reply.at("usage").value("prompt_tokens", std::int64_t{0});
            out.usage.completion_tokens = reply.at("usage").value("completion_tokens", std::int64_t{0});
        }
        return out;
    } catch (const json::exception& e) {
        throw BackendError(std::string("http: unexpected response shape: ") + e.what());
    }
}

// ---------------------------------------------------------------------------

Client::Client(std::shared_ptr<Backend> backend, RetryPolicy retry, std::size_t max_in_flight)
    : backend_(std::move(backend)), retry_(retry), max_in_flight_(std::max<std::size_t>(1, max_in_flight)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (!backend_) throw PreconditionError("client needs a backend");
}

std::string Client::complete(const CompletionRequest& request) {
    validate(request);
    for (int attempt = 0;; ++attempt) {
        const auto start = std::chrono::steady_clock::now();
        auto now = ++in_flight_;
        for (auto peak = peak_.load(); now > peak && !peak_.compare_exchange_weak(peak, now);) {
        }
        try {
            auto reply = backend_->send(request);
            --in_flight_;
            const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
            std::lock_guard lock(mutex_);
            transcripts_.push_back({request, reply.text, backend_->deterministic() ? 0.0 : elapsed.count(),
                                    reply.usage, backend_->id()});
            return reply.text;
        } catch (const TransientError& e) {
            --in_flight_;
            if (attempt >= retry_.max) {
                if (e.rate_limited())
                    throw RateLimited("rate limited after " + std::to_string(attempt + 1) + " attempts");
                throw BackendError(std::string(e.what()) + " after " + std::to_string(attempt + 1) + " attempts");
            }
            sleeper_(retry_.base * (1LL << std::min(attempt, 20)));
        } catch (...) {
            --in_flight_;
            throw;
        }
    }
}

std::vector<CompletionResult> Client::complete_many(const std::vector<CompletionRequest>& requests,
                                                    std::size_t max_in_flight) {
    if (max_in_flight == 0) max_in_flight = max_in_flight_;
    std::vector<CompletionResult> results(requests.size());
    parallel_for(requests.size(), max_in_flight, [&](std::size_t i) {
        auto& r = results[i];
        try {
            r.text = complete(requests[i]);
        } catch (const AuthError& e) {
            r.error = e.what();
            r.error_kind = "auth";
        } catch (const RateLimited& e) {
            r.error = e.what();
            r.error_kind = "rate_limited";
        } catch (const PreconditionError& e) {
            r.error = e.what();
            r.error_kind = "precondition";
        } catch (const std::exception& e) {
            r.error = e.what();
            r.error_kind = "backend";
        }
    });
    return results;
}

std::vector<Transcript> Client::transcripts() const {
    std::vector<std::pair<std::string, Transcript>> keyed;
    {
        std::lock_guard lock(mutex_);
        for (const auto& t : transcripts_) keyed.emplace_back(request_to_json(t.request).dump() + t.response, t);
    }
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<Transcript> out;
    out.reserve(keyed.size());
    for (auto& [k, t] : keyed) out.push_back(std::move(t));
    return out;
}

void Client::save_transcripts(const std::filesystem::path& path) const {
    std::vector<json> rows;
    for (const auto& t : transcripts()) rows.push_back(transcript_to_json(t));
    write_jsonl(path, rows);
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
    workers = std::min(std::max<std::size_t>(1, workers), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
}

}  // namespace puzzleforge
