#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "puzzleforge/domain.hpp"

namespace puzzleforge {

class LlmError : public Error {
public:
    using Error::Error;
};

class AuthError : public LlmError {
public:
    using LlmError::LlmError;
};

class RateLimited : public LlmError {
public:
    using LlmError::LlmError;
};

class BackendError : public LlmError {
public:
    using LlmError::LlmError;
};

/// Retryable failure raised by a backend; the client turns it into
/// RateLimited or BackendError once the retry budget is spent.
class TransientError : public LlmError {
public:
    TransientError(const std::string& message, bool rate_limited)
        : LlmError(message), rate_limited_(rate_limited) {}
    bool rate_limited() const noexcept { return rate_limited_; }

private:
    bool rate_limited_;
};

struct Message {
    std::string role;  // system | user | assistant
    std::string content;
};

struct CompletionRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.2;
    int max_tokens = 2048;
    std::optional<std::int64_t> seed;
};

/// Throws PreconditionError on empty messages, unknown roles, negative
/// temperature or non-positive max_tokens.
void validate(const CompletionRequest& request);

json request_to_json(const CompletionRequest& request);
CompletionRequest request_from_json(const json& j);
/// SHA-256 of the canonical request JSON; the mock backend's lookup key.
std::string request_hash(const CompletionRequest& request);

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct Transcript {
    CompletionRequest request;
    std::string response;
    double latency_ms = 0;
    Usage usage;
    std::string backend;
};

json transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const json& j);

struct BackendReply {
    std::string text;
    Usage usage;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    /// Replayed backends report zero latency so transcripts stay reproducible.
    virtual bool deterministic() const { return false; }
    /// Throws TransientError for retryable failures, AuthError / BackendError otherwise.
    virtual BackendReply send(const CompletionRequest& request) = 0;
};

/// Replays canned responses.
///
/// Lookup order: an exact request hash, then the first rule whose `contains`
/// substrings all occur in the concatenated messages (and whose optional seed
/// and model match). A miss raises BackendError.
class MockBackend : public Backend {
public:
    struct Rule {
        std::vector<std::string> contains;
        std::optional<std::int64_t> seed;
        std::optional<std::string> model;
        std::string response;
        /// "rate_limited", "server", "auth" or "backend" makes the rule fail instead.
        std::string error;
        /// With an error: fail this many times, then fall through to later rules. 0 means always.
        int times = 0;
        int fired = 0;
    };

    explicit MockBackend(std::string name = "mock") : name_(std::move(name)) {}

    std::string id() const override { return name_; }
    bool deterministic() const override { return true; }
    BackendReply send(const CompletionRequest& request) override;

    void add_response(const CompletionRequest& request, std::string response);
    void add_hash(std::string hash, std::string response);
    void add_rule(Rule rule);

    /// Accepts transcripts ({request, response}), hashed entries
    /// ({request_hash, response}) and rules ({match: {contains, seed, model}, response|error, times}).
    void load(const json& entry);
    void load_file(const std::filesystem::path& path);

    std::size_t calls() const;

private:
    std::string name_;
    mutable std::mutex mutex_;
    std::map<std::string, std::string> by_hash_;
    std::vector<Rule> rules_;
    std::size_t calls_ = 0;
};

/// OpenAI-style chat completion over HTTP(S).
class HttpBackend : public Backend {
public:
    HttpBackend(std::string url, std::string api_key, std::chrono::seconds timeout = std::chrono::seconds(120));

    std::string id() const override { return "http:" + url_; }
    BackendReply send(const CompletionRequest& request) override;

private:
    std::string url_;
    std::string api_key_;
    std::chrono::seconds timeout_;
};

struct RetryPolicy {
    int max = 3;
    std::chrono::milliseconds base{500};
};

struct CompletionResult {
    std::optional<std::string> text;
    std::string error;       // message when text is empty
    std::string error_kind;  // auth | rate_limited | backend | precondition

    bool ok() const noexcept { return text.has_value(); }
};

/// Thread-safe client: retries transient failures with exponential backoff and
/// records a Transcript for every successful call.
class Client {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Client(std::shared_ptr<Backend> backend, RetryPolicy retry = {}, std::size_t max_in_flight = 4);

    std::string complete(const CompletionRequest& request);

    /// Results are aligned with `requests`; one failure never aborts the batch.
    /// At most `max_in_flight` calls run at once (0 uses the client default).
    std::vector<CompletionResult> complete_many(const std::vector<CompletionRequest>& requests,
                                                std::size_t max_in_flight = 0);

    /// Transcripts sorted by request, so concurrent runs record identically.
    std::vector<Transcript> transcripts() const;
    void save_transcripts(const std::filesystem::path& path) const;

    const Backend& backend() const { return *backend_; }
    std::size_t max_in_flight() const noexcept { return max_in_flight_; }
    /// Highest number of simultaneous backend calls observed.
    std::size_t peak_in_flight() const noexcept { return peak_.load(); }
    void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

private:
    std::shared_ptr<Backend> backend_;
    RetryPolicy retry_;
    std::size_t max_in_flight_;
    Sleeper sleeper_;
    mutable std::mutex mutex_;
    std::vector<Transcript> transcripts_;
    std::atomic<std::size_t> in_flight_{0};
    std::atomic<std::size_t> peak_{0};
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace puzzleforge
