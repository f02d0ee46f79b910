#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "gpa/judges.hpp"

namespace gpa {

struct BackendRequest {
    std::string system_text;
    std::string user_text;
    std::string model_id;
    std::optional<double> temperature;   // unpinned by default
    std::string reasoning_effort = "high";
    int run_index = 0;
    std::string content_hash;
    // Routing metadata for scripted backends; live backends ignore these.
    std::string judge_id;
    std::string trace_id;
};

struct BackendResponse {
    std::string text;
    std::int64_t latency_ms = 0;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    int attempts = 1;
};

// Failure the caller may retry (rate limit, 5xx, connection drop).
class TransientBackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LlmBackend {
public:
    virtual ~LlmBackend() = default;
    virtual BackendResponse complete(const BackendRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Response store keyed by (content_hash, model_id, run_index); run_index is
// part of the key so repeated runs stay distinct calls. Safe for concurrent
// readers and writers; identical keys carry identical values in replay use,
// so last-write-wins is harmless.
class ResponseCache {
public:
    static std::string key(const std::string& content_hash, const std::string& model_id,
                           int run_index);

    std::optional<std::string> get(const std::string& key) const;
    void put(const std::string& key, const std::string& text);
    std::size_t size() const;

    // JSON Lines: {"content_hash","model_id","run_index","text"} per line.
    void load_file(const std::string& path);
    void save_file(const std::string& path) const;
    void append_entry(const std::string& path, const std::string& content_hash,
                      const std::string& model_id, int run_index, const std::string& text);

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, std::string> entries_;
};

struct RetryPolicy {
    int attempt_cap = 3;
    int backoff_base_ms = 100;
    // Injection point so tests don't sleep.
    std::function<void(int)> sleep_ms;
};

// Serves from cache when possible; otherwise calls the backend, retrying
// transient failures with exponential backoff, and stores the result.
// Throws BackendExhausted when the attempt cap is hit and
// CacheMissInReplayMode straight through from a replay backend.
BackendResponse invoke(LlmBackend& backend, ResponseCache* cache, const PromptBundle& bundle,
                       int run_index, const std::string& model_id, const RetryPolicy& policy,
                       std::optional<double> temperature = std::nullopt,
                       const std::string& reasoning_effort = "high");

// --- Backends ---------------------------------------------------------

// Deterministic stand-in. Fixed profile scores depend only on the prompt
// pair; jitter mixes run_index in. Scripted mode resolves
// (judge_id, trace_id, run_index) against an explicit table.
class MockBackend : public LlmBackend {
public:
    enum class Profile { FIXED, JITTER, SCRIPTED };

    struct ScriptEntry {
        std::string judge_id;
        std::string trace_id;
        std::optional<int> run_index;  // absent = all runs
        int score = 3;
        std::vector<std::string> cite_spans;
        std::string evidence;
        std::optional<std::string> raw_text;  // overrides the template entirely
    };

    explicit MockBackend(Profile profile = Profile::FIXED);

    void add_script_entry(ScriptEntry entry);
    void load_script_file(const std::string& path);

    // The next `count` calls throw (transient or fatal); used to exercise
    // the retry path.
    void fail_next(int count, bool transient = true);

    int calls() const { return calls_; }

    BackendResponse complete(const BackendRequest& request) override;
    std::string name() const override { return "mock"; }

private:
    Profile profile_;
    std::vector<ScriptEntry> script_;
    int fail_remaining_ = 0;
    bool fail_transient_ = true;
    int calls_ = 0;
    mutable std::mutex mutex_;
};

// Serves recorded responses; throws CacheMissInReplayMode for unknown keys.
class ReplayBackend : public LlmBackend {
public:
    explicit ReplayBackend(const std::string& recording_path);

    BackendResponse complete(const BackendRequest& request) override;
    std::string name() const override { return "replay"; }

private:
    ResponseCache recorded_;
};

struct LiveBackendConfig {
    std::string endpoint;        // e.g. https://host/v1/chat/completions
    std::string api_key_env;     // environment variable holding the key
    int timeout_seconds = 120;
};

// OpenAI-style chat completions over HTTP(S).
class LiveBackend : public LlmBackend {
public:
    explicit LiveBackend(LiveBackendConfig config);

    BackendResponse complete(const BackendRequest& request) override;
    std::string name() const override { return "live"; }

private:
    LiveBackendConfig config_;
};

}  // namespace gpa
