#include "gpa/backend.hpp"

#include <chrono>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "gpa/hash.hpp"

namespace gpa {

using nlohmann::json;

std::string ResponseCache::key(const std::string& content_hash, const std::string& model_id,
                               int run_index) {
    return content_hash + '\x1f' + model_id + '\x1f' + std::to_string(run_index);
}

std::optional<std::string> ResponseCache::get(const std::string& key) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void ResponseCache::put(const std::string& key, const std::string& text) {
    std::unique_lock lock(mutex_);
    entries_[key] = text;
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void ResponseCache::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read cache file " + path);
    }
    std::string line;
    std::unique_lock lock(mutex_);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) continue;  // tolerate torn tail lines
        if (!rec.contains("content_hash") || !rec.contains("model_id") ||
            !rec.contains("run_index") || !rec.contains("text")) {
            continue;
        }
        entries_[key(rec["content_hash"].get<std::string>(), rec["model_id"].get<std::string>(),
                     rec["run_index"].get<int>())] = rec["text"].get<std::string>();
    }
}

void ResponseCache::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write cache file " + path);
    }
    std::shared_lock lock(mutex_);
    for (const auto& [k, text] : entries_) {
        std::size_t first = k.find('\x1f');
        std::size_t second = k.find('\x1f', first + 1);
        json rec;
        rec["content_hash"] = k.substr(0, first);
        rec["model_id"] = k.substr(first + 1, second - first - 1);
        rec["run_index"] = std::stoi(k.substr(second + 1));
        rec["text"] = text;
        out << rec.dump() << '\n';
    }
}

void ResponseCache::append_entry(const std::string& path, const std::string& content_hash,
                                 const std::string& model_id, int run_index,
                                 const std::string& text) {
    std::ofstream out(path, std::ios::app);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot append to cache file " + path);
    }
    json rec;
    rec["content_hash"] = content_hash;
    rec["model_id"] = model_id;
    rec["run_index"] = run_index;
    rec["text"] = text;
    out << rec.dump() << '\n';
}

BackendResponse invoke(LlmBackend& backend, ResponseCache* cache, const PromptBundle& bundle,
                       int run_index, const std::string& model_id, const RetryPolicy& policy,
                       std::optional<double> temperature, const std::string& reasoning_effort) {
    const std::string key = ResponseCache::key(bundle.content_hash, model_id, run_index);
    if (cache != nullptr) {
        if (auto hit = cache->get(key)) {
            BackendResponse response;
            response.text = *hit;
            response.attempts = 0;  // served without touching the backend
            return response;
        }
    }

    BackendRequest request;
    request.system_text = bundle.system_text;
    request.user_text = bundle.user_text;
    request.model_id = model_id;
    request.temperature = temperature;
    request.reasoning_effort = reasoning_effort;
    request.run_index = run_index;
    request.content_hash = bundle.content_hash;
    request.judge_id = to_string(bundle.judge_id);
    request.trace_id = bundle.trace_id;

    auto sleep_ms = policy.sleep_ms
                        ? policy.sleep_ms
                        : [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); };

    int cap = std::max(policy.attempt_cap, 1);
    std::string last_failure;
    for (int attempt = 1; attempt <= cap; ++attempt) {
        try {
            BackendResponse response = backend.complete(request);
            response.attempts = attempt;
            if (cache != nullptr) {
                cache->put(key, response.text);
            }
            return response;
        } catch (const TransientBackendError& e) {
            last_failure = e.what();
            if (attempt < cap) {
                sleep_ms(policy.backoff_base_ms * (1 << (attempt - 1)));
            }
        }
        // Non-transient errors (including CacheMissInReplayMode) propagate.
    }
    throw Error(ErrorCode::BackendExhausted,
                "gave up after " + std::to_string(cap) + " attempts: " + last_failure);
}

// --- MockBackend --------------------------------------------------------

MockBackend::MockBackend(Profile profile) : profile_(profile) {}

void MockBackend::add_script_entry(ScriptEntry entry) {
    std::lock_guard lock(mutex_);
    script_.push_back(std::move(entry));
}

void MockBackend::load_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot read mock script " + path);
    }
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw Error(ErrorCode::BadConfig, "mock script " + path + " lacks an entries array");
    }
    for (const json& e : doc["entries"]) {
        ScriptEntry entry;
        entry.judge_id = e.value("judge", "");
        entry.trace_id = e.value("trace", "");
        if (e.contains("run")) entry.run_index = e["run"].get<int>();
        entry.score = e.value("score", 3);
        if (e.contains("cite")) {
            for (const json& s : e["cite"]) entry.cite_spans.push_back(s.get<std::string>());
        }
        entry.evidence = e.value("evidence", "");
        if (e.contains("raw_text")) entry.raw_text = e["raw_text"].get<std::string>();
        add_script_entry(std::move(entry));
    }
}

void MockBackend::fail_next(int count, bool transient) {
    std::lock_guard lock(mutex_);
    fail_remaining_ = count;
    fail_transient_ = transient;
}

namespace {

// First few span ids visible in the rendered transcript, in order.
std::vector<std::string> transcript_span_ids(const std::string& user_text, std::size_t limit) {
    std::vector<std::string> ids;
    std::size_t pos = 0;
    static const std::string kMarker = "[span ";
    while (ids.size() < limit && (pos = user_text.find(kMarker, pos)) != std::string::npos) {
        std::size_t start = pos + kMarker.size();
        std::size_t end = user_text.find(']', start);
        if (end == std::string::npos) break;
        std::string id = user_text.substr(start, end - start);
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
            ids.push_back(id);
        }
        pos = end;
    }
    return ids;
}

std::string render_mock_verdict(int score, const std::vector<std::string>& cite,
                                const std::string& evidence) {
    std::ostringstream out;
    out << "Criteria: Scored against the stated rubric on the 0 to 3 scale.\n";
    out << "Supporting Evidence: " << (evidence.empty() ? "No material issues found." : evidence);
    for (const std::string& id : cite) {
        out << " Issue observed in span " << id << ".";
    }
    out << "\nScore: " << score << "\n";
    return out.str();
}

}  // namespace

BackendResponse MockBackend::complete(const BackendRequest& request) {
    std::lock_guard lock(mutex_);
    ++calls_;
    if (fail_remaining_ > 0) {
        --fail_remaining_;
        if (fail_transient_) throw TransientBackendError("scripted transient failure");
        throw std::runtime_error("scripted fatal failure");
    }

    BackendResponse response;
    if (profile_ == Profile::SCRIPTED) {
        for (const ScriptEntry& entry : script_) {
            if (entry.judge_id != request.judge_id || entry.trace_id != request.trace_id) continue;
            if (entry.run_index.has_value() && *entry.run_index != request.run_index) continue;
            if (entry.raw_text.has_value()) {
                response.text = *entry.raw_text;
            } else {
                response.text = render_mock_verdict(entry.score, entry.cite_spans, entry.evidence);
            }
            return response;
        }
        // Unscripted pairs read as flawless runs.
        response.text = render_mock_verdict(3, {}, "");
        return response;
    }

    std::uint64_t seed = fnv1a64(request.system_text) ^ (fnv1a64(request.user_text) * 0x9E3779B9ULL);
    if (profile_ == Profile::JITTER) {
        seed ^= 0x5bd1e995ULL * static_cast<std::uint64_t>(request.run_index + 1);
    }
    std::uint64_t state = seed;
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;

    int score = static_cast<int>(z % 4);
    std::vector<std::string> ids = transcript_span_ids(request.user_text, 4);
    std::vector<std::string> cite;
    std::string evidence;
    if (score < 3 && !ids.empty()) {
        cite.push_back(ids[static_cast<std::size_t>(z >> 8) % ids.size()]);
        evidence = "Deterministic probe flagged a problem";
        if (profile_ == Profile::JITTER) {
            evidence += " variant " + std::to_string(static_cast<int>((z >> 16) % 7));
        }
        evidence += ".";
    }
    response.text = render_mock_verdict(score, cite, evidence);
    return response;
}

// --- ReplayBackend ------------------------------------------------------

ReplayBackend::ReplayBackend(const std::string& recording_path) {
    recorded_.load_file(recording_path);
}

BackendResponse ReplayBackend::complete(const BackendRequest& request) {
    auto hit = recorded_.get(
        ResponseCache::key(request.content_hash, request.model_id, request.run_index));
    if (!hit.has_value()) {
        throw Error(ErrorCode::CacheMissInReplayMode,
                    "no recorded response for judge " + request.judge_id + " trace " +
                        request.trace_id + " run " + std::to_string(request.run_index) +
                        " (hash " + request.content_hash + ")");
    }
    BackendResponse response;
    response.text = *hit;
    return response;
}

}  // namespace gpa
