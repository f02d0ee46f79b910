#include <chrono>
#include <cstdlib>

#ifdef GPA_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>
#include <json.hpp>

#include "gpa/backend.hpp"

namespace gpa {

using nlohmann::json;

namespace {

struct ParsedUrl {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

ParsedUrl split_url(const std::string& url) {
    std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw Error(ErrorCode::BadConfig, "endpoint '" + url + "' has no scheme");
    }
    std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

LiveBackend::LiveBackend(LiveBackendConfig config) : config_(std::move(config)) {
    if (config_.endpoint.empty()) {
        throw Error(ErrorCode::BadConfig, "live backend requires an endpoint URL");
    }
}

BackendResponse LiveBackend::complete(const BackendRequest& request) {
    ParsedUrl url = split_url(config_.endpoint);

    json body;
    body["model"] = request.model_id;
    body["messages"] = json::array();
    if (!request.system_text.empty()) {
        body["messages"].push_back({{"role", "system"}, {"content", request.system_text}});
    }
    body["messages"].push_back({{"role", "user"}, {"content", request.user_text}});
    if (request.temperature.has_value()) {
        body["temperature"] = *request.temperature;
    }
    if (!request.reasoning_effort.empty()) {
        body["reasoning_effort"] = request.reasoning_effort;
    }

    httplib::Client client(url.origin);
    client.set_connection_timeout(config_.timeout_seconds);
    client.set_read_timeout(config_.timeout_seconds);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || key[0] == '\0') {
            throw Error(ErrorCode::BadConfig,
                        "environment variable " + config_.api_key_env + " is not set");
        }
        headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    auto started = std::chrono::steady_clock::now();
    httplib::Result res = client.Post(url.path, headers, body.dump(), "application/json");
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();

    if (!res) {
        throw TransientBackendError("connection failure: " + httplib::to_string(res.error()));
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransientBackendError("HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::BackendExhausted,
                    "HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded()) {
        throw TransientBackendError("response body is not JSON");
    }

    BackendResponse response;
    response.latency_ms = elapsed;
    try {
        response.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::BackendExhausted, "unexpected completion schema: " + res->body);
    }
    if (doc.contains("usage")) {
        response.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
        response.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
    }
    return response;
}

}  // namespace gpa
