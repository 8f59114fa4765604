#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "multisurf/base64.hpp"
#include "multisurf/errors.hpp"
#include "multisurf/model_backend.hpp"

namespace multisurf {

enum class BackendMode { live, replay, record };

inline std::string_view to_string(BackendMode m) {
    switch (m) {
        case BackendMode::live: return "live";
        case BackendMode::replay: return "replay";
        case BackendMode::record: return "record";
    }
    return "?";
}

inline std::optional<BackendMode> backend_mode_from_string(std::string_view s) {
    if (s == "live") return BackendMode::live;
    if (s == "replay") return BackendMode::replay;
    if (s == "record") return BackendMode::record;
    return std::nullopt;
}

struct BackendConfig {
    BackendMode mode = BackendMode::replay;
    std::string endpoint_url;            // live/record: chat-completion style endpoint
    std::filesystem::path cache_path;    // replay/record
    std::string api_key_env = "MULTISURF_API_KEY";
    int max_in_flight = 4;
    double requests_per_second = 0.0;    // 0 = unthrottled
    int max_attempts = 3;
    std::chrono::milliseconds backoff_base{250};
    std::chrono::milliseconds timeout{60000};
};

namespace detail {

struct ParsedUrl {
    std::string scheme_host_port;  // e.g. "http://127.0.0.1:8080"
    std::string path;              // e.g. "/v1/chat/completions"
};

inline ParsedUrl split_url(const std::string& url) {
    const std::size_t scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw Error("endpoint URL missing scheme: " + url);
    const std::size_t path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

/// Simple token bucket; a rate of 0 disables throttling.
class TokenBucket {
public:
    TokenBucket(double per_second, double burst)
        : per_second_(per_second), capacity_(burst), tokens_(burst),
          last_(std::chrono::steady_clock::now()) {}

    void acquire() {
        if (per_second_ <= 0.0) return;
        std::unique_lock lock(mutex_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const double deficit = 1.0 - tokens_;
            const auto wait = std::chrono::duration<double>(deficit / per_second_);
            cv_.wait_for(lock, wait);
        }
    }

private:
    void refill() {
        const auto now = std::chrono::steady_clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
    }

    double per_second_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
    std::mutex mutex_;
    std::condition_variable cv_;
};

/// Counting gate for the in-flight request cap.
class InflightGate {
public:
    explicit InflightGate(int cap) : cap_(cap < 1 ? 1 : cap) {}

    void enter() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return active_ < cap_; });
        ++active_;
    }
    void leave() {
        std::lock_guard lock(mutex_);
        --active_;
        cv_.notify_one();
    }

private:
    int cap_;
    int active_ = 0;
    std::mutex mutex_;
    std::condition_variable cv_;
};

inline nlohmann::json request_body_json(const ModelRequest& r) {
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", r.prompt.text}});
    for (const auto& a : r.prompt.attachments) {
        const std::string data_url =
            "data:" + a.media_type + ";base64," + base64_encode(a.bytes);
        if (a.role == AttachmentRole::exemplar || a.role == AttachmentRole::query) {
            content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url}}}});
        } else {
            const char* name = a.role == AttachmentRole::csv ? "data.csv" : "document.pdf";
            content.push_back(
                {{"type", "file"}, {"file", {{"filename", name}, {"file_data", data_url}}}});
        }
    }
    nlohmann::json body;
    body["model"] = r.model_id;
    body["temperature"] = r.temperature;
    body["max_tokens"] = r.max_output_tokens;
    body["messages"] = nlohmann::json::array({nlohmann::json{{"role", "user"}, {"content", content}}});
    return body;
}

inline std::string extract_completion_text(const std::string& body, int status) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
        throw EndpointError(status, "unparseable response body: " + body.substr(0, 120));
    }
    if (!j.contains("choices") || !j["choices"].is_array() || j["choices"].empty())
        throw EndpointError(status, "response has no choices: " + body.substr(0, 120));
    const auto& msg = j["choices"][0]["message"];
    if (msg.contains("content") && msg["content"].is_string()) return msg["content"].get<std::string>();
    if (msg.contains("content") && msg["content"].is_array()) {
        std::string text;
        for (const auto& part : msg["content"])
            if (part.contains("text")) text += part["text"].get<std::string>();
        return text;
    }
    throw EndpointError(status, "message has no content: " + body.substr(0, 120));
}

}  // namespace detail

/// One HTTP round trip per query against a chat-completion style endpoint,
/// with bounded retries on transient failures (transport errors, 429, 5xx).
class LiveBackend : public Backend {
public:
    explicit LiveBackend(BackendConfig config)
        : config_(std::move(config)),
          bucket_(config_.requests_per_second, std::max(1.0, config_.requests_per_second)),
          gate_(config_.max_in_flight) {}

    ModelResponse send(const ModelRequest& request) override {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key == nullptr || *key == '\0') throw MissingCredential(config_.api_key_env);

        const std::string digest = cache_key(request);
        const std::string body = detail::request_body_json(request).dump();
        const auto url = detail::split_url(config_.endpoint_url);

        gate_.enter();
        struct Leave {
            detail::InflightGate& g;
            ~Leave() { g.leave(); }
        } leave{gate_};

        const auto start = std::chrono::steady_clock::now();
        std::string last_error;
        for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
            if (attempt > 1)
                std::this_thread::sleep_for(config_.backoff_base * (1 << (attempt - 2)));
            bucket_.acquire();

            httplib::Client client(url.scheme_host_port);
            const auto secs =
                std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
            client.set_read_timeout(secs, 0);
            client.set_write_timeout(secs, 0);
            client.set_connection_timeout(secs, 0);
            httplib::Headers headers{{"Authorization", std::string("Bearer ") + key}};

            auto result = client.Post(url.path, headers, body, "application/json");
            if (!result) {
                last_error = httplib::to_string(result.error());
                continue;  // transport error: retry
            }
            const int status = result->status;
            if (status == 429 || (status >= 500 && status < 600)) {
                last_error = "status " + std::to_string(status);
                continue;
            }
            if (status < 200 || status >= 300) throw EndpointError(status, result->body);

            ModelResponse resp;
            resp.text = detail::extract_completion_text(result->body, status);
            resp.backend = BackendKind::live;
            resp.request_digest = digest;
            resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - start);
            return resp;
        }
        throw TimeoutError("gave up after " + std::to_string(config_.max_attempts) +
                           " attempts (" + last_error + ")");
    }

    BackendKind kind() const override { return BackendKind::live; }

private:
    BackendConfig config_;
    detail::TokenBucket bucket_;
    detail::InflightGate gate_;
};

/// Live backend that fills a replay cache. A digest already present in the
/// cache is answered from it without a network call, so recording runs are
/// resumable.
class RecordBackend : public Backend {
public:
    RecordBackend(BackendConfig config, ReplayCache cache)
        : live_(config), cache_(std::move(cache)) {}

    ModelResponse send(const ModelRequest& request) override {
        const std::string digest = cache_key(request);
        if (const auto hit = cache_.find(digest)) {
            ModelResponse resp;
            resp.text = hit->text;
            resp.backend = BackendKind::replay;
            resp.request_digest = digest;
            return resp;
        }
        ModelResponse resp = live_.send(request);
        cache_.record(digest, request.model_id, resp.text);
        return resp;
    }

    BackendKind kind() const override { return BackendKind::live; }

    const ReplayCache& cache() const { return cache_; }

private:
    LiveBackend live_;
    ReplayCache cache_;
};

inline std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
    switch (config.mode) {
        case BackendMode::replay:
            return std::make_unique<ReplayBackend>(ReplayCache::load(config.cache_path));
        case BackendMode::record:
            return std::make_unique<RecordBackend>(
                config, ReplayCache::load(config.cache_path, /*allow_missing=*/true));
        case BackendMode::live:
            return std::make_unique<LiveBackend>(config);
    }
    throw Error("unknown backend mode");
}

}  // namespace multisurf
