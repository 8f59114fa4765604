#pragma once

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "multisurf/errors.hpp"
#include "multisurf/prompt.hpp"
#include "multisurf/sha256.hpp"

namespace multisurf {

struct ModelRequest {
    std::string model_id;
    RenderedPrompt prompt;
    double temperature = 0.0;
    int max_output_tokens = 256;
};

enum class BackendKind { live, replay };

inline std::string_view to_string(BackendKind k) {
    return k == BackendKind::live ? "live" : "replay";
}

struct ModelResponse {
    std::string text;
    BackendKind backend = BackendKind::replay;
    std::chrono::milliseconds latency{0};
    std::string request_digest;  // 64 hex chars, == cache_key(request)
};

namespace detail {

/// Canonical serialization hashed by cache_key. Every variable-length field
/// is length-prefixed so distinct requests can never serialize identically.
inline std::string canonical_request(const ModelRequest& r) {
    std::string s = "multisurf-request-v1\n";
    auto field = [&s](std::string_view name, std::string_view value) {
        s += name;
        s += ':';
        s += std::to_string(value.size());
        s += ':';
        s += value;
        s += '\n';
    };
    field("model", r.model_id);
    char tbuf[40];
    std::snprintf(tbuf, sizeof(tbuf), "%.17g", r.temperature);
    field("temperature", tbuf);
    field("max_tokens", std::to_string(r.max_output_tokens));
    field("text", r.prompt.text);
    for (const auto& a : r.prompt.attachments) {
        s += "attachment:";
        s += to_string(a.role);
        s += ':';
        if (a.label_hint) {
            s += std::to_string(a.label_hint->size());
            s += ':';
            s += *a.label_hint;
        } else {
            s += "-";
        }
        s += ':';
        s += sha256_hex(a.bytes);
        s += '\n';
    }
    return s;
}

inline std::string rfc3339_utc_now() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

inline bool is_hex64(std::string_view s) {
    if (s.size() != 64) return false;
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

}  // namespace detail

/// Content address of a request: SHA-256 over the canonical serialization.
/// Also the chokepoint that enforces the request invariants, since every
/// backend derives the digest before doing anything else.
inline std::string cache_key(const ModelRequest& request) {
    if (request.temperature < 0.0) throw Error("temperature must be >= 0");
    if (request.max_output_tokens <= 0) throw Error("max_output_tokens must be positive");
    return sha256_hex(detail::canonical_request(request));
}

struct CacheEntry {
    std::string model_id;
    std::string text;
    std::string recorded_at;  // RFC3339
};

/// Append-only JSON-lines store of recorded responses, keyed by digest.
/// Concurrent reads are free; appends are serialized by a writer mutex.
class ReplayCache {
public:
    ReplayCache() = default;

    // the mutex guards per-instance state and is not transferred
    ReplayCache(ReplayCache&& other) noexcept
        : path_(std::move(other.path_)),
          entries_(std::move(other.entries_)),
          order_(std::move(other.order_)) {}
    ReplayCache& operator=(ReplayCache&& other) noexcept {
        if (this != &other) {
            std::unique_lock lock(mutex_);
            path_ = std::move(other.path_);
            entries_ = std::move(other.entries_);
            order_ = std::move(other.order_);
        }
        return *this;
    }

    /// Parse a JSONL cache file. A missing file is an empty cache only when
    /// allow_missing is set (the recorder starts from nothing).
    static ReplayCache load(const std::filesystem::path& path, bool allow_missing = false) {
        ReplayCache cache;
        cache.path_ = path;
        std::ifstream in(path, std::ios::binary);
        if (!in) {
            if (allow_missing) return cache;
            throw FileUnreadable(path.string());
        }
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw CorruptCacheLine(line_no, e.what());
            }
            if (!j.is_object() || !j.contains("digest") || !j.contains("model_id") ||
                !j.contains("text") || !j.contains("recorded_at"))
                throw CorruptCacheLine(line_no, "missing required field");
            const std::string digest = j["digest"].get<std::string>();
            if (!detail::is_hex64(digest)) throw CorruptCacheLine(line_no, "digest is not 64 hex chars");
            if (cache.entries_.count(digest)) continue;  // first occurrence wins, as in record()
            CacheEntry e{j["model_id"].get<std::string>(), j["text"].get<std::string>(),
                         j["recorded_at"].get<std::string>()};
            cache.entries_[digest] = std::move(e);
            cache.order_.push_back(digest);
        }
        return cache;
    }

    std::optional<CacheEntry> find(const std::string& digest) const {
        std::shared_lock lock(mutex_);
        auto it = entries_.find(digest);
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    /// Record a response: in-memory insert plus one appended JSONL line.
    void record(const std::string& digest, const std::string& model_id, const std::string& text) {
        std::unique_lock lock(mutex_);
        if (entries_.count(digest)) return;
        CacheEntry e{model_id, text, detail::rfc3339_utc_now()};
        if (!path_.empty()) {
            std::ofstream out(path_, std::ios::binary | std::ios::app);
            if (!out) throw WriteFailure(path_.string());
            out << entry_line(digest, e) << '\n';
        }
        entries_[digest] = e;
        order_.push_back(digest);
    }

    std::size_t size() const {
        std::shared_lock lock(mutex_);
        return entries_.size();
    }

    /// Digests in file order (insertion order for recorded entries).
    std::vector<std::string> digests() const {
        std::shared_lock lock(mutex_);
        return order_;
    }

    const CacheEntry& at(const std::string& digest) const {
        std::shared_lock lock(mutex_);
        return entries_.at(digest);
    }

    static std::string entry_line(const std::string& digest, const CacheEntry& e) {
        nlohmann::json j;
        j["digest"] = digest;
        j["model_id"] = e.model_id;
        j["text"] = e.text;
        j["recorded_at"] = e.recorded_at;
        return j.dump();
    }

private:
    std::filesystem::path path_;
    std::map<std::string, CacheEntry> entries_;
    std::vector<std::string> order_;
    mutable std::shared_mutex mutex_;
};

/// Backend contract: one call per query, concurrent use allowed.
class Backend {
public:
    virtual ~Backend() = default;
    virtual ModelResponse send(const ModelRequest& request) = 0;
    virtual BackendKind kind() const = 0;
};

/// Fixture-driven backend: answers from a ReplayCache, never touches the network.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(ReplayCache cache) : cache_(std::move(cache)) {}

    ModelResponse send(const ModelRequest& request) override {
        const auto start = std::chrono::steady_clock::now();
        const std::string digest = cache_key(request);
        const auto entry = cache_.find(digest);
        if (!entry) throw CacheMiss(digest);
        ModelResponse resp;
        resp.text = entry->text;
        resp.backend = BackendKind::replay;
        resp.request_digest = digest;
        resp.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - start);
        return resp;
    }

    BackendKind kind() const override { return BackendKind::replay; }

    const ReplayCache& cache() const { return cache_; }

private:
    ReplayCache cache_;
};

}  // namespace multisurf
