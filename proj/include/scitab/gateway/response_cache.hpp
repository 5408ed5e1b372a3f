#pragma once

#include <filesystem>
#include <functional>
#include <future>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace scitab::gateway {

// Content-addressed response cache. Keys are hex digests; entries live in
// memory and, when a directory is configured, as files `<dir>/<key[0:2]>/<key>`.
// Concurrent readers; at most one computation per key in flight.
class ResponseCache {
public:
    explicit ResponseCache(std::filesystem::path dir = {}, bool enabled = true);

    bool enabled() const noexcept { return enabled_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    std::optional<std::string> get(const std::string& key);
    void put(const std::string& key, const std::string& payload);

    // Returns the cached payload or runs `compute` once per key (other callers
    // for the same key wait on the first). `hit` reports whether the payload came
    // from the cache. Exceptions from `compute` propagate and nothing is stored.
    std::string get_or_compute(const std::string& key, const std::function<std::string()>& compute,
                               bool* hit = nullptr);

    std::size_t size() const;

private:
    std::filesystem::path path_for(const std::string& key) const;

    std::filesystem::path dir_;
    bool enabled_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, std::string> memory_;
    std::mutex inflight_mutex_;
    std::map<std::string, std::shared_future<std::string>> inflight_;
};

}  // namespace scitab::gateway
