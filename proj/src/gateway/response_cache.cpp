#include "scitab/gateway/response_cache.hpp"

#include <fstream>
#include <sstream>
#include <thread>

namespace scitab::gateway {

namespace fs = std::filesystem;

ResponseCache::ResponseCache(fs::path dir, bool enabled) : dir_(std::move(dir)), enabled_(enabled) {
    if (enabled_ && !dir_.empty()) fs::create_directories(dir_);
}

fs::path ResponseCache::path_for(const std::string& key) const {
    return dir_ / key.substr(0, 2) / key;
}

std::optional<std::string> ResponseCache::get(const std::string& key) {
    if (!enabled_) return std::nullopt;
    {
        std::shared_lock lock(mutex_);
        if (auto it = memory_.find(key); it != memory_.end()) return it->second;
    }
    if (dir_.empty()) return std::nullopt;
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string payload = buf.str();
    std::unique_lock lock(mutex_);
    memory_.emplace(key, payload);
    return payload;
}

void ResponseCache::put(const std::string& key, const std::string& payload) {
    if (!enabled_) return;
    {
        std::unique_lock lock(mutex_);
        memory_.insert_or_assign(key, payload);
    }
    if (dir_.empty()) return;
    auto target = path_for(key);
    fs::create_directories(target.parent_path());
    std::ostringstream tmp_name;
    tmp_name << target.filename().string() << ".tmp." << std::this_thread::get_id();
    auto tmp = target.parent_path() / tmp_name.str();
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << payload;
    }
    fs::rename(tmp, target);
}

std::string ResponseCache::get_or_compute(const std::string& key, const std::function<std::string()>& compute,
                                          bool* hit) {
    if (hit) *hit = false;
    if (!enabled_) return compute();
    if (auto cached = get(key)) {
        if (hit) *hit = true;
        return *cached;
    }

    std::promise<std::string> promise;
    std::shared_future<std::string> pending;
    bool owner = false;
    {
        std::lock_guard lock(inflight_mutex_);
        if (auto it = inflight_.find(key); it != inflight_.end()) {
            pending = it->second;
        } else {
            pending = promise.get_future().share();
            inflight_.emplace(key, pending);
            owner = true;
        }
    }
    if (!owner) {
        if (hit) *hit = true;
        return pending.get();
    }

    auto finish = [&] {
        std::lock_guard lock(inflight_mutex_);
        inflight_.erase(key);
    };
    try {
        std::string payload = compute();
        put(key, payload);
        promise.set_value(payload);
        finish();
        return payload;
    } catch (...) {
        promise.set_exception(std::current_exception());
        finish();
        throw;
    }
}

std::size_t ResponseCache::size() const {
    std::shared_lock lock(mutex_);
    return memory_.size();
}

}  // namespace scitab::gateway
