#pragma once

#include "scitab/gateway/gateway.hpp"
#include "scitab/gateway/mock_provider.hpp"
#include "scitab/gateway/templates.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>

namespace scitab::testing {

inline std::filesystem::path fixtures() { return SCITAB_FIXTURES_DIR; }

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct MockEnv {
    std::shared_ptr<gateway::MockProvider> mock;
    std::unique_ptr<gateway::Gateway> gw;

    gateway::Gateway& operator*() { return *gw; }
    gateway::Gateway* operator->() { return gw.get(); }
};

inline gateway::GatewayConfig mock_config(int budget = 4, std::filesystem::path cache_dir = {}) {
    gateway::GatewayConfig cfg;
    cfg.provider = "mock";
    cfg.budget = budget;
    cfg.cache_dir = std::move(cache_dir);
    cfg.max_retries = 1;
    cfg.backoff = std::chrono::milliseconds(0);
    return cfg;
}

inline MockEnv mock_env(gateway::MockScript script = {}, int budget = 4, std::filesystem::path cache_dir = {}) {
    MockEnv env;
    env.mock = std::make_shared<gateway::MockProvider>(std::move(script));
    env.gw = std::make_unique<gateway::Gateway>(mock_config(budget, std::move(cache_dir)), env.mock);
    return env;
}

inline MockEnv lm_env(std::filesystem::path cache_dir = {}) {
    return mock_env(gateway::MockScript::load(fixtures() / "lm" / "mock.json"), 4, std::move(cache_dir));
}

inline gateway::MockRule rule(std::string_view template_id, std::vector<std::string> responses,
                              std::vector<std::string> contains = {}) {
    gateway::MockRule r;
    r.template_id = std::string(template_id);
    r.responses = std::move(responses);
    r.contains = std::move(contains);
    return r;
}

inline gateway::MockRule outage(std::string_view template_id) {
    gateway::MockRule r;
    r.template_id = std::string(template_id);
    r.fail = true;
    return r;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = std::filesystem::temp_directory_path() / ("scitab-test-" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string& leaf) const { return path_ / leaf; }

private:
    std::filesystem::path path_;
};

inline const std::string kLmQuestion = "What are the tasks and accuracy of different LMs?";

}  // namespace scitab::testing
