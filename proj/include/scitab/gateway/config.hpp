#pragma once

#include "scitab/gateway/model_class.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

namespace scitab::gateway {

// Gateway configuration file (JSON):
//   {
//     "provider": "openai" | "mock",
//     "base_url": "https://api.openai.com/v1",
//     "api_key_env": "SCITAB_API_KEY",
//     "models": {"reasoner": "...", "summarizer": "...", "vision": "...", "embedder": "..."},
//     "budget": 4,
//     "cache_dir": ".scitab-cache",
//     "cache_enabled": true,
//     "max_retries": 3,
//     "backoff_ms": 200,
//     "timeout_s": 60,
//     "embed_batch": 64,
//     "embed_max_chars": 8000,
//     "max_image_bytes": 4194304
//   }
struct GatewayConfig {
    std::string provider = "openai";
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "SCITAB_API_KEY";
    std::map<ModelClass, std::string> models = {
        {ModelClass::reasoner, "gpt-4o"},
        {ModelClass::summarizer, "gpt-3.5-turbo"},
        {ModelClass::vision, "gpt-4o"},
        {ModelClass::embedder, "text-embedding-3-small"},
    };
    int budget = 4;
    std::filesystem::path cache_dir;  // empty: in-memory cache only
    bool cache_enabled = true;
    int max_retries = 3;
    std::chrono::milliseconds backoff{200};
    std::chrono::seconds timeout{60};
    std::size_t embed_batch = 64;
    std::size_t embed_max_chars = 8000;
    std::size_t max_image_bytes = 4u << 20;

    const std::string& model_id(ModelClass c) const;

    // Throws ConfigError when a model class has no id or a limit is nonpositive.
    void validate() const;

    static GatewayConfig from_json(const nlohmann::ordered_json& j);
    static GatewayConfig load(const std::filesystem::path& path);
};

}  // namespace scitab::gateway
