#include "scitab/gateway/config.hpp"

#include "scitab/error.hpp"

#include <fstream>

namespace scitab::gateway {

const std::string& GatewayConfig::model_id(ModelClass c) const {
    auto it = models.find(c);
    if (it == models.end() || it->second.empty())
        throw ConfigError("no model configured for class '" + std::string(to_string(c)) + "'");
    return it->second;
}

void GatewayConfig::validate() const {
    for (auto c : all_model_classes) (void)model_id(c);
    if (provider != "openai" && provider != "mock")
        throw ConfigError("unknown provider '" + provider + "'");
    if (budget <= 0) throw ConfigError("budget must be positive");
    if (max_retries < 0) throw ConfigError("max_retries must be nonnegative");
    if (embed_batch == 0) throw ConfigError("embed_batch must be positive");
    if (embed_max_chars == 0) throw ConfigError("embed_max_chars must be positive");
}

GatewayConfig GatewayConfig::from_json(const nlohmann::ordered_json& j) {
    if (!j.is_object()) throw ConfigError("gateway config must be a JSON object");
    GatewayConfig c;
    try {
        c.provider = j.value("provider", c.provider);
        c.base_url = j.value("base_url", c.base_url);
        c.api_key_env = j.value("api_key_env", c.api_key_env);
        if (j.contains("models")) {
            for (const auto& [k, v] : j.at("models").items()) c.models[model_class_from_string(k)] = v.get<std::string>();
        }
        c.budget = j.value("budget", c.budget);
        if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
        c.cache_enabled = j.value("cache_enabled", c.cache_enabled);
        c.max_retries = j.value("max_retries", c.max_retries);
        c.backoff = std::chrono::milliseconds(j.value("backoff_ms", static_cast<long>(c.backoff.count())));
        c.timeout = std::chrono::seconds(j.value("timeout_s", static_cast<long>(c.timeout.count())));
        c.embed_batch = j.value("embed_batch", c.embed_batch);
        c.embed_max_chars = j.value("embed_max_chars", c.embed_max_chars);
        c.max_image_bytes = j.value("max_image_bytes", c.max_image_bytes);
    } catch (const nlohmann::ordered_json::exception& e) {
        throw ConfigError(std::string("gateway config: ") + e.what());
    }
    c.validate();
    return c;
}

GatewayConfig GatewayConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open gateway config " + path.string());
    auto j = nlohmann::ordered_json::parse(in, nullptr, false);
    if (j.is_discarded()) throw ConfigError("gateway config " + path.string() + " is not valid JSON");
    return from_json(j);
}

}  // namespace scitab::gateway
