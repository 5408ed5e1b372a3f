#include <httplib.h>

#include "scitab/gateway/openai_provider.hpp"

#include "scitab/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>

namespace scitab::gateway {

using json = nlohmann::ordered_json;

OpenAIProvider::OpenAIProvider(std::string base_url, std::string api_key, std::chrono::seconds timeout)
    : api_key_(std::move(api_key)), timeout_(timeout) {
    auto scheme_end = base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base_url must include a scheme: " + base_url);
    auto path_start = base_url.find('/', scheme_end + 3);
    origin_ = base_url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? std::string() : base_url.substr(path_start);
    while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
}

OpenAIProvider OpenAIProvider::from_config(const GatewayConfig& config) {
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0')
        throw ConfigError("environment variable " + config.api_key_env + " holds no provider key");
    return OpenAIProvider(config.base_url, key, config.timeout);
}

std::string OpenAIProvider::post(const std::string& path, const std::string& body) {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    httplib::Headers headers{{"Authorization", "Bearer " + api_key_}};
    auto res = client.Post(prefix_ + path, headers, body, "application/json");
    if (!res) throw ProviderError("HTTP request failed: " + httplib::to_string(res.error()), true);
    if (res->status == 429 || res->status >= 500)
        throw ProviderError("provider returned HTTP " + std::to_string(res->status), true, res->status);
    if (res->status >= 400)
        throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body, false,
                            res->status);
    return res->body;
}

std::string OpenAIProvider::chat(const ChatRequest& request) {
    json content;
    if (request.image_base64) {
        content = json::array({
            {{"type", "text"}, {"text", request.prompt}},
            {{"type", "image_url"},
             {"image_url", {{"url", "data:" + request.image_mime + ";base64," + *request.image_base64}}}},
        });
    } else {
        content = request.prompt;
    }
    json body{{"model", request.model_id},
              {"temperature", request.temperature},
              {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
    auto reply = json::parse(post("/chat/completions", body.dump()), nullptr, false);
    try {
        return reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed chat completion response: ") + e.what(), false);
    }
}

std::vector<std::vector<double>> OpenAIProvider::embed(const std::string& model_id,
                                                       const std::vector<std::string>& texts) {
    json body{{"model", model_id}, {"input", texts}};
    auto reply = json::parse(post("/embeddings", body.dump()), nullptr, false);
    try {
        std::vector<std::vector<double>> out(texts.size());
        for (const auto& item : reply.at("data")) {
            auto idx = item.at("index").get<std::size_t>();
            if (idx >= out.size()) throw ProviderError("embedding index out of range", false);
            out[idx] = item.at("embedding").get<std::vector<double>>();
        }
        return out;
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed embeddings response: ") + e.what(), false);
    }
}

}  // namespace scitab::gateway
