#pragma once

#include "scitab/gateway/config.hpp"
#include "scitab/gateway/provider.hpp"

#include <chrono>
#include <string>

namespace scitab::gateway {

// OpenAI-compatible chat-completions / embeddings client.
// POST {base_url}/chat/completions, POST {base_url}/embeddings, bearer token from
// the environment variable named in the config.
class OpenAIProvider : public Provider {
public:
    OpenAIProvider(std::string base_url, std::string api_key, std::chrono::seconds timeout);

    // Resolves the key from config.api_key_env; throws ConfigError when unset.
    static OpenAIProvider from_config(const GatewayConfig& config);

    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const std::string& model_id,
                                           const std::vector<std::string>& texts) override;

private:
    std::string post(const std::string& path, const std::string& body);

    std::string origin_;  // scheme://host[:port]
    std::string prefix_;  // path prefix, e.g. "/v1"
    std::string api_key_;
    std::chrono::seconds timeout_;
};

}  // namespace scitab::gateway
