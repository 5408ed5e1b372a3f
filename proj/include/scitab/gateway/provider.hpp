#pragma once

#include "scitab/gateway/model_class.hpp"
#include "scitab/gateway/prompt_template.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace scitab::gateway {

struct ChatRequest {
    ModelClass model_class = ModelClass::reasoner;
    std::string model_id;
    std::string template_id;  // informational; real providers ignore it
    Bindings bindings;        // informational; lets the mock provider resolve by content
    std::string prompt;
    double temperature = 0.0;
    std::optional<std::string> image_base64;
    std::string image_mime = "image/jpeg";
};

// Raised by providers. Retryable errors (timeouts, 429, 5xx) are retried by the gateway.
class ProviderError : public std::runtime_error {
public:
    ProviderError(const std::string& what, bool retryable, int status = 0)
        : std::runtime_error(what), retryable_(retryable), status_(status) {}

    bool retryable() const noexcept { return retryable_; }
    int status() const noexcept { return status_; }

private:
    bool retryable_;
    int status_;
};

class Provider {
public:
    virtual ~Provider() = default;

    virtual std::string chat(const ChatRequest& request) = 0;

    // One raw (not necessarily normalized) vector per input, same order.
    virtual std::vector<std::vector<double>> embed(const std::string& model_id,
                                                   const std::vector<std::string>& texts) = 0;
};

}  // namespace scitab::gateway
