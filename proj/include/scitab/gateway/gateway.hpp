#pragma once

#include "scitab/gateway/config.hpp"
#include "scitab/gateway/embedding.hpp"
#include "scitab/gateway/prompt_template.hpp"
#include "scitab/gateway/provider.hpp"
#include "scitab/gateway/response_cache.hpp"
#include "scitab/gateway/shape.hpp"

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scitab::gateway {

// Bounds the number of provider calls in flight; admission is FIFO-ish under one mutex.
class CallBudget {
public:
    explicit CallBudget(int limit);

    class Permit {
    public:
        explicit Permit(CallBudget* owner) : owner_(owner) {}
        Permit(Permit&& o) noexcept : owner_(std::exchange(o.owner_, nullptr)) {}
        Permit& operator=(Permit&&) = delete;
        ~Permit();

    private:
        CallBudget* owner_;
    };

    Permit acquire();
    int limit() const noexcept { return limit_; }
    int peak() const noexcept { return peak_.load(); }

private:
    void release();

    int limit_;
    int in_flight_ = 0;
    std::atomic<int> peak_{0};
    std::mutex mutex_;
    std::condition_variable cv_;
};

// Thread-safe sink for non-fatal events (repairs, degraded fallbacks, truncations).
class Diagnostics {
public:
    void warn(std::string message);
    std::vector<std::string> warnings() const;
    std::size_t count() const;

private:
    mutable std::mutex mutex_;
    std::vector<std::string> warnings_;
};

struct GatewayStats {
    std::uint64_t provider_calls = 0;  // chat + vision + embed batches that reached the provider
    std::uint64_t chat_calls = 0;
    std::uint64_t embed_calls = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t retries = 0;
    std::uint64_t repairs = 0;
};

// Optional hook applied before JSON parsing: returns a value to accept the text
// as-is (e.g. a bare "no" meaning an empty list), or nullopt to parse normally.
using TextPrefilter = std::function<std::optional<json>(std::string_view)>;

// Extra semantic validation after the shape check; returns error messages.
using StructuredCheck = std::function<std::vector<std::string>(const json&)>;

// Shrinks an image payload once; nullopt when the format is unsupported.
using ImageDownscaler = std::function<std::optional<std::vector<std::uint8_t>>(std::span<const std::uint8_t>)>;

class Gateway {
public:
    Gateway(GatewayConfig config, std::shared_ptr<Provider> provider,
            const TemplateRegistry& templates);
    Gateway(GatewayConfig config, std::shared_ptr<Provider> provider);

    const GatewayConfig& config() const noexcept { return config_; }
    const TemplateRegistry& templates() const noexcept { return *templates_; }
    Diagnostics& diagnostics() noexcept { return diagnostics_; }
    const CallBudget& budget() const noexcept { return budget_; }

    // Renders the template and returns provider text. Cached by (model id, prompt digest).
    // The template's own model class is used unless `model_class` is given.
    std::string complete(std::string_view template_id, const Bindings& bindings,
                         std::optional<ModelClass> model_class = std::nullopt);

    // complete() followed by fence stripping, JSON parsing and validation against
    // `shape`. On failure the model is re-prompted once with the validation errors;
    // a second failure throws StructuredOutputError carrying the raw text.
    // `check` adds semantic validation (participates in the repair round).
    json complete_structured(std::string_view template_id, const Bindings& bindings, const Shape& shape,
                             const StructuredCheck& check = {}, const TextPrefilter& prefilter = {});

    // One unit-norm vector per text, order preserved, cached per text.
    std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts);

    // Vision call with the image attached inline as a data URL.
    // Cached by (model, prompt digest, image digest).
    std::string describe_image(std::span<const std::uint8_t> image, std::string_view template_id,
                               const Bindings& bindings);
    std::string describe_image(std::span<const std::uint8_t> image, std::string_view prompt_text);

    void set_image_downscaler(ImageDownscaler d) { downscaler_ = std::move(d); }

    GatewayStats stats() const;

private:
    std::string call_chat(ChatRequest request, const std::string& cache_key);
    std::string image_call(std::span<const std::uint8_t> image, ChatRequest request);
    template <typename F>
    auto with_retries(F&& f) -> decltype(f());

    GatewayConfig config_;
    std::shared_ptr<Provider> provider_;
    const TemplateRegistry* templates_;
    ResponseCache cache_;
    CallBudget budget_;
    Diagnostics diagnostics_;
    ImageDownscaler downscaler_;
    std::mutex dim_mutex_;
    std::size_t embed_dimension_ = 0;

    std::atomic<std::uint64_t> provider_calls_{0};
    std::atomic<std::uint64_t> chat_calls_{0};
    std::atomic<std::uint64_t> embed_calls_{0};
    std::atomic<std::uint64_t> cache_hits_{0};
    std::atomic<std::uint64_t> retries_{0};
    std::atomic<std::uint64_t> repairs_{0};
};

// Halves a JPEG's resolution using libjpeg DCT scaling. nullopt for non-JPEG input.
std::optional<std::vector<std::uint8_t>> downscale_jpeg(std::span<const std::uint8_t> image);

}  // namespace scitab::gateway
