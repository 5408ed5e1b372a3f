#include "scitab/gateway/gateway.hpp"

#include "scitab/digest.hpp"
#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/text.hpp"

#include <algorithm>
#include <map>
#include <thread>

namespace scitab::gateway {

CallBudget::CallBudget(int limit) : limit_(limit) {
    if (limit <= 0) throw ConfigError("call budget must be positive");
}

CallBudget::Permit::~Permit() {
    if (owner_) owner_->release();
}

CallBudget::Permit CallBudget::acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return in_flight_ < limit_; });
    ++in_flight_;
    int seen = peak_.load();
    while (in_flight_ > seen && !peak_.compare_exchange_weak(seen, in_flight_)) {
    }
    return Permit(this);
}

void CallBudget::release() {
    {
        std::lock_guard lock(mutex_);
        --in_flight_;
    }
    cv_.notify_one();
}

void Diagnostics::warn(std::string message) {
    std::lock_guard lock(mutex_);
    warnings_.push_back(std::move(message));
}

std::vector<std::string> Diagnostics::warnings() const {
    std::lock_guard lock(mutex_);
    return warnings_;
}

std::size_t Diagnostics::count() const {
    std::lock_guard lock(mutex_);
    return warnings_.size();
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Provider> provider, const TemplateRegistry& templates)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      templates_(&templates),
      cache_(config_.cache_dir, config_.cache_enabled),
      budget_(config_.budget),
      downscaler_(downscale_jpeg) {
    config_.validate();
    if (!provider_) throw ConfigError("gateway requires a provider");
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Provider> provider)
    : Gateway(std::move(config), std::move(provider), shipped_templates()) {}

template <typename F>
auto Gateway::with_retries(F&& f) -> decltype(f()) {
    for (int attempt = 0;; ++attempt) {
        try {
            return f();
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= config_.max_retries)
                throw GatewayError(std::string("provider call failed: ") + e.what());
            ++retries_;
            std::this_thread::sleep_for(config_.backoff * (1 << std::min(attempt, 10)));
        }
    }
}

std::string Gateway::call_chat(ChatRequest request, const std::string& cache_key) {
    bool hit = false;
    auto payload = cache_.get_or_compute(
        cache_key,
        [&] {
            return with_retries([&] {
                auto permit = budget_.acquire();
                ++provider_calls_;
                ++chat_calls_;
                return provider_->chat(request);
            });
        },
        &hit);
    if (hit) ++cache_hits_;
    return payload;
}

std::string Gateway::complete(std::string_view template_id, const Bindings& bindings,
                              std::optional<ModelClass> model_class) {
    const auto& t = templates_->get(template_id);
    ChatRequest req;
    req.prompt = t.render(bindings);
    req.model_class = model_class.value_or(t.model_class());
    req.model_id = config_.model_id(req.model_class);
    req.template_id = t.id();
    req.bindings = bindings;
    req.temperature = t.temperature();
    auto key = sha256_hex("chat\n" + req.model_id + "\n" + sha256_hex(req.prompt));
    return call_chat(std::move(req), key);
}

json Gateway::complete_structured(std::string_view template_id, const Bindings& bindings, const Shape& shape,
                                  const StructuredCheck& check, const TextPrefilter& prefilter) {
    const auto& t = templates_->get(template_id);
    auto accept = [&](const std::string& text, std::vector<std::string>& errors) -> std::optional<json> {
        std::optional<json> value;
        if (prefilter) value = prefilter(text);
        if (!value) value = parse_model_json(text);
        if (!value) {
            errors = {"the response is not valid JSON"};
            return std::nullopt;
        }
        errors = shape.validate(*value);
        if (errors.empty() && check) errors = check(*value);
        if (!errors.empty()) return std::nullopt;
        return value;
    };

    std::vector<std::string> errors;
    auto raw = complete(template_id, bindings);
    if (auto v = accept(raw, errors)) return *v;

    ++repairs_;
    diagnostics_.warn("repairing structured output for '" + t.id() + "': " + text::join(errors, "; "));
    Bindings repair{{"prompt", t.render(bindings)},
                    {"previous", raw},
                    {"errors", text::join(errors, "\n")},
                    {"original_template", t.id()}};
    auto repaired = complete(template_id::structured_repair, repair, t.model_class());
    if (auto v = accept(repaired, errors)) return *v;
    throw StructuredOutputError("structured output for '" + t.id() + "' invalid after repair: " +
                                    text::join(errors, "; "),
                                repaired);
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts) {
    if (texts.empty()) throw UsageError("embed requires at least one text");
    const auto& model = config_.model_id(ModelClass::embedder);

    std::vector<std::string> inputs;
    inputs.reserve(texts.size());
    for (const auto& t : texts) {
        if (text::utf8_length(t) > config_.embed_max_chars) {
            diagnostics_.warn("embedding input truncated to " + std::to_string(config_.embed_max_chars) + " chars");
            inputs.push_back(text::utf8_prefix(t, config_.embed_max_chars));
        } else {
            inputs.push_back(t);
        }
    }

    std::vector<std::optional<EmbeddingVector>> out(inputs.size());
    std::map<std::string, std::vector<std::size_t>> missing;  // key -> positions
    std::vector<std::string> keys(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        keys[i] = sha256_hex("embed\n" + model + "\n" + inputs[i]);
        if (auto cached = cache_.get(keys[i])) {
            auto j = json::parse(*cached, nullptr, false);
            if (j.is_array()) {
                out[i] = EmbeddingVector(j.get<std::vector<double>>());
                ++cache_hits_;
                continue;
            }
        }
        missing[keys[i]].push_back(i);
    }

    std::vector<std::string> batch_keys;
    for (const auto& [k, _] : missing) batch_keys.push_back(k);
    // Keep provider batches in first-occurrence order so mock runs are reproducible.
    std::sort(batch_keys.begin(), batch_keys.end(),
              [&](const std::string& a, const std::string& b) { return missing[a].front() < missing[b].front(); });

    for (std::size_t start = 0; start < batch_keys.size(); start += config_.embed_batch) {
        std::size_t end = std::min(batch_keys.size(), start + config_.embed_batch);
        std::vector<std::string> batch;
        for (std::size_t b = start; b < end; ++b) batch.push_back(inputs[missing[batch_keys[b]].front()]);
        auto raw = with_retries([&] {
            auto permit = budget_.acquire();
            ++provider_calls_;
            ++embed_calls_;
            return provider_->embed(model, batch);
        });
        if (raw.size() != batch.size())
            throw GatewayError("embedder returned " + std::to_string(raw.size()) + " vectors for " +
                               std::to_string(batch.size()) + " inputs");
        for (std::size_t b = start; b < end; ++b) {
            auto& values = raw[b - start];
            {
                std::lock_guard lock(dim_mutex_);
                if (embed_dimension_ == 0) embed_dimension_ = values.size();
                if (values.size() != embed_dimension_)
                    throw ConfigError("embedder dimension changed from " + std::to_string(embed_dimension_) + " to " +
                                      std::to_string(values.size()));
            }
            EmbeddingVector v;
            try {
                v = EmbeddingVector::normalized(std::move(values));
            } catch (const UsageError&) {
                throw GatewayError("embedder returned a zero vector");
            }
            cache_.put(batch_keys[b], json(std::vector<double>(v.values().begin(), v.values().end())).dump());
            for (auto pos : missing[batch_keys[b]]) out[pos] = v;
        }
    }

    std::vector<EmbeddingVector> result;
    result.reserve(out.size());
    for (auto& v : out) result.push_back(std::move(*v));
    return result;
}

std::string Gateway::image_call(std::span<const std::uint8_t> image, ChatRequest request) {
    if (image.empty()) throw UsageError("describe_image requires a nonempty image");
    std::vector<std::uint8_t> payload(image.begin(), image.end());
    if (payload.size() > config_.max_image_bytes) {
        std::optional<std::vector<std::uint8_t>> smaller;
        if (downscaler_) smaller = downscaler_(payload);
        if (!smaller || smaller->size() > config_.max_image_bytes)
            throw UsageError("image of " + std::to_string(image.size()) + " bytes exceeds the " +
                             std::to_string(config_.max_image_bytes) + "-byte limit after one downscale");
        diagnostics_.warn("image downscaled from " + std::to_string(image.size()) + " to " +
                          std::to_string(smaller->size()) + " bytes");
        payload = std::move(*smaller);
    }
    request.image_base64 = base64_encode(payload);
    request.model_class = ModelClass::vision;
    request.model_id = config_.model_id(ModelClass::vision);
    auto key = sha256_hex("vision\n" + request.model_id + "\n" + sha256_hex(request.prompt) + "\n" + sha256_hex(image));
    return call_chat(std::move(request), key);
}

std::string Gateway::describe_image(std::span<const std::uint8_t> image, std::string_view template_id,
                                    const Bindings& bindings) {
    const auto& t = templates_->get(template_id);
    ChatRequest req;
    req.prompt = t.render(bindings);
    req.template_id = t.id();
    req.bindings = bindings;
    req.temperature = t.temperature();
    return image_call(image, std::move(req));
}

std::string Gateway::describe_image(std::span<const std::uint8_t> image, std::string_view prompt_text) {
    ChatRequest req;
    req.prompt = std::string(prompt_text);
    req.temperature = 0.0;
    return image_call(image, std::move(req));
}

GatewayStats Gateway::stats() const {
    GatewayStats s;
    s.provider_calls = provider_calls_.load();
    s.chat_calls = chat_calls_.load();
    s.embed_calls = embed_calls_.load();
    s.cache_hits = cache_hits_.load();
    s.retries = retries_.load();
    s.repairs = repairs_.load();
    return s;
}

}  // namespace scitab::gateway
