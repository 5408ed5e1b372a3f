#pragma once

#include "scitab/gateway/provider.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <vector>

namespace scitab::gateway {

// One scripted answer. A rule matches when the template matches (for repair
// prompts, the template being repaired), the stage matches, every `contains`
// string occurs in the rendered prompt, and `doc_id` (if set) equals the
// request's doc_id binding. Successive matches walk `responses`; the last repeats.
struct MockRule {
    enum class Stage { any, initial, repair };

    std::string template_id;
    Stage stage = Stage::any;
    std::vector<std::string> contains;
    std::string doc_id;
    std::vector<std::string> responses;
    bool fail = false;  // simulate an outage for matching prompts
    std::size_t next = 0;
};

// Mock script file (JSON):
//   {
//     "embedding_dim": 256,
//     "rules": [{"template": "...", "stage": "initial|repair|any", "contains": ["..."],
//                "doc_id": "...", "response": "..." | "response_json": {...} | "responses": [...],
//                "fail": false}],
//     "prompt_digests": {"<sha256 of rendered prompt>": "response"},
//     "lexicon": {"column_name": ["candidate value", ...]},
//     "vectors": {"exact text": [1.0, 0.0, ...]},
//     "down": ["vision", ...]
//   }
struct MockScript {
    std::size_t embedding_dim = 256;
    std::vector<MockRule> rules;
    std::map<std::string, std::string> prompt_digests;
    std::map<std::string, std::vector<std::string>> lexicon;
    std::map<std::string, std::vector<double>> vectors;
    std::set<ModelClass> down;

    static MockScript from_json(const nlohmann::ordered_json& j);
    static MockScript load(const std::filesystem::path& path);
};

// Deterministic offline provider. Resolution order: prompt digest table,
// scripted rules, then a built-in fallback per template that imitates a
// cooperative, grounding-only model (e.g. extraction answers only with lexicon
// values found verbatim in the contexts, everything else "Empty").
class MockProvider : public Provider {
public:
    MockProvider();
    explicit MockProvider(MockScript script);

    std::string chat(const ChatRequest& request) override;
    std::vector<std::vector<double>> embed(const std::string& model_id,
                                           const std::vector<std::string>& texts) override;

    void add_rule(MockRule rule);
    void set_vector(const std::string& text, std::vector<double> v);
    void set_down(ModelClass c, bool down);
    void set_all_down(bool down);
    // Artificial latency per call; used to probe concurrency limits.
    void set_delay(std::chrono::milliseconds d) { delay_ = d; }

    std::size_t chat_calls() const;
    std::size_t embed_calls() const;
    std::size_t calls_for(const std::string& template_id) const;
    int peak_concurrency() const noexcept { return peak_.load(); }

    // Hashed bag of words plus character trigrams; exposed for tests.
    static std::vector<double> hashed_embedding(const std::string& text, std::size_t dim);

private:
    std::string fallback(const ChatRequest& request, const std::string& effective_template) const;
    void enter();
    void leave();

    mutable std::mutex mutex_;
    MockScript script_;
    std::map<std::string, std::size_t> calls_by_template_;
    std::size_t chat_calls_ = 0;
    std::size_t embed_calls_ = 0;
    std::chrono::milliseconds delay_{0};
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
};

}  // namespace scitab::gateway
