#include "support.hpp"

#include "scitab/digest.hpp"
#include "scitab/error.hpp"
#include "scitab/gateway/config.hpp"
#include "scitab/gateway/openai_provider.hpp"
#include "scitab/gateway/response_cache.hpp"
#include "scitab/gateway/shape.hpp"
#include "scitab/parallel.hpp"

#include <httplib.h>
#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <thread>

using namespace scitab;
using namespace scitab::gateway;
using scitab::testing::mock_env;
using scitab::testing::rule;

namespace {

const Bindings kSummaryArgs{{"kind", "text"}, {"content", "Orange-fleshed sweet potato stores beta-carotene."}};

Shape answer_shape() { return Shape::object({{"answer", Shape::string()}}, false); }

}  // namespace

TEST(PromptTemplate, PlaceholdersAndEscapes) {
    PromptTemplate t("t", "a {x} {{literal}} {y} {x}", ModelClass::reasoner, 0.0);
    EXPECT_EQ(t.required(), (std::vector<std::string>{"x", "y"}));
    EXPECT_EQ(t.render({{"x", "1"}, {"y", "2"}, {"unused", "3"}}), "a 1 {literal} 2 1");
    try {
        (void)t.render({{"x", "1"}});
        FAIL() << "missing placeholder accepted";
    } catch (const UsageError& e) {
        EXPECT_NE(std::string(e.what()).find("y"), std::string::npos);
    }
}

TEST(PromptTemplate, ShippedRegistryIsTotal) {
    const auto& reg = shipped_templates();
    for (auto id : {template_id::data_structure_design, template_id::meta_extraction,
                    template_id::table_identification, template_id::table_structuring,
                    template_id::figure_description, template_id::chunk_summary, template_id::data_extraction,
                    template_id::answer_summary, template_id::question_generation, template_id::context_relevance,
                    template_id::claim_decomposition, template_id::claim_verification, template_id::cluster_label,
                    template_id::structured_repair}) {
        ASSERT_TRUE(reg.contains(id)) << id;
        const auto& t = reg.get(id);
        Bindings all;
        for (const auto& p : t.required()) all[p] = "<" + p + ">";
        auto rendered = t.render(all);
        for (const auto& p : t.required()) {
            EXPECT_NE(rendered.find("<" + p + ">"), std::string::npos) << id << " drops " << p;
            auto missing = all;
            missing.erase(p);
            EXPECT_THROW((void)t.render(missing), UsageError) << id << " without " << p;
        }
    }
    EXPECT_EQ(reg.get(template_id::figure_description).model_class(), ModelClass::vision);
}

TEST(Shape, ReportsEveryViolationWithPath) {
    auto s = Shape::array_of(Shape::object({{"a", Shape::string()}, {"b", Shape::number(), false}}, false), 1);
    EXPECT_TRUE(s.validate(json::parse(R"([{"a":"x"},{"a":"y","b":2}])")).empty());
    auto errs = s.validate(json::parse(R"([{"a":1},{"c":true}])"));
    EXPECT_GE(errs.size(), 3u);
    EXPECT_FALSE(s.validate(json::array()).empty());
    EXPECT_TRUE(Shape::map_of(Shape::scalar()).validate(json::parse(R"({"k":null,"j":1})")).empty());
    EXPECT_FALSE(Shape::map_of(Shape::scalar()).validate(json::parse(R"({"k":{"n":1}})")).empty());
}

TEST(Shape, FenceStrippingAndProseFallback) {
    EXPECT_EQ(strip_code_fences("```json\n{\"a\":1}\n```"), "{\"a\":1}");
    EXPECT_EQ(strip_code_fences("```\n[1]\n```"), "[1]");
    EXPECT_EQ(*parse_model_json("Here you go: {\"a\": [1, 2]} hope it helps"), json::parse(R"({"a":[1,2]})"));
    EXPECT_FALSE(parse_model_json("no json here at all"));
}

TEST(Gateway, CacheServesRepeatsWithoutProviderCalls) {
    auto env = mock_env();
    auto first = env->complete(template_id::chunk_summary, kSummaryArgs);
    auto second = env->complete(template_id::chunk_summary, kSummaryArgs);
    EXPECT_EQ(first, second);
    EXPECT_EQ(env->stats().provider_calls, 1u);
    EXPECT_EQ(env->stats().cache_hits, 1u);
    EXPECT_EQ(env.mock->chat_calls(), 1u);
}

TEST(Gateway, DiskCacheSurvivesRestart) {
    scitab::testing::TempDir dir;
    std::string first;
    {
        auto env = mock_env({}, 4, dir.path());
        first = env->complete(template_id::chunk_summary, kSummaryArgs);
    }
    auto env = mock_env({}, 4, dir.path());
    EXPECT_EQ(env->complete(template_id::chunk_summary, kSummaryArgs), first);
    EXPECT_EQ(env.mock->chat_calls(), 0u);
}

TEST(Gateway, ConcurrentIdenticalRequestsComputeOnce) {
    auto env = mock_env({}, 4);
    env.mock->set_delay(std::chrono::milliseconds(20));
    std::vector<std::string> out(8);
    parallel_for(out.size(), 8, [&](std::size_t i) { out[i] = env->complete(template_id::chunk_summary, kSummaryArgs); });
    for (const auto& o : out) EXPECT_EQ(o, out[0]);
    EXPECT_EQ(env.mock->chat_calls(), 1u);
}

TEST(Gateway, BudgetBoundsInFlightCalls) {
    auto env = mock_env({}, 2);
    env.mock->set_delay(std::chrono::milliseconds(15));
    parallel_for(12, 12, [&](std::size_t i) {
        env->complete(template_id::chunk_summary, {{"kind", "text"}, {"content", "distinct " + std::to_string(i)}});
    });
    EXPECT_EQ(env.mock->chat_calls(), 12u);
    EXPECT_LE(env.mock->peak_concurrency(), 2);
    EXPECT_LE(env->budget().peak(), 2);
}

TEST(Gateway, RetriesThenSurfacesOutage) {
    MockScript script;
    script.rules.push_back(scitab::testing::outage(template_id::chunk_summary));
    auto env = mock_env(script);
    EXPECT_THROW(env->complete(template_id::chunk_summary, kSummaryArgs), GatewayError);
    // max_retries = 1 in the test config: one attempt plus one retry.
    EXPECT_EQ(env.mock->calls_for(std::string(template_id::chunk_summary)), 2u);
    EXPECT_EQ(env->stats().retries, 1u);
    // Failures are not cached.
    EXPECT_THROW(env->complete(template_id::chunk_summary, kSummaryArgs), GatewayError);
    EXPECT_EQ(env.mock->calls_for(std::string(template_id::chunk_summary)), 4u);
}

TEST(Gateway, UnboundPlaceholderNeverReachesProvider) {
    auto env = mock_env();
    EXPECT_THROW(env->complete(template_id::chunk_summary, {{"kind", "text"}}), UsageError);
    EXPECT_EQ(env.mock->chat_calls(), 0u);
}

TEST(Structured, FencedJsonParsesWithoutRepair) {
    MockScript script;
    script.rules.push_back(rule(template_id::data_structure_design, {"```json\n{\"answer\": \"String: x\"}\n```"}));
    auto env = mock_env(script);
    auto v = env->complete_structured(template_id::data_structure_design, {{"question", "q"}}, answer_shape());
    EXPECT_EQ(v, json::parse(R"({"answer":"String: x"})"));
    EXPECT_EQ(env->stats().repairs, 0u);
}

TEST(Structured, OneRepairRoundRecovers) {
    MockScript script;
    auto r = rule(template_id::data_structure_design, {"{\"answer\": 5}", "{\"answer\": \"String: fixed\"}"});
    script.rules.push_back(r);
    auto env = mock_env(script);
    auto v = env->complete_structured(template_id::data_structure_design, {{"question", "q"}}, answer_shape());
    EXPECT_EQ(v["answer"], "String: fixed");
    EXPECT_EQ(env->stats().repairs, 1u);
    EXPECT_EQ(env.mock->calls_for(std::string(template_id::structured_repair)), 1u);
    EXPECT_EQ(env->diagnostics().count(), 1u);
}

TEST(Structured, ProseTwiceFailsWithRawText) {
    MockScript script;
    script.rules.push_back(rule(template_id::data_structure_design, {"I cannot answer that.", "Still prose."}));
    auto env = mock_env(script);
    try {
        env->complete_structured(template_id::data_structure_design, {{"question", "q"}}, answer_shape());
        FAIL() << "prose accepted";
    } catch (const StructuredOutputError& e) {
        EXPECT_EQ(e.raw_text(), "Still prose.");
    }
    EXPECT_EQ(env.mock->chat_calls(), 2u);
}

TEST(Structured, SemanticCheckParticipatesInRepair) {
    MockScript script;
    script.rules.push_back(rule(template_id::data_structure_design, {"{\"answer\": \"bad\"}", "{\"answer\": \"good\"}"}));
    auto env = mock_env(script);
    auto check = [](const json& j) {
        return j["answer"] == "good" ? std::vector<std::string>{} : std::vector<std::string>{"answer must be good"};
    };
    auto v = env->complete_structured(template_id::data_structure_design, {{"question", "q"}}, answer_shape(), check);
    EXPECT_EQ(v["answer"], "good");
}

TEST(Embed, UnitNormOrderPreservedAndCached) {
    auto env = mock_env();
    std::vector<std::string> texts{"alpha beta", "gamma", "alpha beta", "delta epsilon"};
    auto v = env->embed(texts);
    ASSERT_EQ(v.size(), texts.size());
    for (const auto& e : v) EXPECT_NEAR(e.norm(), 1.0, 1e-12);
    EXPECT_EQ(v[0], v[2]);
    auto single = env->embed({"gamma"});
    EXPECT_EQ(single[0], v[1]);
    EXPECT_EQ(env.mock->embed_calls(), 1u);
    EXPECT_THROW(env->embed({}), UsageError);
}

TEST(Embed, MatchesIndependentNormalization) {
    MockScript script;
    script.embedding_dim = 3;
    script.vectors["fixed"] = {3.0, 0.0, 4.0};
    auto env = mock_env(script);
    auto v = env->embed({"fixed"})[0];
    EXPECT_NEAR(v[0], 0.6, 1e-12);
    EXPECT_NEAR(v[1], 0.0, 1e-12);
    EXPECT_NEAR(v[2], 0.8, 1e-12);
}

TEST(Embed, ZeroVectorIsRejected) {
    MockScript script;
    script.embedding_dim = 2;
    script.vectors["zero"] = {0.0, 0.0};
    auto env = mock_env(script);
    EXPECT_THROW(env->embed({"zero"}), GatewayError);
    EXPECT_THROW(EmbeddingVector::normalized({0.0, 0.0}), UsageError);
    EXPECT_DOUBLE_EQ(cosine(EmbeddingVector({0.0, 0.0}), EmbeddingVector({1.0, 0.0})), 0.0);
}

TEST(Vision, EmptyImageIsUsageError) {
    auto env = mock_env();
    std::vector<std::uint8_t> none;
    EXPECT_THROW(env->describe_image(none, "describe"), UsageError);
    EXPECT_EQ(env.mock->chat_calls(), 0u);
}

TEST(Vision, CachedByImageDigest) {
    auto env = mock_env();
    std::vector<std::uint8_t> a{1, 2, 3}, b{1, 2, 4};
    env->describe_image(a, "describe");
    env->describe_image(a, "describe");
    env->describe_image(b, "describe");
    EXPECT_EQ(env.mock->chat_calls(), 2u);
}

TEST(ResponseCacheTest, DisabledCacheAlwaysComputes) {
    ResponseCache cache({}, false);
    int n = 0;
    cache.get_or_compute("k", [&] { return std::to_string(++n); });
    cache.get_or_compute("k", [&] { return std::to_string(++n); });
    EXPECT_EQ(n, 2);
}

TEST(Config, ValidationAndParsing) {
    auto cfg = GatewayConfig::from_json(json::parse(R"({"provider":"mock","budget":2,"models":{"reasoner":"r1"}})"));
    EXPECT_EQ(cfg.provider, "mock");
    EXPECT_EQ(cfg.budget, 2);
    EXPECT_EQ(cfg.model_id(ModelClass::reasoner), "r1");
    EXPECT_EQ(cfg.api_key_env, "SCITAB_API_KEY");
    cfg.budget = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(OpenAI, MissingKeyIsConfigError) {
    GatewayConfig cfg;
    cfg.api_key_env = "SCITAB_TEST_KEY_THAT_IS_NOT_SET";
    ::unsetenv(cfg.api_key_env.c_str());
    EXPECT_THROW(OpenAIProvider::from_config(cfg), ConfigError);
}

TEST(OpenAI, WireFormatAgainstLocalServer) {
    httplib::Server server;
    std::string auth, chat_body, embed_body;
    int chat_hits = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        auth = req.get_header_value("Authorization");
        chat_body = req.body;
        if (++chat_hits == 1) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hello"}}]})", "application/json");
    });
    server.Post("/v1/embeddings", [&](const httplib::Request& req, httplib::Response& res) {
        embed_body = req.body;
        // Out of order on purpose: the client must place vectors by index.
        res.set_content(R"({"data":[{"index":1,"embedding":[0,2]},{"index":0,"embedding":[3,0]}]})",
                        "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("SCITAB_WIRE_TEST_KEY", "sk-test", 1);
    GatewayConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/";
    cfg.api_key_env = "SCITAB_WIRE_TEST_KEY";
    cfg.max_retries = 2;
    cfg.backoff = std::chrono::milliseconds(1);
    cfg.timeout = std::chrono::seconds(5);
    auto provider = std::make_shared<OpenAIProvider>(OpenAIProvider::from_config(cfg));
    Gateway gw(cfg, provider);

    EXPECT_EQ(gw.complete(template_id::chunk_summary, kSummaryArgs), "hello");
    EXPECT_EQ(chat_hits, 2);
    EXPECT_EQ(auth, "Bearer sk-test");
    auto body = json::parse(chat_body);
    EXPECT_EQ(body["model"], cfg.model_id(ModelClass::summarizer));
    EXPECT_EQ(body["messages"][0]["role"], "user");

    auto v = gw.embed({"a", "b"});
    EXPECT_NEAR(v[0][0], 1.0, 1e-12);
    EXPECT_NEAR(v[1][1], 1.0, 1e-12);
    EXPECT_EQ(json::parse(embed_body)["input"], json::parse(R"(["a","b"])"));

    std::vector<std::uint8_t> img{0xff, 0xd8, 0xff};
    gw.describe_image(img, "what is this");
    auto vision = json::parse(chat_body);
    const auto& parts = vision["messages"][0]["content"];
    ASSERT_TRUE(parts.is_array());
    EXPECT_EQ(parts[1]["image_url"]["url"], "data:image/jpeg;base64," + base64_encode(img));

    server.stop();
    th.join();
}

TEST(OpenAI, ClientErrorIsNotRetried) {
    httplib::Server server;
    int hits = 0;
    server.Post("/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 400;
        res.set_content("bad request", "text/plain");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    GatewayConfig cfg;
    cfg.max_retries = 3;
    cfg.backoff = std::chrono::milliseconds(1);
    Gateway gw(cfg, std::make_shared<OpenAIProvider>("http://127.0.0.1:" + std::to_string(port), "k",
                                                      std::chrono::seconds(5)));
    EXPECT_THROW(gw.complete(template_id::chunk_summary, kSummaryArgs), GatewayError);
    EXPECT_EQ(hits, 1);
    server.stop();
    th.join();
}
