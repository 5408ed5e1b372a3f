#include "scitab/gateway/mock_provider.hpp"

#include "scitab/digest.hpp"
#include "scitab/error.hpp"
#include "scitab/gateway/templates.hpp"
#include "scitab/text.hpp"

#include <fstream>
#include <thread>

namespace scitab::gateway {

using json = nlohmann::ordered_json;
using nlohmann::ordered_json;

namespace {

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string binding(const ChatRequest& r, std::string_view key) {
    auto it = r.bindings.find(key);
    return it == r.bindings.end() ? std::string() : it->second;
}

bool icontains(std::string_view haystack, std::string_view needle) {
    if (needle.empty()) return false;
    return text::fold_collapse(haystack).find(text::fold_collapse(needle)) != std::string::npos;
}

// Lines of the form "[n] text" -> text.
std::vector<std::string> numbered_items(std::string_view block) {
    std::vector<std::string> out;
    for (const auto& line : text::split(block, '\n')) {
        auto t = text::trim(line);
        if (t.size() < 3 || t.front() != '[') continue;
        auto close = t.find(']');
        if (close == std::string::npos) continue;
        out.push_back(text::trim(std::string_view(t).substr(close + 1)));
    }
    return out;
}

std::string first_sentences(std::string_view content, std::size_t max_chars) {
    auto parts = text::sentences(content);
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty() && text::utf8_length(out) + 1 + text::utf8_length(p) > max_chars) break;
        if (!out.empty()) out.push_back(' ');
        out += p;
        if (out.size() > max_chars / 2) break;
    }
    if (out.empty()) out = text::collapse_whitespace(content);
    return text::utf8_prefix(out, max_chars);
}

std::string fallback_table_csv(std::string_view table_text) {
    std::vector<std::vector<std::string>> rows;
    std::size_t width = 0;
    for (const auto& line : text::split(table_text, '\n')) {
        if (text::trim(line).empty()) continue;
        std::vector<std::string> cells;
        std::string cur;
        int spaces = 0;
        for (char c : line) {
            if (c == '\t' || (c == ' ' && spaces >= 1)) {
                if (!text::trim(cur).empty()) cells.push_back(text::trim(cur));
                cur.clear();
                spaces = 0;
                continue;
            }
            spaces = c == ' ' ? spaces + 1 : 0;
            cur.push_back(c);
        }
        if (!text::trim(cur).empty()) cells.push_back(text::trim(cur));
        width = std::max(width, cells.size());
        rows.push_back(std::move(cells));
    }
    std::string csv;
    for (auto& r : rows) {
        r.resize(width);
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) csv.push_back(',');
            csv += "\"" + r[i] + "\"";
        }
        csv.push_back('\n');
    }
    return csv;
}

}  // namespace

MockScript MockScript::from_json(const json& j) {
    MockScript s;
    try {
        s.embedding_dim = j.value("embedding_dim", s.embedding_dim);
        for (const auto& r : j.value("rules", json::array())) {
            MockRule rule;
            rule.template_id = r.at("template").get<std::string>();
            auto stage = r.value("stage", std::string("any"));
            rule.stage = stage == "initial" ? MockRule::Stage::initial
                         : stage == "repair" ? MockRule::Stage::repair
                                             : MockRule::Stage::any;
            rule.contains = r.value("contains", std::vector<std::string>{});
            rule.doc_id = r.value("doc_id", std::string());
            if (r.contains("responses")) {
                for (const auto& item : r.at("responses"))
                    rule.responses.push_back(item.is_string() ? item.get<std::string>() : item.dump());
            }
            if (r.contains("response")) rule.responses.push_back(r.at("response").get<std::string>());
            if (r.contains("response_json")) rule.responses.push_back(r.at("response_json").dump());
            rule.fail = r.value("fail", false);
            if (rule.responses.empty() && !rule.fail)
                throw FormatError("rules", "mock rule for '" + rule.template_id + "' has no response");
            s.rules.push_back(std::move(rule));
        }
        const auto digests = j.value("prompt_digests", json::object());
        for (const auto& [k, v] : digests.items()) s.prompt_digests[k] = v.get<std::string>();
        const auto lexicon = j.value("lexicon", json::object());
        for (const auto& [k, v] : lexicon.items()) s.lexicon[k] = v.get<std::vector<std::string>>();
        const auto vectors = j.value("vectors", json::object());
        for (const auto& [k, v] : vectors.items()) s.vectors[k] = v.get<std::vector<double>>();
        for (const auto& d : j.value("down", std::vector<std::string>{})) s.down.insert(model_class_from_string(d));
    } catch (const json::exception& e) {
        throw FormatError("mock script", e.what());
    }
    return s;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path.string(), "cannot open mock script");
    auto j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw FormatError(path.string(), "mock script is not valid JSON");
    return from_json(j);
}

MockProvider::MockProvider() = default;
MockProvider::MockProvider(MockScript script) : script_(std::move(script)) {}

void MockProvider::add_rule(MockRule rule) {
    std::lock_guard lock(mutex_);
    script_.rules.push_back(std::move(rule));
}

void MockProvider::set_vector(const std::string& text, std::vector<double> v) {
    std::lock_guard lock(mutex_);
    script_.vectors[text] = std::move(v);
}

void MockProvider::set_down(ModelClass c, bool down) {
    std::lock_guard lock(mutex_);
    if (down)
        script_.down.insert(c);
    else
        script_.down.erase(c);
}

void MockProvider::set_all_down(bool down) {
    for (auto c : all_model_classes) set_down(c, down);
}

std::size_t MockProvider::chat_calls() const {
    std::lock_guard lock(mutex_);
    return chat_calls_;
}

std::size_t MockProvider::embed_calls() const {
    std::lock_guard lock(mutex_);
    return embed_calls_;
}

std::size_t MockProvider::calls_for(const std::string& template_id) const {
    std::lock_guard lock(mutex_);
    auto it = calls_by_template_.find(template_id);
    return it == calls_by_template_.end() ? 0 : it->second;
}

void MockProvider::enter() {
    int now = ++in_flight_;
    int seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    if (delay_.count() > 0) std::this_thread::sleep_for(delay_);
}

void MockProvider::leave() { --in_flight_; }

std::string MockProvider::chat(const ChatRequest& request) {
    enter();
    struct Leave {
        MockProvider* p;
        ~Leave() { p->leave(); }
    } guard{this};

    const bool repair = request.template_id == template_id::structured_repair;
    const std::string effective = repair ? binding(request, "original_template") : request.template_id;

    std::lock_guard lock(mutex_);
    ++chat_calls_;
    ++calls_by_template_[request.template_id];
    if (script_.down.contains(request.model_class))
        throw ProviderError("mock " + std::string(to_string(request.model_class)) + " provider is down", true, 503);

    if (auto it = script_.prompt_digests.find(sha256_hex(request.prompt)); it != script_.prompt_digests.end())
        return it->second;

    for (auto& rule : script_.rules) {
        if (rule.template_id != effective) continue;
        if (rule.stage == MockRule::Stage::initial && repair) continue;
        if (rule.stage == MockRule::Stage::repair && !repair) continue;
        if (!rule.doc_id.empty() && rule.doc_id != binding(request, "doc_id")) continue;
        bool all = true;
        for (const auto& c : rule.contains) all = all && request.prompt.find(c) != std::string::npos;
        if (!all) continue;
        if (rule.fail) throw ProviderError("mock rule outage for '" + effective + "'", true, 503);
        auto idx = std::min(rule.next, rule.responses.size() - 1);
        ++rule.next;
        return rule.responses[idx];
    }
    return fallback(request, effective);
}

std::string MockProvider::fallback(const ChatRequest& r, const std::string& tid) const {
    namespace id = template_id;
    if (r.template_id == id::structured_repair) return binding(r, "previous");

    if (tid == id::data_structure_design) {
        return ordered_json{{"answer", "String: Answer to the question"}}.dump();
    }
    if (tid == id::meta_extraction) {
        ordered_json meta;
        for (const char* k : {"Title", "Abstract", "Year", "Author", "Journal/Conference", "ISSN", "Volume", "Issue",
                              "Page", "DOI", "Link", "Publisher", "Language"})
            meta[k] = "none";
        for (const auto& line : text::split(binding(r, "paper"), '\n')) {
            auto t = text::trim(line);
            if (!t.empty()) {
                meta["Title"] = t;
                break;
            }
        }
        return meta.dump();
    }
    if (tid == id::table_identification) return "no";
    if (tid == id::table_structuring) {
        return ordered_json{{"table_caption", ""},
                            {"table_content", fallback_table_csv(binding(r, "table_information"))}}
            .dump();
    }
    if (tid == id::figure_description || tid.empty()) {
        auto caption = binding(r, "caption");
        return caption.empty() ? std::string("The figure shows data without a caption.") : caption;
    }
    if (tid == id::chunk_summary) return first_sentences(binding(r, "content"), 300);
    if (tid == id::data_extraction) {
        auto schema = json::parse(binding(r, "schema"), nullptr, false);
        auto contexts = binding(r, "contexts");
        ordered_json record = ordered_json::object();
        if (schema.is_object()) {
            for (const auto& [col, _] : schema.items()) {
                std::string value = "Empty";
                if (auto lex = script_.lexicon.find(col); lex != script_.lexicon.end()) {
                    for (const auto& candidate : lex->second) {
                        if (icontains(contexts, candidate)) {
                            value = candidate;
                            break;
                        }
                    }
                }
                record[col] = value;
            }
        }
        return ordered_json{{"records", ordered_json::array({record})}, {"summary", "Values found in the contexts."}}
            .dump();
    }
    if (tid == id::answer_summary) {
        return "The table covers " + binding(r, "document_count") + " documents and " + binding(r, "record_count") +
               " records.";
    }
    if (tid == id::question_generation) {
        int count = std::max(1, std::atoi(binding(r, "count").c_str()));
        auto pieces = text::split(binding(r, "answer"), ';');
        ordered_json qs = ordered_json::array();
        for (int i = 0; i < count; ++i) {
            auto piece = text::trim(pieces[static_cast<std::size_t>(i) % pieces.size()]);
            auto colon = piece.find(':');
            auto key = colon == std::string::npos ? piece : piece.substr(0, colon);
            qs.push_back("What is the " + key + " reported in the paper?");
        }
        return ordered_json{{"questions", qs}}.dump();
    }
    if (tid == id::context_relevance) {
        auto question_words = text::words(binding(r, "question"));
        ordered_json verdicts = ordered_json::array();
        for (const auto& s : numbered_items(binding(r, "sentences"))) {
            int v = 0;
            for (const auto& w : text::words(s)) {
                if (w.size() < 4) continue;
                if (std::find(question_words.begin(), question_words.end(), w) != question_words.end()) v = 1;
            }
            verdicts.push_back(v);
        }
        return ordered_json{{"verdicts", verdicts}}.dump();
    }
    if (tid == id::claim_decomposition) {
        ordered_json claims = ordered_json::array();
        for (const auto& piece : text::split(binding(r, "answer"), ';')) {
            auto t = text::trim(piece);
            auto colon = t.find(':');
            auto value = colon == std::string::npos ? t : text::trim(std::string_view(t).substr(colon + 1));
            if (t.empty() || value.empty() || text::fold(value) == "empty") continue;
            claims.push_back(t);
        }
        return ordered_json{{"claims", claims}}.dump();
    }
    if (tid == id::claim_verification) {
        auto contexts = binding(r, "contexts");
        ordered_json verdicts = ordered_json::array();
        for (const auto& claim : numbered_items(binding(r, "claims"))) {
            auto colon = claim.find(':');
            auto value = colon == std::string::npos ? claim : text::trim(std::string_view(claim).substr(colon + 1));
            verdicts.push_back(icontains(contexts, value) ? 1 : 0);
        }
        return ordered_json{{"verdicts", verdicts}}.dump();
    }
    if (tid == id::cluster_label) {
        for (const auto& line : text::split(binding(r, "members"), '\n')) {
            auto t = text::trim(line);
            if (t.rfind("- ", 0) == 0) t = t.substr(2);
            if (auto paren = t.rfind(" ("); paren != std::string::npos) t = t.substr(0, paren);
            if (!t.empty()) return t;
        }
        return "group";
    }
    return "Empty";
}

std::vector<double> MockProvider::hashed_embedding(const std::string& input, std::size_t dim) {
    std::vector<double> v(dim, 0.0);
    auto add = [&](std::string_view feature, double weight) {
        auto h = fnv1a(feature);
        auto idx = static_cast<std::size_t>(h % dim);
        double sign = ((h >> 63) & 1u) ? -1.0 : 1.0;
        v[idx] += sign * weight;
    };
    for (const auto& w : text::words(input)) {
        add("w:" + w, 1.0);
        std::string padded = "#" + w + "#";
        for (std::size_t i = 0; i + 3 <= padded.size(); ++i) add("t:" + padded.substr(i, 3), 0.35);
    }
    bool zero = std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
    if (zero) v[0] = 1.0;
    return v;
}

std::vector<std::vector<double>> MockProvider::embed(const std::string&, const std::vector<std::string>& texts) {
    enter();
    struct Leave {
        MockProvider* p;
        ~Leave() { p->leave(); }
    } guard{this};
    std::lock_guard lock(mutex_);
    ++embed_calls_;
    if (script_.down.contains(ModelClass::embedder))
        throw ProviderError("mock embedder is down", true, 503);
    std::vector<std::vector<double>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) {
        if (auto it = script_.vectors.find(t); it != script_.vectors.end())
            out.push_back(it->second);
        else
            out.push_back(hashed_embedding(t, script_.embedding_dim));
    }
    return out;
}

}  // namespace scitab::gateway
