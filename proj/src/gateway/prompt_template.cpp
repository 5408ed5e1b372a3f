#include "scitab/gateway/prompt_template.hpp"

#include "scitab/error.hpp"

#include <algorithm>
#include <cctype>

namespace scitab::gateway {

namespace {

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Length of a `{name}` token starting at `pos`, or 0 when there is none.
std::size_t placeholder_len(std::string_view body, std::size_t pos) {
    if (body[pos] != '{' || pos + 1 >= body.size() || !ident_start(body[pos + 1])) return 0;
    std::size_t i = pos + 2;
    while (i < body.size() && ident_char(body[i])) ++i;
    if (i < body.size() && body[i] == '}') return i - pos + 1;
    return 0;
}

}  // namespace

std::string_view to_string(ModelClass c) noexcept {
    switch (c) {
        case ModelClass::reasoner: return "reasoner";
        case ModelClass::summarizer: return "summarizer";
        case ModelClass::vision: return "vision";
        case ModelClass::embedder: return "embedder";
    }
    return "unknown";
}

ModelClass model_class_from_string(std::string_view s) {
    for (auto c : all_model_classes)
        if (to_string(c) == s) return c;
    throw ConfigError("unknown model class '" + std::string(s) + "'");
}

std::vector<std::string> placeholders_in(std::string_view body) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < body.size(); ++i) {
        if ((body[i] == '{' || body[i] == '}') && i + 1 < body.size() && body[i + 1] == body[i]) {
            ++i;
            continue;
        }
        if (auto n = placeholder_len(body, i)) {
            std::string name(body.substr(i + 1, n - 2));
            if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(std::move(name));
            i += n - 1;
        }
    }
    return out;
}

PromptTemplate::PromptTemplate(std::string id, std::string body, ModelClass model_class,
                               double temperature)
    : id_(std::move(id)),
      body_(std::move(body)),
      model_class_(model_class),
      temperature_(temperature),
      required_(placeholders_in(body_)) {}

std::string PromptTemplate::render(const Bindings& bindings) const {
    for (const auto& name : required_) {
        if (!bindings.contains(name))
            throw UsageError("template '" + id_ + "': placeholder '" + name + "' is not bound");
    }
    std::string out;
    out.reserve(body_.size() + 256);
    std::string_view body(body_);
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if ((c == '{' || c == '}') && i + 1 < body.size() && body[i + 1] == c) {
            out.push_back(c);
            ++i;
            continue;
        }
        if (auto n = placeholder_len(body, i)) {
            out += bindings.find(body.substr(i + 1, n - 2))->second;
            i += n - 1;
            continue;
        }
        out.push_back(c);
    }
    return out;
}

void TemplateRegistry::add(PromptTemplate t) {
    auto id = t.id();
    templates_.insert_or_assign(std::move(id), std::move(t));
}

const PromptTemplate& TemplateRegistry::get(std::string_view id) const {
    auto it = templates_.find(id);
    if (it == templates_.end()) throw UsageError("unknown template '" + std::string(id) + "'");
    return it->second;
}

bool TemplateRegistry::contains(std::string_view id) const { return templates_.find(id) != templates_.end(); }

std::vector<std::string> TemplateRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& [id, _] : templates_) out.push_back(id);
    return out;
}

}  // namespace scitab::gateway
