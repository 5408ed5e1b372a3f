#pragma once

#include "scitab/gateway/model_class.hpp"

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scitab::gateway {

using Bindings = std::map<std::string, std::string, std::less<>>;

// Template body with `{name}` placeholders. `{{` and `}}` render as literal
// braces, matching Python str.format, so the shipped prompt bodies stay verbatim.
class PromptTemplate {
public:
    PromptTemplate(std::string id, std::string body, ModelClass model_class, double temperature);

    const std::string& id() const noexcept { return id_; }
    const std::string& body() const noexcept { return body_; }
    ModelClass model_class() const noexcept { return model_class_; }
    double temperature() const noexcept { return temperature_; }

    // Distinct placeholder names in order of first appearance.
    const std::vector<std::string>& required() const noexcept { return required_; }

    // Throws UsageError naming the first unbound placeholder. Extra bindings are ignored.
    std::string render(const Bindings& bindings) const;

private:
    std::string id_;
    std::string body_;
    ModelClass model_class_;
    double temperature_;
    std::vector<std::string> required_;
};

// Placeholder names found in a template body (escaped braces skipped).
std::vector<std::string> placeholders_in(std::string_view body);

class TemplateRegistry {
public:
    void add(PromptTemplate t);
    const PromptTemplate& get(std::string_view id) const;
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, PromptTemplate, std::less<>> templates_;
};

}  // namespace scitab::gateway
