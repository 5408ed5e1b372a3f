#pragma once

#include <nlohmann/json.hpp>

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scitab::gateway {

using json = nlohmann::ordered_json;

// Expected structure of a model's JSON answer. Small on purpose: it covers the
// shapes the pipeline asks for (flat records, lists, string maps) and reports
// every violation with a JSON-pointer style path.
struct ShapeField;

class Shape {
public:
    enum class Kind { any, string, number, boolean, scalar, object, map, array, one_of };

    static Shape any();
    static Shape string();
    static Shape number();
    static Shape boolean();
    // string, number, boolean or null.
    static Shape scalar();
    static Shape object(std::vector<ShapeField> fields, bool allow_extra = true);
    // Object with arbitrary keys whose values all match `value`.
    static Shape map_of(Shape value, std::size_t min_keys = 0);
    static Shape array_of(Shape item, std::size_t min_items = 0);
    static Shape one_of(std::vector<Shape> options);

    Kind kind() const noexcept { return kind_; }

    // Empty result means the value conforms.
    std::vector<std::string> validate(const json& value) const;

private:
    explicit Shape(Kind k) : kind_(k) {}
    void validate_into(const json& value, const std::string& path, std::vector<std::string>& errors) const;

    Kind kind_ = Kind::any;
    std::vector<std::string> keys_;
    std::vector<bool> required_;
    std::vector<Shape> children_;
    bool allow_extra_ = true;
    std::size_t min_count_ = 0;
};

struct ShapeField {
    std::string key;
    Shape shape;
    bool required = true;
};

// Strips a Markdown code fence (``` or ```json) around the payload, trims, and
// returns the text to parse.
std::string strip_code_fences(std::string_view text);

// Parses model text as JSON after fence stripping. Falls back to the outermost
// {...} or [...] span when prose surrounds the payload. nullopt when nothing parses.
std::optional<json> parse_model_json(std::string_view text);

}  // namespace scitab::gateway
