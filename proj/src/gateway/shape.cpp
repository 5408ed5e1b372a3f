#include "scitab/gateway/shape.hpp"

#include "scitab/text.hpp"

namespace scitab::gateway {

Shape Shape::any() { return Shape(Kind::any); }
Shape Shape::string() { return Shape(Kind::string); }
Shape Shape::number() { return Shape(Kind::number); }
Shape Shape::boolean() { return Shape(Kind::boolean); }
Shape Shape::scalar() { return Shape(Kind::scalar); }

Shape Shape::object(std::vector<ShapeField> fields, bool allow_extra) {
    Shape s(Kind::object);
    for (auto& f : fields) {
        s.keys_.push_back(f.key);
        s.required_.push_back(f.required);
        s.children_.push_back(std::move(f.shape));
    }
    s.allow_extra_ = allow_extra;
    return s;
}

Shape Shape::map_of(Shape value, std::size_t min_keys) {
    Shape s(Kind::map);
    s.children_.push_back(std::move(value));
    s.min_count_ = min_keys;
    return s;
}

Shape Shape::array_of(Shape item, std::size_t min_items) {
    Shape s(Kind::array);
    s.children_.push_back(std::move(item));
    s.min_count_ = min_items;
    return s;
}

Shape Shape::one_of(std::vector<Shape> options) {
    Shape s(Kind::one_of);
    s.children_ = std::move(options);
    return s;
}

std::vector<std::string> Shape::validate(const json& value) const {
    std::vector<std::string> errors;
    validate_into(value, "", errors);
    return errors;
}

void Shape::validate_into(const json& v, const std::string& path, std::vector<std::string>& errors) const {
    const std::string where = path.empty() ? "/" : path;
    switch (kind_) {
        case Kind::any:
            return;
        case Kind::string:
            if (!v.is_string()) errors.push_back(where + ": expected string, got " + v.type_name());
            return;
        case Kind::number:
            if (!v.is_number()) errors.push_back(where + ": expected number, got " + v.type_name());
            return;
        case Kind::boolean:
            if (!v.is_boolean()) errors.push_back(where + ": expected boolean, got " + v.type_name());
            return;
        case Kind::scalar:
            if (!(v.is_string() || v.is_number() || v.is_boolean() || v.is_null()))
                errors.push_back(where + ": expected a flat scalar value, got " + v.type_name());
            return;
        case Kind::object: {
            if (!v.is_object()) {
                errors.push_back(where + ": expected object, got " + std::string(v.type_name()));
                return;
            }
            for (std::size_t i = 0; i < keys_.size(); ++i) {
                auto it = v.find(keys_[i]);
                if (it == v.end()) {
                    if (required_[i]) errors.push_back(where + ": missing key '" + keys_[i] + "'");
                    continue;
                }
                children_[i].validate_into(*it, path + "/" + keys_[i], errors);
            }
            if (!allow_extra_) {
                for (const auto& [k, _] : v.items()) {
                    bool known = false;
                    for (const auto& key : keys_) known = known || key == k;
                    if (!known) errors.push_back(where + ": unexpected key '" + k + "'");
                }
            }
            return;
        }
        case Kind::map: {
            if (!v.is_object()) {
                errors.push_back(where + ": expected object, got " + std::string(v.type_name()));
                return;
            }
            if (v.size() < min_count_)
                errors.push_back(where + ": expected at least " + std::to_string(min_count_) + " keys");
            for (const auto& [k, item] : v.items()) children_.front().validate_into(item, path + "/" + k, errors);
            return;
        }
        case Kind::array: {
            if (!v.is_array()) {
                errors.push_back(where + ": expected array, got " + std::string(v.type_name()));
                return;
            }
            if (v.size() < min_count_)
                errors.push_back(where + ": expected at least " + std::to_string(min_count_) + " items");
            for (std::size_t i = 0; i < v.size(); ++i)
                children_.front().validate_into(v[i], path + "/" + std::to_string(i), errors);
            return;
        }
        case Kind::one_of: {
            std::vector<std::string> first_errors;
            for (std::size_t i = 0; i < children_.size(); ++i) {
                std::vector<std::string> e;
                children_[i].validate_into(v, path, e);
                if (e.empty()) return;
                if (i == 0) first_errors = std::move(e);
            }
            errors.insert(errors.end(), first_errors.begin(), first_errors.end());
            return;
        }
    }
}

std::string strip_code_fences(std::string_view text) {
    std::string t = text::trim(text);
    auto open = t.find("```");
    if (open == std::string::npos) return t;
    auto body_start = t.find('\n', open);
    if (body_start == std::string::npos) return t;
    auto close = t.find("```", body_start);
    if (close == std::string::npos) close = t.size();
    return text::trim(std::string_view(t).substr(body_start + 1, close - body_start - 1));
}

std::optional<json> parse_model_json(std::string_view raw) {
    std::string t = strip_code_fences(raw);
    if (t.empty()) return std::nullopt;
    auto parsed = json::parse(t, nullptr, false);
    if (!parsed.is_discarded()) return parsed;

    auto first = t.find_first_of("{[");
    if (first == std::string::npos) return std::nullopt;
    char close = t[first] == '{' ? '}' : ']';
    auto last = t.find_last_of(close);
    if (last == std::string::npos || last <= first) return std::nullopt;
    parsed = json::parse(t.substr(first, last - first + 1), nullptr, false);
    if (parsed.is_discarded()) return std::nullopt;
    return parsed;
}

}  // namespace scitab::gateway
