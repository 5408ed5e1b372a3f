#pragma once

#include <array>
#include <string>
#include <string_view>

namespace scitab::gateway {

// Model roles: reasoner for structure inference, table parsing and extraction;
// summarizer for chunk summaries and labels; vision for figures; embedder for vectors.
enum class ModelClass { reasoner, summarizer, vision, embedder };

inline constexpr std::array<ModelClass, 4> all_model_classes{
    ModelClass::reasoner, ModelClass::summarizer, ModelClass::vision, ModelClass::embedder};

std::string_view to_string(ModelClass c) noexcept;
ModelClass model_class_from_string(std::string_view s);

}  // namespace scitab::gateway
