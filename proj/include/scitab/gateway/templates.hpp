#pragma once

#include "scitab/gateway/prompt_template.hpp"

#include <string_view>

namespace scitab::gateway {

namespace template_id {
// Document-processing and structuring prompts.
inline constexpr std::string_view data_structure_design = "data_structure_design";
inline constexpr std::string_view meta_extraction = "meta_extraction";
inline constexpr std::string_view table_identification = "table_identification";
inline constexpr std::string_view table_structuring = "table_structuring";
inline constexpr std::string_view figure_description = "figure_description";

// Pipeline prompts.
inline constexpr std::string_view chunk_summary = "chunk_summary";
inline constexpr std::string_view data_extraction = "data_extraction";
inline constexpr std::string_view answer_summary = "answer_summary";
inline constexpr std::string_view question_generation = "question_generation";
inline constexpr std::string_view context_relevance = "context_relevance";
inline constexpr std::string_view claim_decomposition = "claim_decomposition";
inline constexpr std::string_view claim_verification = "claim_verification";
inline constexpr std::string_view cluster_label = "cluster_label";
inline constexpr std::string_view structured_repair = "structured_repair";
}  // namespace template_id

// Every template the library ships.
const TemplateRegistry& shipped_templates();

}  // namespace scitab::gateway
