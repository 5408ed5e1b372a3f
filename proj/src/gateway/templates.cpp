#include "scitab/gateway/templates.hpp"

#include <string>

namespace scitab::gateway {

namespace {

constexpr double kStructured = 0.0;
constexpr double kCreative = 0.3;

const char* const kDataStructureDesign =
    R"(Given the following question, design a structured data format to represent the answer:
Question: {question}.
Your task:
1. Carefully analyze the question to identify ONLY the specific information explicitly requested.
2. Design a table structure with columns that directly correspond to the requested information.
3. Provide the structure in a "record" format: [{{"column_1": "value_description", "column_2": "value_description"}}]
4. Ensure all dictionary objects in the list share the same set of columns.
5. Use clear and descriptive names for the columns.
6. Avoid nested structures or hierarchical data - keep everything flat.

Guidelines:
- Choose column names that are self-explanatory and follow a consistent naming convention.
- Create columns ONLY for information directly mentioned or clearly implied in the question.
- Do NOT add columns for information that might be related but is not specifically asked for.
- Describe the expected values for each column (e.g., data type, format, range, units).
- For columns with multiple possible values:
    * Create boolean columns for each option (e.g., "has_feature_X", "has_feature_Y").
    * Or use a numeric scale to indicate presence/absence or degree (e.g., 0-5 scale).
- For columns with a limited set of possible values, list all possible options.
- For numerical values (e.g., size, length, weight), specify the unit of measurement if relevant.
- For date/time values, specify the expected format.
Formulate your response as a JSON object containing the designed structure.

Ensure your structure capture all relevant information from the question, while also being flexible enough to accommodate various possible answers.)";

const char* const kMetaExtraction =
    R"(You should extract the meta information of the given paper.
This is the paper content: {paper}.

Besides, the information you need to extract includes the following keys: "Title", "Abstract", "Year", "Author", "Journal/Conference", "ISSN", "Volume", "Issue", "Page", "DOI", "Link", "Publisher", "Language".
For the page, please use the format like "12-15", "134-145". If there is only one page, the format can be "145", "1345".
When there is no such information about a key, you just return the "none" as the value of the key, but you should make sure there is no such information. You should try your best to retrieve the information and reduce the occurrence of "none".

{format_instructions})";

const char* const kTableIdentification =
    R"(I will give you a page of a pdf file.
You need first to judge whether there is any table in the page content.
Then you need to extract the original information of the table from the page content.
The following is the page content: {page_content}

If yes, just tell me the answer through the JSON format which includes the following keys: table_name and table_content.

Store all the JSON in a list through "[ ]". Besides, table_name is the Table order, such as Table 1, Table 2, and Table 3.

Note that you should tell me the related region of this table (raw data) from the page content without any processing in the table_content.
Besides, you shouldn't output any other things (such as 'yes' or many explanations). That means, you just need to tell me the final output in JSON format in your response.

If not, just tell me "no".)";

const char* const kTableStructuring =
    R"(I will give you a table content. You need to organize it in a CSV format. This is the step:
(1) You should determine the column names.
(2) You should fill in all the data in the corresponding column and row.

There are some points you should pay attention to:
(1) Don't leave out any of the information I gave you, you should organize all my information into a table for me.
(2) Be careful to "\n". If \n exists, there are two kinds of scenarios. First of all, it may be too long resulting in a branch, this time the front and back are actually one and the same. If you find that \n before and after can not form a whole, that is a nested table. the front column name is the parent column name of the back column name. At this time, you should add a parent column name. You should pay special attention when composing column names. You can use line breaks to notice which names are in a column. Here are a few different examples:
(a) example1: For the column name message "Tempo de estocagem (dias)\n 0 55 90 145 180 235 280 360", you should pay special attention to the fact that there is an \n after Tempo de estocagem (dias), so this could mean that The column names 0 55 90 145 180 235 280 360 are sub-columns of Tempo de estocagem (dias). At this point you need to organize into:
Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias), Tempo de estocagem (dias)
0, 55, 90, 145, 180, 235, 280, 360.
There are the column names at the previous level and column names at the next level, respectively.
There are more examples of this:
input: All-trans-b-caroteneb(mg/g DM) 13-cis-b-carotene Retention of\nall-trans -b-carotene (%)d\n(mg/g DM)c(% of total b-carotene):
thoughts: Retention of \nall-trans -b-carotene (%) can be thought of as turning a row instead of two columns. \n(mg/g DM)c (% of total b-carotene) is a sub-column, and since it can be seen that 13-cis-b-carotene has no units, (mg/g DM)c and (% of total b-carotene) should be sub-columns of 13-cis-b-carotene. So the final column name should be organized as:
output: All-trans-b-caroteneb (mg/g DM), 13-cis-b-carotene (mg/g DM)c, 13-cis-b-carotene (% of total b-carotene), Retention of all-trans-b-carotene (%)d
(b) example2: Sometimes the row breaks don't necessarily represent a relationship between the column name and the subcolumn name, such as the following: TPO2 a 23 °C, 1 atm(1) \n (mL (CNTP).m-2.dia-1). It may just be that the data is too long to be a unit. This time TPO2 a 23 °C, 1 atm(1) (mL (CNTP).m-2.dia-1) is one unit.
(3) Note some of the special symbols such as ±.
(4) You need to ignore some special symbols, such as Unicode code point representations(e.g., /uni0394, /uni00A0).
(5)You should use "" to wrap every cell.
(6) Sometimes there will be redundant spaces, and you need to deal with those depending on the context. For example, there may be many spaces in "16  ± 0.6" due to noise, but they actually represent "16±0.6".

This is the content of my table: {table_information}

Tell me the answer in JSON format, including keys "table_caption" and "table_content", while "table_content" should be in string of CSV format.)";

const char* const kFigureDescription =
    R"(I will give you a figure in the paper. Besides, I will also give you the caption of this figure. You should describe the data insight in this figure based on the caption. The more detailed the description, the better. This is the caption: {caption}.)";

const char* const kChunkSummary =
    R"(Write a concise summary of the following {kind} taken from a scientific paper. Keep it under 600 characters. For a table, mention its caption and its column names. For a figure, give a shortened version of the described insight. Return only the summary text.

{content})";

const char* const kDataExtraction =
    R"(Answer the question solely based on the provided contexts, which come from one scientific paper.
Question: {question}

Contexts:
{contexts}

Organize the answer as records. Each record must use exactly these columns, with values following the descriptions:
{schema}

Rules:
- Use only information stated in the contexts. Output "Empty" for values that cannot be determined from the given information.
- When the contexts describe several distinct entities that answer the question (for example several model variants or several crop types), output one record per entity.
- Copy values in the wording used by the contexts.

Respond with a JSON object {{"records": [...], "summary": "one or two sentences about what this paper reports"}} and nothing else.)";

const char* const kAnswerSummary =
    R"(The following data table was extracted from a collection of scientific papers to answer a question.
Question: {question}

Table ({document_count} documents, {record_count} records, "Empty" marks values not found):
{table}

Write a short text summary of the answer in under 1200 characters. Mention how many documents and records the table covers and point out notable gaps where values are Empty.)";

const char* const kQuestionGeneration =
    R"(Generate {count} different questions that the following answer would address. The answer is a data record extracted from a scientific paper.
Answer: {answer}

Respond with a JSON object {{"questions": ["...", "..."]}} and nothing else.)";

const char* const kContextRelevance =
    R"(Question: {question}

Below are numbered sentences from retrieved contexts. For each sentence, decide whether it is relevant for answering the question: 1 if relevant, 0 if not.
{sentences}

Respond with a JSON object {{"verdicts": [...]}} holding exactly one 0 or 1 per sentence, in order, and nothing else.)";

const char* const kClaimDecomposition =
    R"(Break the following answer into short standalone factual claims. Skip values marked "Empty".
Answer: {answer}

Respond with a JSON object {{"claims": ["...", "..."]}} and nothing else.)";

const char* const kClaimVerification =
    R"(Contexts:
{contexts}

For each numbered claim below, decide whether it can be directly inferred from the contexts: 1 if supported, 0 if not.
{claims}

Respond with a JSON object {{"verdicts": [...]}} holding exactly one 0 or 1 per claim, in order, and nothing else.)";

const char* const kClusterLabel =
    R"(The following values were grouped together because they are semantically similar (counts in parentheses):
{members}

Give a short label of at most 6 words that summarizes this group. Return only the label.)";

const char* const kStructuredRepair =
    R"({prompt}

Your previous response was:
{previous}

It could not be accepted because:
{errors}

Respond again with only the corrected JSON, no explanations and no code fences.)";

TemplateRegistry build() {
    TemplateRegistry r;
    using M = ModelClass;
    r.add({std::string(template_id::data_structure_design), kDataStructureDesign, M::reasoner, kStructured});
    r.add({std::string(template_id::meta_extraction), kMetaExtraction, M::reasoner, kStructured});
    r.add({std::string(template_id::table_identification), kTableIdentification, M::reasoner, kStructured});
    r.add({std::string(template_id::table_structuring), kTableStructuring, M::reasoner, kStructured});
    r.add({std::string(template_id::figure_description), kFigureDescription, M::vision, kCreative});
    r.add({std::string(template_id::chunk_summary), kChunkSummary, M::summarizer, kCreative});
    r.add({std::string(template_id::data_extraction), kDataExtraction, M::reasoner, kStructured});
    r.add({std::string(template_id::answer_summary), kAnswerSummary, M::summarizer, kCreative});
    r.add({std::string(template_id::question_generation), kQuestionGeneration, M::summarizer, kCreative});
    r.add({std::string(template_id::context_relevance), kContextRelevance, M::reasoner, kStructured});
    r.add({std::string(template_id::claim_decomposition), kClaimDecomposition, M::reasoner, kStructured});
    r.add({std::string(template_id::claim_verification), kClaimVerification, M::reasoner, kStructured});
    r.add({std::string(template_id::cluster_label), kClusterLabel, M::summarizer, kCreative});
    r.add({std::string(template_id::structured_repair), kStructuredRepair, M::reasoner, kStructured});
    return r;
}

}  // namespace

const TemplateRegistry& shipped_templates() {
    static const TemplateRegistry registry = build();
    return registry;
}

}  // namespace scitab::gateway
