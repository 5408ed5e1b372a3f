#include "scitab/ingest/document.hpp"

#include "scitab/csv.hpp"
#include "scitab/error.hpp"
#include "scitab/text.hpp"

namespace scitab::ingest {

const std::array<std::string_view, 13>& PaperMeta::keys() {
    static constexpr std::array<std::string_view, 13> k{"title", "abstract", "year",  "author", "venue",
                                                        "issn",  "volume",   "issue", "page",   "doi",
                                                        "link",  "publisher", "language"};
    return k;
}

std::string& PaperMeta::at(std::string_view key) {
    return const_cast<std::string&>(static_cast<const PaperMeta&>(*this).at(key));
}

const std::string& PaperMeta::at(std::string_view key) const {
    if (key == "title") return title;
    if (key == "abstract") return abstract;
    if (key == "year") return year;
    if (key == "author") return author;
    if (key == "venue") return venue;
    if (key == "issn") return issn;
    if (key == "volume") return volume;
    if (key == "issue") return issue;
    if (key == "page") return page;
    if (key == "doi") return doi;
    if (key == "link") return link;
    if (key == "publisher") return publisher;
    if (key == "language") return language;
    throw UsageError("unknown meta key '" + std::string(key) + "'");
}

std::optional<std::string_view> meta_field_for(std::string_view raw) {
    auto key = text::to_lower(text::trim(raw));
    if (key == "journal/conference" || key == "journal" || key == "conference") return "venue";
    if (key == "authors") return "author";
    if (key == "pages") return "page";
    for (auto k : PaperMeta::keys())
        if (k == key) return k;
    return std::nullopt;
}

std::string StructuredTable::to_text() const {
    std::vector<csv::Row> rows_out;
    rows_out.reserve(rows.size() + 1);
    rows_out.push_back(header);
    rows_out.insert(rows_out.end(), rows.begin(), rows.end());
    std::string out = caption.empty() ? std::string() : caption + "\n";
    return out + csv::write(rows_out);
}

std::string DocumentBundle::full_text() const {
    std::string out;
    for (const auto& s : snippets) {
        if (!out.empty() && !s.text.empty() && !text::is_space(out.back()) && !text::is_space(s.text.front()))
            out.push_back('\n');
        out += s.text;
    }
    return out;
}

}  // namespace scitab::ingest
