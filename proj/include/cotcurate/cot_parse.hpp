#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotcurate/jsonl.hpp"

namespace cotcurate {

struct RawSample;

struct Excerpt {
    int label = 0;
    std::string text;

    friend bool operator==(const Excerpt&, const Excerpt&) = default;
};

enum class ParseStatus { kOk, kRepaired, kFailed };

std::string_view parse_status_name(ParseStatus status) noexcept;
ParseStatus parse_status_from(std::string_view name);

struct ReasoningPath {
    std::string example_id;
    int sample_index = 0;
    std::string reasoning;
    std::string answer;
    std::vector<Excerpt> excerpts;
    ParseStatus parse_status = ParseStatus::kFailed;
    std::optional<std::string> parse_note;

    friend bool operator==(const ReasoningPath&, const ReasoningPath&) = default;
};

inline constexpr std::size_t kMaxExcerpts = 10;

struct ExcerptExtraction {
    std::vector<Excerpt> excerpts;
    std::vector<std::string> notes;  // one per marker that did not yield an excerpt
};

// Finds every "[Excerpt <digits>]" marker followed, after optional whitespace, by a
// backtick-delimited span. Markers without a span are reported in notes.
ExcerptExtraction extract_excerpts(std::string_view reasoning);

// Never throws. Strict tier: the trimmed text is a JSON object with string "reasoning" and
// "answer". Lenient tier: a pattern search for the two quoted fields. Otherwise failed.
ReasoningPath parse_response(std::string_view raw_text);
ReasoningPath parse_path(const RawSample& sample);

struct ExcerptCount {
    std::size_t count = 0;
    bool over_limit = false;
};

// Throws DataError for a failed path.
ExcerptCount count_excerpts(const ReasoningPath& path);

ordered_json path_to_json(const ReasoningPath& path);
ReasoningPath path_from_json(const json& record, std::size_t line);
std::vector<ReasoningPath> load_paths(const std::filesystem::path& path);
void save_paths(const std::filesystem::path& path, const std::vector<ReasoningPath>& paths);

}  // namespace cotcurate
