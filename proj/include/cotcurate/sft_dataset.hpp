#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cotcurate/jsonl.hpp"

namespace cotcurate {

struct TrainingExample;
struct ReasoningPath;
struct AssessmentRecord;
struct Selection;

struct SftRecord {
    std::string example_id;
    std::string prompt;
    std::string target;

    friend bool operator==(const SftRecord&, const SftRecord&) = default;
};

// Canonical {"reasoning", "answer"} object, fields in that order. Throws DataError for a
// failed path.
std::string render_target(const ReasoningPath& path);

struct RetentionReport {
    std::size_t input_examples = 0;
    std::size_t retained_examples = 0;
    double retention_ratio = 0.0;
    // Examples dropped at each stage, attributed to the furthest stage any of their paths reached.
    std::map<std::string, std::size_t> per_stage_losses;
};

struct SftBuild {
    std::vector<SftRecord> records;  // sorted by example_id
    RetentionReport retention;
};

// Joins selections against parsed paths and examples. Throws DataError naming every
// selection that does not resolve, or that the assessed file does not mark selected.
SftBuild build_sft(const std::vector<Selection>& selections, const std::vector<AssessmentRecord>& assessed,
                   const std::vector<ReasoningPath>& paths, const std::vector<TrainingExample>& examples);

ordered_json sft_to_json(const SftRecord& record);
SftRecord sft_from_json(const json& j, std::size_t line);
ordered_json retention_to_json(const RetentionReport& report);
std::vector<SftRecord> load_sft(const std::filesystem::path& path);
void save_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records);

}  // namespace cotcurate
