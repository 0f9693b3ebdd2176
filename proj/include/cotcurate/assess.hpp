#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotcurate/jsonl.hpp"

namespace cotcurate {

struct TrainingExample;
struct ReasoningPath;
class LlmClient;

struct AssessmentConfig {
    double delta = 1.0;
    std::string judge_model;
    int judge_max_attempts = 3;
    int judge_max_output_tokens = 512;
    bool strict_excerpt_limit = false;
    bool whitespace_fold = true;

    void validate() const;  // throws UsageError
};

enum class AssessStatus {
    kRejectedParse,
    kRejectedAc,
    kRejectedSf,
    kRejectedIcUnscorable,
    kCandidate,
    kSelected,
};

std::string_view assess_status_name(AssessStatus status) noexcept;
AssessStatus assess_status_from(std::string_view name);

struct AnswerCheck {
    double f1 = 0.0;
    bool pass = false;
};

struct FaithfulnessCheck {
    std::vector<bool> per_excerpt;
    bool pass = false;
};

struct ConsistencyScore {
    std::optional<int> score;            // 1..100
    std::optional<std::string> judge_raw;  // last judge reply
    int attempts = 0;
};

struct AssessmentRecord {
    std::string example_id;
    int sample_index = 0;
    std::optional<AnswerCheck> ac;
    std::optional<FaithfulnessCheck> sf;  // present only if ac passed
    std::optional<ConsistencyScore> ic;   // present only if sf passed
    AssessStatus status = AssessStatus::kRejectedParse;
};

AnswerCheck check_answer_correctness(const ReasoningPath& path, const TrainingExample& example,
                                     const AssessmentConfig& cfg);

// Collapses each run of whitespace to one space.
std::string fold_whitespace(std::string_view text);

FaithfulnessCheck check_source_faithfulness(const ReasoningPath& path, const TrainingExample& example,
                                            const AssessmentConfig& cfg);

// Same check against a context that has already been folded (when cfg.whitespace_fold).
FaithfulnessCheck check_source_faithfulness_prepared(const ReasoningPath& path,
                                                     std::string_view prepared_context,
                                                     const AssessmentConfig& cfg);

std::string render_judge_prompt(std::string_view question, std::string_view reasoning);

// Parses the last "Rating: [[<int>]]" line. Values outside 1..100 are rejected.
std::optional<int> parse_rating(std::string_view judge_reply);

std::string judge_tag(const std::string& example_id, int sample_index);

ConsistencyScore score_intrinsic_consistency(const ReasoningPath& path, const TrainingExample& example,
                                             const AssessmentConfig& cfg, const LlmClient& judge);

// Marks the best scorable record selected and returns its position, or nullopt if none is
// scorable. Highest score wins; ties go to the shorter reasoning (code points), then the lower
// sample_index. Throws DataError on mixed example ids or mismatched lengths.
std::optional<std::size_t> select_best(std::vector<AssessmentRecord>& records,
                                       const std::vector<ReasoningPath>& paths);

struct FunnelReport {
    double delta = 1.0;
    std::size_t paths = 0;
    std::size_t parsed = 0;
    std::size_t ac_pass = 0;
    std::size_t sf_pass = 0;
    std::size_t ic_scored = 0;
    std::size_t selected = 0;
    std::size_t judge_requests = 0;
};

struct Selection {
    std::string example_id;
    int sample_index = 0;
};

struct AssessResult {
    std::vector<AssessmentRecord> records;  // sorted by (example_id, sample_index)
    std::vector<Selection> selections;      // sorted by example_id
    FunnelReport funnel;
};

// Runs parse -> AC -> SF -> IC -> selection. Judge calls are issued only for paths that
// passed AC and SF. Throws DataError if a path refers to an unknown example.
AssessResult assess_all(const std::vector<ReasoningPath>& paths, const std::vector<TrainingExample>& examples,
                        const AssessmentConfig& cfg, const LlmClient& judge);

ordered_json record_to_json(const AssessmentRecord& record);
AssessmentRecord record_from_json(const json& j, std::size_t line);
ordered_json funnel_to_json(const FunnelReport& report);
ordered_json selection_to_json(const Selection& selection);
Selection selection_from_json(const json& j, std::size_t line);

std::vector<AssessmentRecord> load_assessed(const std::filesystem::path& path);
std::vector<Selection> load_selection(const std::filesystem::path& path);
void write_assessment(const AssessResult& result, const std::filesystem::path& assessed_path,
                      const std::filesystem::path& selection_path);

}  // namespace cotcurate
