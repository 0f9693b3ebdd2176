#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotcurate/corpus.hpp"
#include "cotcurate/jsonl.hpp"
#include "cotcurate/token_counter.hpp"

namespace cotcurate {

class LlmClient;

enum class EvalMode { kCot, kDirect };
std::string_view eval_mode_name(EvalMode mode) noexcept;
EvalMode parse_eval_mode(std::string_view name);

enum class EvalMetric { kF1, kChoice };
std::string_view eval_metric_name(EvalMetric metric) noexcept;

struct EvalConfig {
    EvalMode mode = EvalMode::kCot;
    int votes = 1;
    double temperature = 0.0;  // must be > 0 when votes > 1
    std::string counter = std::string(kDefaultCounter);
    std::uint64_t seed = 0;
    std::string model;
    int max_output_tokens = 1024;

    void validate() const;  // throws UsageError
};

// One evaluation item: free-form QA scored by F1, or multiple choice scored by accuracy.
struct EvalItem {
    TrainingExample example;
    std::optional<McqExample> mcq;
    std::string dataset;
};

// Loads either an examples file or an mcq file; dataset names come from meta["source"] or
// fall back to the file stem.
std::vector<EvalItem> load_eval_items(const std::filesystem::path& path);

std::string render_eval_prompt(const EvalItem& item, EvalMode mode);

struct EvalOutcome {
    std::string example_id;
    std::string dataset;
    EvalMetric metric = EvalMetric::kF1;
    std::vector<std::string> reference;  // gold answers, or the correct option letter
    int num_options = 0;
    std::vector<std::string> per_vote_answers;
    std::string final_answer;
    double score = 0.0;
    Tier tier = Tier::kShort;
    std::uint64_t measured_tokens = 0;
    bool flagged = false;  // endpoint failure, unparseable output, or no option letter

    friend bool operator==(const EvalOutcome&, const EvalOutcome&) = default;
};

// Scores one answer against the outcome's reference using its metric.
double score_answer(const EvalOutcome& outcome, std::string_view answer);

// Majority vote over the answers (choice outcomes vote on extracted letters) and returns the
// chosen answer text.
std::string vote_answers(const EvalOutcome& outcome, const std::vector<std::string>& answers);

struct MeanScore {
    std::size_t count = 0;
    std::optional<double> mean;
};

struct EvalReport {
    std::string mode;
    int votes = 1;
    std::string counter;
    MeanScore overall;
    std::map<std::string, MeanScore> by_tier;  // short, medium, long
    std::map<std::string, MeanScore> by_dataset;
    std::size_t flagged = 0;
};

struct EvalRun {
    std::vector<EvalOutcome> outcomes;  // sorted by example_id
    EvalReport report;
};

EvalRun evaluate(const std::vector<EvalItem>& items, const LlmClient& client, const EvalConfig& cfg);
EvalReport summarize(const std::vector<EvalOutcome>& outcomes, std::string mode, int votes, std::string counter);

ordered_json outcome_to_json(const EvalOutcome& outcome);
EvalOutcome outcome_from_json(const json& j, std::size_t line);
std::vector<EvalOutcome> load_outcomes(const std::filesystem::path& path);
void save_outcomes(const std::filesystem::path& path, const std::vector<EvalOutcome>& outcomes);
ordered_json report_to_json(const EvalReport& report);

struct GainCell {
    std::size_t count = 0;
    std::optional<double> gain_points;  // mean(score_b - score_a) * 100
};

struct GainTable {
    std::map<std::string, GainCell> by_tier;  // short, medium, long
    GainCell overall;
};

// Throws DataError listing the symmetric difference when the id sets differ.
GainTable gain_report(const std::vector<EvalOutcome>& run_a, const std::vector<EvalOutcome>& run_b);
ordered_json gain_to_json(const GainTable& table);
std::string gain_to_text(const GainTable& table);

struct VotingCurve {
    std::size_t k = 0;
    std::vector<double> vote;    // mean majority-vote score over the first j answers
    std::vector<double> oracle;  // fraction with any of the first j answers scoring 1.0
    std::map<std::string, std::vector<double>> per_example_vote;
    std::map<std::string, std::vector<double>> per_example_oracle;
};

VotingCurve voting_curve(const std::vector<EvalOutcome>& outcomes);
ordered_json curve_to_json(const VotingCurve& curve);

}  // namespace cotcurate
