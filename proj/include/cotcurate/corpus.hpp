#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cotcurate/jsonl.hpp"

namespace cotcurate {

class TokenCounter;

struct TrainingExample {
    std::string id;
    std::string context;
    std::string question;
    std::vector<std::string> gold_answers;
    std::map<std::string, std::string> meta;

    friend bool operator==(const TrainingExample&, const TrainingExample&) = default;
};

struct McqExample {
    TrainingExample base;
    std::vector<std::string> options;
    int correct_index = 0;
    std::uint64_t shuffle_seed = 0;

    friend bool operator==(const McqExample&, const McqExample&) = default;
};

enum class Tier { kShort, kMedium, kLong };

struct LengthTier {
    Tier tier = Tier::kShort;
    std::uint64_t measured_tokens = 0;
};

// Boundaries in tokens. Short is strictly below the lower bound, Long strictly above the upper.
inline constexpr std::uint64_t kShortTierLimit = 32'000;
inline constexpr std::uint64_t kLongTierFloor = 96'000;

Tier tier_for(std::uint64_t measured_tokens) noexcept;
std::string_view tier_name(Tier tier) noexcept;  // "short" | "medium" | "long"
Tier parse_tier(std::string_view name);

// Input formats accepted by load_examples.
//   "examples"   {"id","context","question","answers",["meta"]}
//   "longbench"  {"_id","context","input","answers",["dataset","length"]}
inline constexpr std::string_view kExamplesFormat = "examples";
inline constexpr std::string_view kLongBenchFormat = "longbench";

// Records are returned in file order. Throws DataError naming the line on malformed records,
// naming both lines on a duplicate id, and "empty dataset" when no record is present.
std::vector<TrainingExample> load_examples(const std::filesystem::path& path,
                                           std::string_view format = kExamplesFormat);
TrainingExample example_from_json(const json& record, std::size_t line);
ordered_json example_to_json(const TrainingExample& example);
void save_examples(const std::filesystem::path& path, const std::vector<TrainingExample>& examples);

LengthTier measure_length(const TrainingExample& example, const TokenCounter& counter);
LengthTier measure_length(const TrainingExample& example, std::string_view counter_id);

inline constexpr int kDefaultMcqOptions = 4;

// Keys gold_answers[0] and draws k_options - 1 distractors without replacement from the
// pool, then shuffles. Deterministic for a fixed seed on every platform.
McqExample build_mcq(const TrainingExample& example, const std::vector<std::string>& distractor_pool,
                     int k_options = kDefaultMcqOptions, std::uint64_t seed = 0);

// Converts a whole dataset, drawing each example's distractors from the other examples'
// first gold answers. Per-example seeds are derived from (seed, id).
std::vector<McqExample> build_mcq_dataset(const std::vector<TrainingExample>& examples,
                                          int k_options, std::uint64_t seed);

char option_letter(int index);
ordered_json mcq_to_json(const McqExample& mcq);
McqExample mcq_from_json(const json& record, std::size_t line);
std::vector<McqExample> load_mcq(const std::filesystem::path& path);
void save_mcq(const std::filesystem::path& path, const std::vector<McqExample>& items);

// True when the first record of a line-delimited file carries an "options" array.
bool looks_like_mcq_file(const std::filesystem::path& path);

struct DatasetStats {
    std::string counter;
    std::size_t count = 0;
    std::optional<double> mean_tokens;  // absent for an empty dataset
    std::size_t short_count = 0;
    std::size_t medium_count = 0;
    std::size_t long_count = 0;
};

DatasetStats dataset_stats(const std::vector<TrainingExample>& examples, const TokenCounter& counter);
ordered_json stats_to_json(const DatasetStats& stats);

}  // namespace cotcurate
