#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cotcurate/jsonl.hpp"

namespace cotcurate {

struct TrainingExample;
class LlmClient;

struct SamplingConfig {
    int n_samples = 30;
    double temperature = 0.7;
    std::string model;
    int max_output_tokens = 1024;
    std::uint64_t seed = 0;  // shuffles dispatch order only

    void validate() const;  // throws UsageError
};

struct RawSample {
    std::string example_id;
    int sample_index = 0;
    std::string raw_text;
    std::string model;
    double temperature = 0.0;
    std::optional<std::string> error;

    friend bool operator==(const RawSample&, const RawSample&) = default;
};

// Sampling prompt with {context} and {question} substituted in a single pass.
std::string render_sampling_prompt(const TrainingExample& example);

std::string sampling_tag(const std::string& example_id, int sample_index);

ordered_json sample_to_json(const RawSample& sample);
RawSample sample_from_json(const json& record, std::size_t line);

// Loads a samples file. A trailing line without a newline that fails to parse is treated as
// an interrupted write: it is dropped and, when repair_tail is set, truncated from disk.
// Throws DataError on any other malformed line or a duplicate (example_id, sample_index).
std::vector<RawSample> load_samples(const std::filesystem::path& path, bool repair_tail = false);

struct SamplingSummary {
    std::size_t examples = 0;
    std::size_t already_present = 0;
    std::size_t requested = 0;
    std::size_t failed = 0;
};

// Emits n_samples records per example to samples_path, appending as each request completes.
// Pairs already on disk are skipped, so an interrupted run resumes where it stopped.
SamplingSummary sample_paths(const SamplingConfig& cfg, const LlmClient& client,
                             const std::vector<TrainingExample>& examples,
                             const std::filesystem::path& samples_path);

}  // namespace cotcurate
