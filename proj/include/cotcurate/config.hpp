#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cotcurate/assess.hpp"
#include "cotcurate/jsonl.hpp"
#include "cotcurate/llm_client.hpp"
#include "cotcurate/sampling.hpp"

namespace cotcurate {

struct PipelinePaths {
    std::filesystem::path examples;
    std::filesystem::path samples;
    std::filesystem::path parsed;
    std::filesystem::path assessed;
    std::filesystem::path selection;
    std::filesystem::path sft;
    std::filesystem::path outcomes;
    std::filesystem::path reports;  // directory
};

struct EvalDefaults {
    std::string model;  // falls back to sampling.model
    double temperature = 0.7;  // used when votes > 1
    int max_output_tokens = 1024;
    std::string counter = "heuristic";
};

struct PipelineConfig {
    EndpointConfig endpoint;
    EndpointConfig judge_endpoint;  // aliases endpoint when absent from the file
    SamplingConfig sampling;
    AssessmentConfig assessment;
    EvalDefaults eval;
    PipelinePaths paths;
    std::uint64_t seed = 0;

    ordered_json effective;   // fully resolved configuration, defaults included
    std::string config_hash;  // fingerprint of `effective`
};

// Resolution order: built-in defaults, then the config file, then `overrides` (a JSON merge
// patch built from command-line flags). Relative paths resolve against the config file's
// directory. Throws UsageError for a missing file, a bad value or colliding paths.
PipelineConfig load_config(const std::filesystem::path& file, const json& overrides = json::object());

}  // namespace cotcurate
