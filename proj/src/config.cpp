#include "cotcurate/config.hpp"

#include <map>
#include <set>

#include "cotcurate/error.hpp"
#include "cotcurate/hashing.hpp"

namespace cotcurate {
namespace {

json built_in_defaults() {
    return json::parse(R"({
      "endpoint": {
        "base_url": "",
        "api_key_env": "OPENAI_API_KEY",
        "max_concurrency": 4,
        "retry": {"max_attempts": 3, "backoff_base_ms": 500},
        "timeout_ms": 120000
      },
      "sampling": {"n_samples": 30, "temperature": 0.7, "model": "", "max_output_tokens": 1024},
      "assessment": {
        "delta": 1.0,
        "judge_model": "",
        "judge_max_attempts": 3,
        "judge_max_output_tokens": 512,
        "strict_excerpt_limit": false,
        "whitespace_fold": true
      },
      "eval": {"model": "", "temperature": 0.7, "max_output_tokens": 1024, "counter": "heuristic"},
      "paths": {
        "examples": "examples.jsonl",
        "samples": "samples.jsonl",
        "parsed": "parsed.jsonl",
        "assessed": "assessed.jsonl",
        "selection": "selection.jsonl",
        "sft": "sft.jsonl",
        "outcomes": "outcomes.jsonl",
        "reports": "reports"
      },
      "seed": 0
    })");
}

void reject_unknown_keys(const json& given, const json& allowed, const std::string& where) {
    if (!given.is_object()) throw UsageError("config: " + (where.empty() ? std::string("document") : where) + " must be an object");
    for (const auto& [k, v] : given.items()) {
        const auto full = where.empty() ? k : where + "." + k;
        if (!allowed.contains(k)) throw UsageError("config: unknown key " + full);
        if (allowed.at(k).is_object() && !v.is_null()) reject_unknown_keys(v, allowed.at(k), full);
    }
}

template <typename T>
T get(const json& j, const char* section, const char* key) {
    try {
        return j.at(section).at(key).get<T>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + section + "." + key + ": " + e.what());
    }
}

}  // namespace

PipelineConfig load_config(const std::filesystem::path& file, const json& overrides) {
    if (!std::filesystem::exists(file)) throw UsageError("config file not found: " + file.string());
    json given = json::parse(jsonl::read_text(file), nullptr, false);
    if (given.is_discarded()) throw UsageError("config file is not valid JSON: " + file.string());

    json allowed = built_in_defaults();
    allowed["judge_endpoint"] = allowed["endpoint"];
    reject_unknown_keys(given, allowed, "");

    json merged = built_in_defaults();
    merged.merge_patch(given);
    merged.merge_patch(overrides);
    if (!merged.contains("judge_endpoint") || merged["judge_endpoint"].is_null()) {
        merged["judge_endpoint"] = merged["endpoint"];
    } else {
        json judge = merged["endpoint"];
        judge.merge_patch(merged["judge_endpoint"]);
        merged["judge_endpoint"] = judge;
    }

    PipelineConfig cfg;
    cfg.endpoint = endpoint_from_json(merged["endpoint"]);
    cfg.judge_endpoint = endpoint_from_json(merged["judge_endpoint"]);
    try {
        cfg.seed = merged.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: seed: ") + e.what());
    }

    cfg.sampling.n_samples = get<int>(merged, "sampling", "n_samples");
    cfg.sampling.temperature = get<double>(merged, "sampling", "temperature");
    cfg.sampling.model = get<std::string>(merged, "sampling", "model");
    cfg.sampling.max_output_tokens = get<int>(merged, "sampling", "max_output_tokens");
    cfg.sampling.seed = cfg.seed;
    cfg.sampling.validate();

    cfg.assessment.delta = get<double>(merged, "assessment", "delta");
    cfg.assessment.judge_model = get<std::string>(merged, "assessment", "judge_model");
    cfg.assessment.judge_max_attempts = get<int>(merged, "assessment", "judge_max_attempts");
    cfg.assessment.judge_max_output_tokens = get<int>(merged, "assessment", "judge_max_output_tokens");
    cfg.assessment.strict_excerpt_limit = get<bool>(merged, "assessment", "strict_excerpt_limit");
    cfg.assessment.whitespace_fold = get<bool>(merged, "assessment", "whitespace_fold");
    cfg.assessment.validate();

    cfg.eval.model = get<std::string>(merged, "eval", "model");
    if (cfg.eval.model.empty()) cfg.eval.model = cfg.sampling.model;
    cfg.eval.temperature = get<double>(merged, "eval", "temperature");
    cfg.eval.max_output_tokens = get<int>(merged, "eval", "max_output_tokens");
    cfg.eval.counter = get<std::string>(merged, "eval", "counter");

    const auto base = file.has_parent_path() ? file.parent_path() : std::filesystem::path(".");
    for (auto* ep : {&cfg.endpoint, &cfg.judge_endpoint}) {
        if (!ep->is_stub()) continue;
        std::filesystem::path fixture(ep->base_url.substr(5));
        if (fixture.is_relative()) ep->base_url = "stub:" + (base / fixture).lexically_normal().string();
    }
    auto resolve = [&](const char* key) {
        std::filesystem::path p(get<std::string>(merged, "paths", key));
        return (p.is_absolute() ? p : base / p).lexically_normal();
    };
    cfg.paths.examples = resolve("examples");
    cfg.paths.samples = resolve("samples");
    cfg.paths.parsed = resolve("parsed");
    cfg.paths.assessed = resolve("assessed");
    cfg.paths.selection = resolve("selection");
    cfg.paths.sft = resolve("sft");
    cfg.paths.outcomes = resolve("outcomes");
    cfg.paths.reports = resolve("reports");

    std::map<std::string, std::string> owners;
    for (const auto& [name, p] : std::initializer_list<std::pair<const char*, const std::filesystem::path*>>{
             {"examples", &cfg.paths.examples}, {"samples", &cfg.paths.samples}, {"parsed", &cfg.paths.parsed},
             {"assessed", &cfg.paths.assessed}, {"selection", &cfg.paths.selection}, {"sft", &cfg.paths.sft},
             {"outcomes", &cfg.paths.outcomes}, {"reports", &cfg.paths.reports}}) {
        auto [it, inserted] = owners.emplace(p->string(), name);
        if (!inserted) throw UsageError("config: paths." + it->second + " and paths." + name + " collide: " + p->string());
    }

    cfg.effective = ordered_json::parse(merged.dump());
    cfg.config_hash = to_hex(fnv1a64(merged.dump()));
    return cfg;
}

}  // namespace cotcurate
