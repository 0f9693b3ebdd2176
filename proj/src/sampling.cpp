#include "cotcurate/sampling.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <set>
#include <utility>

#include "cotcurate/corpus.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/llm_client.hpp"
#include "cotcurate/templates.hpp"
#include "random_util.hpp"

namespace cotcurate {

void SamplingConfig::validate() const {
    if (n_samples < 1) throw UsageError("sampling.n_samples must be >= 1");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw UsageError("sampling.temperature must be in [0, 2]");
    if (max_output_tokens < 1) throw UsageError("sampling.max_output_tokens must be positive");
}

std::string render_sampling_prompt(const TrainingExample& example) {
    return templates::render(templates::sampling_template(), {{"context", example.context}, {"question", example.question}});
}

std::string sampling_tag(const std::string& example_id, int sample_index) {
    return "sample/" + example_id + "/" + std::to_string(sample_index);
}

ordered_json sample_to_json(const RawSample& s) {
    ordered_json j;
    j["example_id"] = s.example_id;
    j["sample_index"] = s.sample_index;
    j["raw_text"] = s.raw_text;
    j["model"] = s.model;
    j["temperature"] = s.temperature;
    if (s.error) j["error"] = *s.error;
    return j;
}

RawSample sample_from_json(const json& j, std::size_t line) {
    try {
        RawSample s;
        s.example_id = j.at("example_id").get<std::string>();
        s.sample_index = j.at("sample_index").get<int>();
        s.raw_text = j.at("raw_text").get<std::string>();
        s.model = j.value("model", std::string{});
        s.temperature = j.value("temperature", 0.0);
        if (auto it = j.find("error"); it != j.end() && it->is_string()) s.error = it->get<std::string>();
        if (s.sample_index < 0) throw DataError("line " + std::to_string(line) + ": negative sample_index");
        return s;
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line) + ": malformed sample: " + e.what());
    }
}

std::vector<RawSample> load_samples(const std::filesystem::path& path, bool repair_tail) {
    const std::string text = jsonl::read_text(path);
    std::vector<RawSample> out;
    std::set<std::pair<std::string, int>> keys;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        ++line_no;
        const auto nl = text.find('\n', pos);
        const bool complete = nl != std::string::npos;
        std::string_view line(text.data() + pos, (complete ? nl : text.size()) - pos);
        const std::size_t line_start = pos;
        pos = complete ? nl + 1 : text.size();
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

        json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            if (!complete) {
                // interrupted write: drop the partial tail
                if (repair_tail) std::filesystem::resize_file(path, line_start);
                break;
            }
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed record");
        }
        RawSample s = sample_from_json(record, line_no);
        if (!keys.emplace(s.example_id, s.sample_index).second) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": duplicate sample " + s.example_id + "/" +
                            std::to_string(s.sample_index));
        }
        out.push_back(std::move(s));
        if (!complete && repair_tail) {
            std::ofstream fix(path, std::ios::binary | std::ios::app);
            fix << '\n';
        }
    }
    return out;
}

SamplingSummary sample_paths(const SamplingConfig& cfg, const LlmClient& client,
                             const std::vector<TrainingExample>& examples,
                             const std::filesystem::path& samples_path) {
    cfg.validate();
    std::set<std::pair<std::string, int>> present;
    if (std::filesystem::exists(samples_path)) {
        for (auto& s : load_samples(samples_path, /*repair_tail=*/true)) present.emplace(s.example_id, s.sample_index);
    }

    SamplingSummary summary;
    summary.examples = examples.size();
    struct Pending {
        std::size_t example;
        int index;
    };
    std::vector<Pending> pending;
    for (std::size_t e = 0; e < examples.size(); ++e) {
        for (int i = 0; i < cfg.n_samples; ++i) {
            if (present.contains({examples[e].id, i})) {
                ++summary.already_present;
            } else {
                pending.push_back({e, i});
            }
        }
    }
    std::mt19937_64 rng(cfg.seed);
    detail::portable_shuffle(pending, rng);

    summary.requested = pending.size();
    if (pending.empty()) return summary;

    // Requests are built chunk by chunk: each one carries a full long-context prompt, so the
    // whole run is never materialized at once.
    const std::size_t chunk = std::max<std::size_t>(64, 4 * static_cast<std::size_t>(client.config().max_concurrency));
    jsonl::Appender appender(samples_path);
    for (std::size_t begin = 0; begin < pending.size(); begin += chunk) {
        const std::size_t end = std::min(pending.size(), begin + chunk);
        std::vector<ChatRequest> requests;
        requests.reserve(end - begin);
        for (std::size_t k = begin; k < end; ++k) {
            const auto& ex = examples[pending[k].example];
            requests.push_back(make_user_request(cfg.model, render_sampling_prompt(ex), cfg.temperature,
                                                 cfg.max_output_tokens, sampling_tag(ex.id, pending[k].index)));
        }
        client.complete_batch(requests, [&](std::size_t i, const ChatResponse& resp) {
            const auto& p = pending[begin + i];
            RawSample s;
            s.example_id = examples[p.example].id;
            s.sample_index = p.index;
            s.model = cfg.model;
            s.temperature = cfg.temperature;
            if (resp.ok()) {
                s.raw_text = resp.content;
            } else {
                s.error = resp.error;
                ++summary.failed;
            }
            appender.append(sample_to_json(s));
        });
    }
    return summary;
}

}  // namespace cotcurate
