#include "cotcurate/sft_dataset.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "cotcurate/assess.hpp"
#include "cotcurate/corpus.hpp"
#include "cotcurate/cot_parse.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/sampling.hpp"

namespace cotcurate {
namespace {

std::string key(const std::string& id, int index) { return id + "\x1f" + std::to_string(index); }

// Furthest funnel stage reached; higher is further.
int stage_rank(AssessStatus s) {
    switch (s) {
        case AssessStatus::kRejectedParse: return 0;
        case AssessStatus::kRejectedAc: return 1;
        case AssessStatus::kRejectedSf: return 2;
        case AssessStatus::kRejectedIcUnscorable: return 3;
        case AssessStatus::kCandidate:
        case AssessStatus::kSelected: return 4;
    }
    return 0;
}

constexpr const char* kStageNames[] = {"parse", "answer_correctness", "source_faithfulness", "intrinsic_consistency",
                                       "unselected"};

}  // namespace

std::string render_target(const ReasoningPath& path) {
    if (path.parse_status == ParseStatus::kFailed) {
        throw DataError("render_target on failed path " + path.example_id + "/" + std::to_string(path.sample_index));
    }
    ordered_json j;
    j["reasoning"] = path.reasoning;
    j["answer"] = path.answer;
    return j.dump(4, ' ', false, ordered_json::error_handler_t::replace);
}

SftBuild build_sft(const std::vector<Selection>& selections, const std::vector<AssessmentRecord>& assessed,
                   const std::vector<ReasoningPath>& paths, const std::vector<TrainingExample>& examples) {
    std::unordered_map<std::string, const TrainingExample*> example_by_id;
    for (const auto& e : examples) example_by_id.emplace(e.id, &e);
    std::unordered_map<std::string, const ReasoningPath*> path_by_key;
    for (const auto& p : paths) path_by_key.emplace(key(p.example_id, p.sample_index), &p);
    std::unordered_map<std::string, const AssessmentRecord*> record_by_key;
    for (const auto& r : assessed) record_by_key.emplace(key(r.example_id, r.sample_index), &r);

    std::vector<std::string> dangling;
    std::vector<std::string> unselected;
    std::set<std::string> seen_examples;
    SftBuild build;
    for (const auto& s : selections) {
        const auto label = s.example_id + "/" + std::to_string(s.sample_index);
        auto p = path_by_key.find(key(s.example_id, s.sample_index));
        auto e = example_by_id.find(s.example_id);
        if (p == path_by_key.end() || e == example_by_id.end()) {
            dangling.push_back(label);
            continue;
        }
        auto r = record_by_key.find(key(s.example_id, s.sample_index));
        if (r == record_by_key.end() || r->second->status != AssessStatus::kSelected) {
            unselected.push_back(label);
            continue;
        }
        if (!seen_examples.insert(s.example_id).second) throw DataError("more than one selection for example " + s.example_id);
        SftRecord rec;
        rec.example_id = s.example_id;
        rec.prompt = render_sampling_prompt(*e->second);
        rec.target = render_target(*p->second);
        if (parse_response(rec.target).parse_status != ParseStatus::kOk) {
            throw DataError("target for " + label + " does not reparse cleanly");
        }
        build.records.push_back(std::move(rec));
    }
    auto join = [](const std::vector<std::string>& ids) {
        std::string out;
        for (const auto& id : ids) out += (out.empty() ? "" : ", ") + id;
        return out;
    };
    if (!dangling.empty()) throw DataError("dangling selection references: " + join(dangling));
    if (!unselected.empty()) throw DataError("selections not marked selected in the assessed file: " + join(unselected));

    std::sort(build.records.begin(), build.records.end(),
              [](const SftRecord& a, const SftRecord& b) { return a.example_id < b.example_id; });

    auto& ret = build.retention;
    ret.input_examples = examples.size();
    ret.retained_examples = build.records.size();
    ret.retention_ratio = ret.input_examples == 0
                              ? 0.0
                              : static_cast<double>(ret.retained_examples) / static_cast<double>(ret.input_examples);
    ret.per_stage_losses["no_samples"] = 0;
    for (const char* name : kStageNames) ret.per_stage_losses[name] = 0;
    std::unordered_map<std::string, int> furthest;
    for (const auto& r : assessed) {
        auto [it, inserted] = furthest.emplace(r.example_id, stage_rank(r.status));
        if (!inserted) it->second = std::max(it->second, stage_rank(r.status));
    }
    for (const auto& e : examples) {
        if (seen_examples.contains(e.id)) continue;
        auto it = furthest.find(e.id);
        if (it == furthest.end()) {
            ++ret.per_stage_losses["no_samples"];
        } else {
            ++ret.per_stage_losses[kStageNames[it->second]];
        }
    }
    return build;
}

ordered_json sft_to_json(const SftRecord& r) {
    ordered_json j;
    j["example_id"] = r.example_id;
    j["prompt"] = r.prompt;
    j["target"] = r.target;
    return j;
}

SftRecord sft_from_json(const json& j, std::size_t line) {
    try {
        return {j.at("example_id").get<std::string>(), j.at("prompt").get<std::string>(), j.at("target").get<std::string>()};
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line) + ": malformed sft record: " + e.what());
    }
}

ordered_json retention_to_json(const RetentionReport& r) {
    ordered_json j;
    j["input_examples"] = r.input_examples;
    j["retained_examples"] = r.retained_examples;
    j["retention_ratio"] = r.retention_ratio;
    j["per_stage_losses"] = r.per_stage_losses;
    return j;
}

std::vector<SftRecord> load_sft(const std::filesystem::path& path) {
    std::vector<SftRecord> out;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) { out.push_back(sft_from_json(r, line)); });
    return out;
}

void save_sft(const std::filesystem::path& path, const std::vector<SftRecord>& records) {
    std::vector<ordered_json> rows;
    rows.reserve(records.size());
    for (const auto& r : records) rows.push_back(sft_to_json(r));
    jsonl::write_all(path, rows);
}

}  // namespace cotcurate
