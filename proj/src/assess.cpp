#include "cotcurate/assess.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <set>
#include <unordered_map>

#include "cotcurate/bounded_pool.hpp"
#include "cotcurate/corpus.hpp"
#include "cotcurate/cot_parse.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/llm_client.hpp"
#include "cotcurate/metrics.hpp"
#include "cotcurate/templates.hpp"

namespace cotcurate {
namespace {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t code_points(std::string_view s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

}  // namespace

void AssessmentConfig::validate() const {
    if (!(delta >= 0.0 && delta <= 1.0)) throw UsageError("assessment.delta must be in [0, 1]");
    if (judge_max_attempts < 1) throw UsageError("assessment.judge_max_attempts must be >= 1");
    if (judge_max_output_tokens < 1) throw UsageError("assessment.judge_max_output_tokens must be positive");
}

std::string_view assess_status_name(AssessStatus status) noexcept {
    switch (status) {
        case AssessStatus::kRejectedParse: return "rejected_parse";
        case AssessStatus::kRejectedAc: return "rejected_ac";
        case AssessStatus::kRejectedSf: return "rejected_sf";
        case AssessStatus::kRejectedIcUnscorable: return "rejected_ic_unscorable";
        case AssessStatus::kCandidate: return "candidate";
        case AssessStatus::kSelected: return "selected";
    }
    return "rejected_parse";
}

AssessStatus assess_status_from(std::string_view name) {
    for (auto s : {AssessStatus::kRejectedParse, AssessStatus::kRejectedAc, AssessStatus::kRejectedSf,
                   AssessStatus::kRejectedIcUnscorable, AssessStatus::kCandidate, AssessStatus::kSelected}) {
        if (assess_status_name(s) == name) return s;
    }
    throw DataError("unknown assessment status: " + std::string(name));
}

AnswerCheck check_answer_correctness(const ReasoningPath& path, const TrainingExample& example,
                                     const AssessmentConfig& cfg) {
    AnswerCheck check;
    check.f1 = metrics::f1(path.answer, example.gold_answers);
    check.pass = check.f1 >= cfg.delta;
    return check;
}

std::string fold_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_space = false;
    for (char c : text) {
        if (is_space(c)) {
            if (!in_space) out += ' ';
            in_space = true;
        } else {
            out += c;
            in_space = false;
        }
    }
    return out;
}

FaithfulnessCheck check_source_faithfulness_prepared(const ReasoningPath& path, std::string_view prepared_context,
                                                     const AssessmentConfig& cfg) {
    FaithfulnessCheck check;
    bool all = true;
    for (const auto& excerpt : path.excerpts) {
        const std::string needle = cfg.whitespace_fold ? fold_whitespace(excerpt.text) : excerpt.text;
        const bool match = !needle.empty() && prepared_context.find(needle) != std::string_view::npos;
        check.per_excerpt.push_back(match);
        all = all && match;
    }
    // a path with nothing cited has nothing to verify
    check.pass = !path.excerpts.empty() && all && (!cfg.strict_excerpt_limit || path.excerpts.size() <= kMaxExcerpts);
    return check;
}

FaithfulnessCheck check_source_faithfulness(const ReasoningPath& path, const TrainingExample& example,
                                            const AssessmentConfig& cfg) {
    if (cfg.whitespace_fold) return check_source_faithfulness_prepared(path, fold_whitespace(example.context), cfg);
    return check_source_faithfulness_prepared(path, example.context, cfg);
}

std::string render_judge_prompt(std::string_view question, std::string_view reasoning) {
    return templates::render(templates::judge_template(),
                             {{"question", std::string(question)}, {"reasoning", std::string(reasoning)}});
}

std::optional<int> parse_rating(std::string_view judge_reply) {
    static const std::regex kRating(R"(Rating:\s*\[\[\s*(\d{1,3})\s*\]\])");
    std::optional<int> rating;
    const std::string text(judge_reply);
    for (auto it = std::sregex_iterator(text.begin(), text.end(), kRating); it != std::sregex_iterator(); ++it) {
        rating = std::stoi((*it)[1].str());
    }
    if (rating && (*rating < 1 || *rating > 100)) return std::nullopt;
    return rating;
}

std::string judge_tag(const std::string& example_id, int sample_index) {
    return "judge/" + example_id + "/" + std::to_string(sample_index);
}

ConsistencyScore score_intrinsic_consistency(const ReasoningPath& path, const TrainingExample& example,
                                             const AssessmentConfig& cfg, const LlmClient& judge) {
    ConsistencyScore result;
    // the judge sees the question and the reasoning only, never the long context
    const auto request = make_user_request(cfg.judge_model, render_judge_prompt(example.question, path.reasoning), 0.0,
                                           cfg.judge_max_output_tokens, judge_tag(path.example_id, path.sample_index));
    for (int attempt = 1; attempt <= cfg.judge_max_attempts; ++attempt) {
        result.attempts = attempt;
        try {
            auto reply = judge.complete(request);
            result.judge_raw = reply.content;
            result.score = parse_rating(reply.content);
            if (result.score) return result;
        } catch (const EndpointError&) {
            return result;
        }
    }
    return result;
}

std::optional<std::size_t> select_best(std::vector<AssessmentRecord>& records, const std::vector<ReasoningPath>& paths) {
    if (records.size() != paths.size()) throw DataError("select_best: records and paths differ in length");
    if (records.empty()) return std::nullopt;
    const auto& id = records.front().example_id;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].example_id != id) {
            throw DataError("select_best: mixed example ids " + id + " and " + records[i].example_id);
        }
        if (paths[i].example_id != id || paths[i].sample_index != records[i].sample_index) {
            throw DataError("select_best: path " + std::to_string(i) + " does not correspond to its record");
        }
    }
    std::optional<std::size_t> best;
    std::size_t best_len = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& ic = records[i].ic;
        if (!ic || !ic->score) continue;
        const auto len = code_points(paths[i].reasoning);
        if (!best) {
            best = i;
            best_len = len;
            continue;
        }
        const int best_score = *records[*best].ic->score;
        const bool better = *ic->score > best_score ||
                            (*ic->score == best_score &&
                             (len < best_len || (len == best_len && records[i].sample_index < records[*best].sample_index)));
        if (better) {
            best = i;
            best_len = len;
        }
    }
    if (best) records[*best].status = AssessStatus::kSelected;
    return best;
}

AssessResult assess_all(const std::vector<ReasoningPath>& paths, const std::vector<TrainingExample>& examples,
                        const AssessmentConfig& cfg, const LlmClient& judge) {
    cfg.validate();
    std::unordered_map<std::string, const TrainingExample*> by_id;
    for (const auto& e : examples) by_id.emplace(e.id, &e);

    std::vector<const ReasoningPath*> sorted;
    sorted.reserve(paths.size());
    for (const auto& p : paths) {
        if (!by_id.contains(p.example_id)) throw DataError("parsed path refers to unknown example " + p.example_id);
        sorted.push_back(&p);
    }
    std::sort(sorted.begin(), sorted.end(), [](const ReasoningPath* a, const ReasoningPath* b) {
        return std::tie(a->example_id, a->sample_index) < std::tie(b->example_id, b->sample_index);
    });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i]->example_id == sorted[i - 1]->example_id && sorted[i]->sample_index == sorted[i - 1]->sample_index) {
            throw DataError("duplicate parsed path " + sorted[i]->example_id + "/" + std::to_string(sorted[i]->sample_index));
        }
    }

    AssessResult result;
    result.funnel.delta = cfg.delta;
    result.funnel.paths = sorted.size();
    result.records.resize(sorted.size());
    std::map<std::string, std::string> prepared;  // example id -> (folded) context
    std::vector<std::size_t> survivors;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& path = *sorted[i];
        auto& rec = result.records[i];
        rec.example_id = path.example_id;
        rec.sample_index = path.sample_index;
        if (path.parse_status == ParseStatus::kFailed) {
            rec.status = AssessStatus::kRejectedParse;
            continue;
        }
        ++result.funnel.parsed;
        const auto& example = *by_id.at(path.example_id);
        rec.ac = check_answer_correctness(path, example, cfg);
        if (!rec.ac->pass) {
            rec.status = AssessStatus::kRejectedAc;
            continue;
        }
        ++result.funnel.ac_pass;
        auto ctx = prepared.find(path.example_id);
        if (ctx == prepared.end()) {
            ctx = prepared.emplace(path.example_id, cfg.whitespace_fold ? fold_whitespace(example.context) : example.context).first;
        }
        rec.sf = check_source_faithfulness_prepared(path, ctx->second, cfg);
        if (!rec.sf->pass) {
            rec.status = AssessStatus::kRejectedSf;
            continue;
        }
        ++result.funnel.sf_pass;
        survivors.push_back(i);
    }

    parallel_for_bounded(survivors.size(), static_cast<std::size_t>(judge.config().max_concurrency), [&](std::size_t k) {
        const auto i = survivors[k];
        auto& rec = result.records[i];
        rec.ic = score_intrinsic_consistency(*sorted[i], *by_id.at(rec.example_id), cfg, judge);
        rec.status = rec.ic->score ? AssessStatus::kCandidate : AssessStatus::kRejectedIcUnscorable;
    });
    for (auto i : survivors) {
        result.funnel.judge_requests += static_cast<std::size_t>(result.records[i].ic->attempts);
        if (result.records[i].ic->score) ++result.funnel.ic_scored;
    }

    for (std::size_t begin = 0; begin < sorted.size();) {
        std::size_t end = begin;
        while (end < sorted.size() && sorted[end]->example_id == sorted[begin]->example_id) ++end;
        std::vector<AssessmentRecord> group(result.records.begin() + static_cast<std::ptrdiff_t>(begin),
                                            result.records.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<ReasoningPath> group_paths;
        for (std::size_t i = begin; i < end; ++i) group_paths.push_back(*sorted[i]);
        if (auto best = select_best(group, group_paths)) {
            result.records[begin + *best].status = AssessStatus::kSelected;
            result.selections.push_back({group[*best].example_id, group[*best].sample_index});
            ++result.funnel.selected;
        }
        begin = end;
    }
    return result;
}

ordered_json record_to_json(const AssessmentRecord& r) {
    ordered_json j;
    j["example_id"] = r.example_id;
    j["sample_index"] = r.sample_index;
    j["status"] = assess_status_name(r.status);
    if (r.ac) j["ac"] = {{"f1", r.ac->f1}, {"pass", r.ac->pass}};
    if (r.sf) {
        ordered_json flags = ordered_json::array();
        for (bool b : r.sf->per_excerpt) flags.push_back(b);
        j["sf"] = {{"per_excerpt", flags}, {"pass", r.sf->pass}};
    }
    if (r.ic) {
        ordered_json ic;
        ic["score"] = r.ic->score ? ordered_json(*r.ic->score) : ordered_json(nullptr);
        ic["judge_raw"] = r.ic->judge_raw ? ordered_json(*r.ic->judge_raw) : ordered_json(nullptr);
        ic["attempts"] = r.ic->attempts;
        j["ic"] = ic;
    }
    return j;
}

AssessmentRecord record_from_json(const json& j, std::size_t line) {
    try {
        AssessmentRecord r;
        r.example_id = j.at("example_id").get<std::string>();
        r.sample_index = j.at("sample_index").get<int>();
        r.status = assess_status_from(j.at("status").get<std::string>());
        if (auto it = j.find("ac"); it != j.end()) r.ac = AnswerCheck{it->at("f1").get<double>(), it->at("pass").get<bool>()};
        if (auto it = j.find("sf"); it != j.end()) {
            FaithfulnessCheck sf;
            for (const auto& b : it->at("per_excerpt")) sf.per_excerpt.push_back(b.get<bool>());
            sf.pass = it->at("pass").get<bool>();
            r.sf = std::move(sf);
        }
        if (auto it = j.find("ic"); it != j.end()) {
            ConsistencyScore ic;
            if (const auto& s = it->at("score"); !s.is_null()) ic.score = s.get<int>();
            if (const auto& raw = it->at("judge_raw"); !raw.is_null()) ic.judge_raw = raw.get<std::string>();
            ic.attempts = it->value("attempts", 0);
            r.ic = std::move(ic);
        }
        return r;
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line) + ": malformed assessment record: " + e.what());
    }
}

ordered_json funnel_to_json(const FunnelReport& f) {
    ordered_json j;
    j["delta"] = f.delta;
    j["paths"] = f.paths;
    j["parsed"] = f.parsed;
    j["ac_pass"] = f.ac_pass;
    j["sf_pass"] = f.sf_pass;
    j["ic_scored"] = f.ic_scored;
    j["selected"] = f.selected;
    j["judge_requests"] = f.judge_requests;
    return j;
}

ordered_json selection_to_json(const Selection& s) {
    ordered_json j;
    j["example_id"] = s.example_id;
    j["sample_index"] = s.sample_index;
    return j;
}

Selection selection_from_json(const json& j, std::size_t line) {
    try {
        return {j.at("example_id").get<std::string>(), j.at("sample_index").get<int>()};
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line) + ": malformed selection row: " + e.what());
    }
}

std::vector<AssessmentRecord> load_assessed(const std::filesystem::path& path) {
    std::vector<AssessmentRecord> out;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) { out.push_back(record_from_json(r, line)); });
    return out;
}

std::vector<Selection> load_selection(const std::filesystem::path& path) {
    std::vector<Selection> out;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) { out.push_back(selection_from_json(r, line)); });
    return out;
}

void write_assessment(const AssessResult& result, const std::filesystem::path& assessed_path,
                      const std::filesystem::path& selection_path) {
    std::vector<ordered_json> rows;
    rows.reserve(result.records.size());
    for (const auto& r : result.records) rows.push_back(record_to_json(r));
    jsonl::write_all(assessed_path, rows);
    rows.clear();
    for (const auto& s : result.selections) rows.push_back(selection_to_json(s));
    jsonl::write_all(selection_path, rows);
}

}  // namespace cotcurate
