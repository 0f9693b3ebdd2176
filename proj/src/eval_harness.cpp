#include "cotcurate/eval_harness.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <set>
#include <unordered_map>

#include "cotcurate/cot_parse.hpp"
#include "cotcurate/error.hpp"
#include "cotcurate/llm_client.hpp"
#include "cotcurate/metrics.hpp"
#include "cotcurate/sampling.hpp"
#include "cotcurate/templates.hpp"
#include "cotcurate/token_counter.hpp"

namespace cotcurate {
namespace {

constexpr const char* kTierKeys[] = {"short", "medium", "long"};

std::string trim_copy(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::string choice_key(const EvalOutcome& o, std::string_view answer) {
    auto c = metrics::extract_choice(answer, o.num_options);
    return c ? std::string(1, option_letter(*c)) : std::string{};
}

struct Accumulator {
    std::size_t count = 0;
    double sum = 0.0;
    MeanScore finish() const {
        MeanScore m;
        m.count = count;
        if (count > 0) m.mean = sum / static_cast<double>(count);
        return m;
    }
};

ordered_json mean_to_json(const MeanScore& m) {
    ordered_json j;
    j["count"] = m.count;
    j["mean"] = m.mean ? ordered_json(*m.mean) : ordered_json(nullptr);
    return j;
}

}  // namespace

std::string_view eval_mode_name(EvalMode mode) noexcept { return mode == EvalMode::kCot ? "cot" : "direct"; }

EvalMode parse_eval_mode(std::string_view name) {
    if (name == "cot") return EvalMode::kCot;
    if (name == "direct") return EvalMode::kDirect;
    throw UsageError("mode must be cot or direct, got " + std::string(name));
}

std::string_view eval_metric_name(EvalMetric metric) noexcept { return metric == EvalMetric::kF1 ? "f1" : "choice"; }

void EvalConfig::validate() const {
    if (votes < 1) throw UsageError("votes must be >= 1");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw UsageError("eval temperature must be in [0, 2]");
    if (votes > 1 && !(temperature > 0.0)) throw UsageError("votes > 1 requires a sampling temperature > 0");
    if (max_output_tokens < 1) throw UsageError("eval max_output_tokens must be positive");
}

std::vector<EvalItem> load_eval_items(const std::filesystem::path& path) {
    const auto fallback = path.stem().string();
    auto dataset_of = [&](const TrainingExample& e) {
        auto it = e.meta.find("source");
        return it != e.meta.end() ? it->second : fallback;
    };
    std::vector<EvalItem> items;
    if (looks_like_mcq_file(path)) {
        for (auto& m : load_mcq(path)) {
            EvalItem item;
            item.example = m.base;
            item.dataset = dataset_of(m.base);
            item.mcq = std::move(m);
            items.push_back(std::move(item));
        }
    } else {
        for (auto& e : load_examples(path)) {
            EvalItem item;
            item.dataset = dataset_of(e);
            item.example = std::move(e);
            items.push_back(std::move(item));
        }
    }
    return items;
}

std::string render_eval_prompt(const EvalItem& item, EvalMode mode) {
    TrainingExample shown = item.example;
    if (item.mcq) {
        shown.question += "\n";
        for (std::size_t i = 0; i < item.mcq->options.size(); ++i) {
            shown.question += "\n(";
            shown.question += option_letter(static_cast<int>(i));
            shown.question += ") " + item.mcq->options[i];
        }
        shown.question += "\n\nAnswer with the letter of the correct option.";
    }
    if (mode == EvalMode::kCot) return render_sampling_prompt(shown);
    return templates::render(templates::direct_template(), {{"context", shown.context}, {"question", shown.question}});
}

double score_answer(const EvalOutcome& outcome, std::string_view answer) {
    if (outcome.metric == EvalMetric::kF1) return metrics::f1(answer, outcome.reference);
    const auto key = choice_key(outcome, answer);
    return !key.empty() && !outcome.reference.empty() && key == outcome.reference.front() ? 1.0 : 0.0;
}

std::string vote_answers(const EvalOutcome& outcome, const std::vector<std::string>& answers) {
    if (outcome.metric == EvalMetric::kF1) return metrics::majority_vote(answers).winner;
    std::vector<std::string> keys;
    keys.reserve(answers.size());
    for (const auto& a : answers) keys.push_back(choice_key(outcome, a));
    return answers[metrics::majority_vote(keys).winner_index];
}

EvalReport summarize(const std::vector<EvalOutcome>& outcomes, std::string mode, int votes, std::string counter) {
    EvalReport report;
    report.mode = std::move(mode);
    report.votes = votes;
    report.counter = std::move(counter);
    Accumulator overall;
    std::map<std::string, Accumulator> tiers;
    for (const char* t : kTierKeys) tiers[t];
    std::map<std::string, Accumulator> datasets;
    for (const auto& o : outcomes) {
        overall.count++;
        overall.sum += o.score;
        auto& t = tiers[std::string(tier_name(o.tier))];
        t.count++;
        t.sum += o.score;
        auto& d = datasets[o.dataset];
        d.count++;
        d.sum += o.score;
        report.flagged += o.flagged;
    }
    report.overall = overall.finish();
    for (const auto& [k, acc] : tiers) report.by_tier[k] = acc.finish();
    for (const auto& [k, acc] : datasets) report.by_dataset[k] = acc.finish();
    return report;
}

EvalRun evaluate(const std::vector<EvalItem>& items, const LlmClient& client, const EvalConfig& cfg) {
    cfg.validate();
    const auto counter = make_counter(cfg.counter);
    const auto votes = static_cast<std::size_t>(cfg.votes);

    std::vector<EvalOutcome> outcomes(items.size());
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& item = items[i];
        auto& o = outcomes[i];
        o.example_id = item.example.id;
        o.dataset = item.dataset;
        if (item.mcq) {
            o.metric = EvalMetric::kChoice;
            o.num_options = static_cast<int>(item.mcq->options.size());
            o.reference = {std::string(1, option_letter(item.mcq->correct_index))};
        } else {
            o.metric = EvalMetric::kF1;
            o.reference = item.example.gold_answers;
        }
        const auto length = measure_length(item.example, *counter);
        o.tier = length.tier;
        o.measured_tokens = length.measured_tokens;
        o.per_vote_answers.assign(votes, std::string{});
    }

    // Items are dispatched a few at a time so only a bounded number of long prompts is alive.
    const std::size_t items_per_chunk =
        std::max<std::size_t>(1, (4 * static_cast<std::size_t>(client.config().max_concurrency) + votes - 1) / votes);
    for (std::size_t begin = 0; begin < items.size(); begin += items_per_chunk) {
        const std::size_t end = std::min(items.size(), begin + items_per_chunk);
        std::vector<ChatRequest> requests;
        for (std::size_t i = begin; i < end; ++i) {
            const auto prompt = render_eval_prompt(items[i], cfg.mode);
            for (std::size_t v = 0; v < votes; ++v) {
                requests.push_back(make_user_request(cfg.model, prompt, cfg.temperature, cfg.max_output_tokens,
                                                     "eval/" + items[i].example.id + "/" + std::to_string(v)));
            }
        }
        const auto responses = client.complete_batch(requests);
        for (std::size_t r = 0; r < responses.size(); ++r) {
            auto& o = outcomes[begin + r / votes];
            const auto& resp = responses[r];
            std::string answer;
            if (!resp.ok()) {
                o.flagged = true;
            } else if (cfg.mode == EvalMode::kCot) {
                auto parsed = parse_response(resp.content);
                if (parsed.parse_status == ParseStatus::kFailed) {
                    o.flagged = true;
                } else {
                    answer = parsed.answer;
                }
            } else {
                answer = trim_copy(resp.content);
            }
            o.per_vote_answers[r % votes] = std::move(answer);
        }
    }

    for (auto& o : outcomes) {
        o.final_answer = vote_answers(o, o.per_vote_answers);
        o.score = score_answer(o, o.final_answer);
        if (o.metric == EvalMetric::kChoice && choice_key(o, o.final_answer).empty()) o.flagged = true;
    }
    std::sort(outcomes.begin(), outcomes.end(),
              [](const EvalOutcome& a, const EvalOutcome& b) { return a.example_id < b.example_id; });

    EvalRun run;
    run.report = summarize(outcomes, std::string(eval_mode_name(cfg.mode)), cfg.votes, counter->id());
    run.outcomes = std::move(outcomes);
    return run;
}

ordered_json outcome_to_json(const EvalOutcome& o) {
    ordered_json j;
    j["example_id"] = o.example_id;
    j["dataset"] = o.dataset;
    j["metric"] = eval_metric_name(o.metric);
    j["reference"] = o.reference;
    if (o.metric == EvalMetric::kChoice) j["num_options"] = o.num_options;
    j["per_vote_answers"] = o.per_vote_answers;
    j["final_answer"] = o.final_answer;
    j["score"] = o.score;
    j["tier"] = tier_name(o.tier);
    j["measured_tokens"] = o.measured_tokens;
    j["flagged"] = o.flagged;
    return j;
}

EvalOutcome outcome_from_json(const json& j, std::size_t line) {
    try {
        EvalOutcome o;
        o.example_id = j.at("example_id").get<std::string>();
        o.dataset = j.value("dataset", std::string{});
        const auto metric = j.at("metric").get<std::string>();
        if (metric == "f1") {
            o.metric = EvalMetric::kF1;
        } else if (metric == "choice") {
            o.metric = EvalMetric::kChoice;
            o.num_options = j.at("num_options").get<int>();
        } else {
            throw DataError("line " + std::to_string(line) + ": unknown metric " + metric);
        }
        o.reference = j.at("reference").get<std::vector<std::string>>();
        o.per_vote_answers = j.at("per_vote_answers").get<std::vector<std::string>>();
        o.final_answer = j.at("final_answer").get<std::string>();
        o.score = j.at("score").get<double>();
        o.tier = parse_tier(j.at("tier").get<std::string>());
        o.measured_tokens = j.value("measured_tokens", std::uint64_t{0});
        o.flagged = j.value("flagged", false);
        if (o.reference.empty()) throw DataError("line " + std::to_string(line) + ": empty reference");
        return o;
    } catch (const json::exception& e) {
        throw DataError("line " + std::to_string(line) + ": malformed outcome: " + e.what());
    }
}

std::vector<EvalOutcome> load_outcomes(const std::filesystem::path& path) {
    std::vector<EvalOutcome> out;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) { out.push_back(outcome_from_json(r, line)); });
    return out;
}

void save_outcomes(const std::filesystem::path& path, const std::vector<EvalOutcome>& outcomes) {
    std::vector<ordered_json> rows;
    rows.reserve(outcomes.size());
    for (const auto& o : outcomes) rows.push_back(outcome_to_json(o));
    jsonl::write_all(path, rows);
}

ordered_json report_to_json(const EvalReport& r) {
    ordered_json j;
    j["mode"] = r.mode;
    j["votes"] = r.votes;
    j["counter"] = r.counter;
    j["overall"] = mean_to_json(r.overall);
    ordered_json tiers;
    for (const char* t : kTierKeys) tiers[t] = mean_to_json(r.by_tier.count(t) ? r.by_tier.at(t) : MeanScore{});
    j["by_tier"] = tiers;
    ordered_json datasets = ordered_json::object();
    for (const auto& [k, m] : r.by_dataset) datasets[k] = mean_to_json(m);
    j["by_dataset"] = datasets;
    j["flagged"] = r.flagged;
    return j;
}

GainTable gain_report(const std::vector<EvalOutcome>& run_a, const std::vector<EvalOutcome>& run_b) {
    std::map<std::string, const EvalOutcome*> a_by_id;
    std::map<std::string, const EvalOutcome*> b_by_id;
    for (const auto& o : run_a) {
        if (!a_by_id.emplace(o.example_id, &o).second) throw DataError("run a has duplicate example " + o.example_id);
    }
    for (const auto& o : run_b) {
        if (!b_by_id.emplace(o.example_id, &o).second) throw DataError("run b has duplicate example " + o.example_id);
    }
    std::string only_a;
    std::string only_b;
    for (const auto& [id, _] : a_by_id) {
        if (!b_by_id.contains(id)) only_a += (only_a.empty() ? "" : ", ") + id;
    }
    for (const auto& [id, _] : b_by_id) {
        if (!a_by_id.contains(id)) only_b += (only_b.empty() ? "" : ", ") + id;
    }
    if (!only_a.empty() || !only_b.empty()) {
        throw DataError("example id sets differ; only in a: [" + only_a + "]; only in b: [" + only_b + "]");
    }

    std::map<std::string, Accumulator> tiers;
    for (const char* t : kTierKeys) tiers[t];
    Accumulator overall;
    for (const auto& [id, a] : a_by_id) {
        const auto* b = b_by_id.at(id);
        if (a->tier != b->tier) throw DataError("example " + id + " has different length tiers in the two runs");
        const double diff = b->score - a->score;
        auto& t = tiers[std::string(tier_name(a->tier))];
        t.count++;
        t.sum += diff;
        overall.count++;
        overall.sum += diff;
    }
    auto cell = [](const Accumulator& acc) {
        GainCell c;
        c.count = acc.count;
        if (acc.count > 0) c.gain_points = acc.sum / static_cast<double>(acc.count) * 100.0;
        return c;
    };
    GainTable table;
    for (const auto& [k, acc] : tiers) table.by_tier[k] = cell(acc);
    table.overall = cell(overall);
    return table;
}

ordered_json gain_to_json(const GainTable& t) {
    auto cell = [](const GainCell& c) {
        ordered_json j;
        j["count"] = c.count;
        j["gain_points"] = c.gain_points ? ordered_json(*c.gain_points) : ordered_json(nullptr);
        return j;
    };
    ordered_json j;
    ordered_json tiers;
    for (const char* k : kTierKeys) tiers[k] = cell(t.by_tier.count(k) ? t.by_tier.at(k) : GainCell{});
    j["by_tier"] = tiers;
    j["overall"] = cell(t.overall);
    return j;
}

std::string gain_to_text(const GainTable& t) {
    const GainCell cells[] = {t.by_tier.count("short") ? t.by_tier.at("short") : GainCell{},
                              t.by_tier.count("medium") ? t.by_tier.at("medium") : GainCell{},
                              t.by_tier.count("long") ? t.by_tier.at("long") : GainCell{}, t.overall};
    char buf[128];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %8s %8s\n", "", "Short", "Medium", "Long", "Overall");
    out += buf;
    std::snprintf(buf, sizeof buf, "%-10s", "n");
    out += buf;
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof buf, " %8zu", c.count);
        out += buf;
    }
    out += "\n";
    std::snprintf(buf, sizeof buf, "%-10s", "gain");
    out += buf;
    for (const auto& c : cells) {
        if (c.gain_points) {
            std::snprintf(buf, sizeof buf, " %+8.1f", *c.gain_points + 0.0);
        } else {
            std::snprintf(buf, sizeof buf, " %8s", "-");
        }
        out += buf;
    }
    out += "\n";
    return out;
}

VotingCurve voting_curve(const std::vector<EvalOutcome>& outcomes) {
    VotingCurve curve;
    if (outcomes.empty()) return curve;
    curve.k = outcomes.front().per_vote_answers.size();
    if (curve.k == 0) throw DataError("outcome " + outcomes.front().example_id + " has no votes");
    for (const auto& o : outcomes) {
        if (o.per_vote_answers.size() != curve.k) {
            throw DataError("outcome " + o.example_id + " has " + std::to_string(o.per_vote_answers.size()) +
                            " votes, expected " + std::to_string(curve.k));
        }
    }
    curve.vote.assign(curve.k, 0.0);
    curve.oracle.assign(curve.k, 0.0);
    for (const auto& o : outcomes) {
        std::vector<double> vote(curve.k);
        std::vector<double> oracle(curve.k);
        std::vector<std::string> prefix;
        double reached = 0.0;
        for (std::size_t j = 0; j < curve.k; ++j) {
            prefix.push_back(o.per_vote_answers[j]);
            vote[j] = score_answer(o, vote_answers(o, prefix));
            if (score_answer(o, o.per_vote_answers[j]) == 1.0) reached = 1.0;
            oracle[j] = reached;
            curve.vote[j] += vote[j];
            curve.oracle[j] += oracle[j];
        }
        curve.per_example_vote[o.example_id] = std::move(vote);
        curve.per_example_oracle[o.example_id] = std::move(oracle);
    }
    const auto n = static_cast<double>(outcomes.size());
    for (std::size_t j = 0; j < curve.k; ++j) {
        curve.vote[j] /= n;
        curve.oracle[j] /= n;
    }
    return curve;
}

ordered_json curve_to_json(const VotingCurve& c) {
    ordered_json j;
    j["k"] = c.k;
    j["oracle_definition"] = "an example is oracle-correct at j if any of its first j answers scores 1.0";
    ordered_json series = ordered_json::array();
    for (std::size_t i = 0; i < c.k; ++i) {
        series.push_back({{"j", i + 1}, {"vote", c.vote[i]}, {"oracle", c.oracle[i]}});
    }
    j["series"] = series;
    return j;
}

}  // namespace cotcurate
