#include "cotcurate/corpus.hpp"

#include <random>
#include <set>
#include <unordered_map>

#include "cotcurate/error.hpp"
#include "cotcurate/hashing.hpp"
#include "cotcurate/metrics.hpp"
#include "cotcurate/token_counter.hpp"
#include "random_util.hpp"

namespace cotcurate {
namespace {

std::string where(std::size_t line) { return "line " + std::to_string(line); }

std::string require_string(const json& r, const char* field, std::size_t line) {
    auto it = r.find(field);
    if (it == r.end() || !it->is_string()) {
        throw DataError(where(line) + ": field \"" + field + "\" must be a string");
    }
    return it->get<std::string>();
}

std::vector<std::string> require_string_array(const json& r, const char* field, std::size_t line) {
    auto it = r.find(field);
    if (it == r.end() || !it->is_array()) {
        throw DataError(where(line) + ": field \"" + field + "\" must be an array of strings");
    }
    std::vector<std::string> out;
    for (const auto& v : *it) {
        if (!v.is_string()) throw DataError(where(line) + ": field \"" + field + "\" must be an array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::map<std::string, std::string> read_meta(const json& r, std::size_t line) {
    std::map<std::string, std::string> meta;
    auto it = r.find("meta");
    if (it == r.end() || it->is_null()) return meta;
    if (!it->is_object()) throw DataError(where(line) + ": field \"meta\" must be an object");
    for (const auto& [k, v] : it->items()) {
        if (v.is_string()) {
            meta[k] = v.get<std::string>();
        } else if (v.is_primitive() && !v.is_null()) {
            meta[k] = v.dump();
        } else {
            throw DataError(where(line) + ": meta." + k + " must be a scalar");
        }
    }
    return meta;
}

void validate_example(const TrainingExample& e, std::size_t line) {
    if (e.id.empty()) throw DataError(where(line) + ": empty id");
    if (e.context.empty()) throw DataError(where(line) + ": empty context for id " + e.id);
    if (e.question.empty()) throw DataError(where(line) + ": empty question for id " + e.id);
    if (e.gold_answers.empty()) throw DataError(where(line) + ": no gold answers for id " + e.id);
}

TrainingExample longbench_from_json(const json& r, std::size_t line) {
    TrainingExample e;
    e.id = require_string(r, "_id", line);
    e.context = require_string(r, "context", line);
    e.question = require_string(r, "input", line);
    e.gold_answers = require_string_array(r, "answers", line);
    if (auto it = r.find("dataset"); it != r.end() && it->is_string()) e.meta["source"] = it->get<std::string>();
    if (auto it = r.find("length"); it != r.end() && it->is_number_integer()) e.meta["length"] = it->dump();
    validate_example(e, line);
    return e;
}

// Class key used to decide whether two option texts are interchangeable.
std::string option_key(const std::string& text) {
    auto n = metrics::normalize(text);
    return n.canonical.empty() ? "\x01" + text : n.canonical;
}

}  // namespace

Tier tier_for(std::uint64_t measured_tokens) noexcept {
    if (measured_tokens < kShortTierLimit) return Tier::kShort;
    if (measured_tokens > kLongTierFloor) return Tier::kLong;
    return Tier::kMedium;
}

std::string_view tier_name(Tier tier) noexcept {
    switch (tier) {
        case Tier::kShort: return "short";
        case Tier::kMedium: return "medium";
        case Tier::kLong: return "long";
    }
    return "short";
}

Tier parse_tier(std::string_view name) {
    if (name == "short") return Tier::kShort;
    if (name == "medium") return Tier::kMedium;
    if (name == "long") return Tier::kLong;
    throw DataError("unknown length tier: " + std::string(name));
}

TrainingExample example_from_json(const json& r, std::size_t line) {
    TrainingExample e;
    e.id = require_string(r, "id", line);
    e.context = require_string(r, "context", line);
    e.question = require_string(r, "question", line);
    e.gold_answers = require_string_array(r, "answers", line);
    e.meta = read_meta(r, line);
    validate_example(e, line);
    return e;
}

ordered_json example_to_json(const TrainingExample& e) {
    ordered_json j;
    j["id"] = e.id;
    j["context"] = e.context;
    j["question"] = e.question;
    j["answers"] = e.gold_answers;
    if (!e.meta.empty()) j["meta"] = e.meta;
    return j;
}

std::vector<TrainingExample> load_examples(const std::filesystem::path& path, std::string_view format) {
    if (format != kExamplesFormat && format != kLongBenchFormat) {
        throw UsageError("unknown dataset format: " + std::string(format));
    }
    std::vector<TrainingExample> out;
    std::unordered_map<std::string, std::size_t> seen;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) {
        TrainingExample e = format == kLongBenchFormat ? longbench_from_json(r, line) : example_from_json(r, line);
        if (auto [it, inserted] = seen.emplace(e.id, line); !inserted) {
            throw DataError(path.string() + ": duplicate id \"" + e.id + "\" on lines " + std::to_string(it->second) +
                            " and " + std::to_string(line));
        }
        out.push_back(std::move(e));
    });
    if (out.empty()) throw DataError(path.string() + ": empty dataset");
    return out;
}

void save_examples(const std::filesystem::path& path, const std::vector<TrainingExample>& examples) {
    std::vector<ordered_json> rows;
    rows.reserve(examples.size());
    for (const auto& e : examples) rows.push_back(example_to_json(e));
    jsonl::write_all(path, rows);
}

LengthTier measure_length(const TrainingExample& example, const TokenCounter& counter) {
    const auto tokens = counter.count(example);
    return {tier_for(tokens), tokens};
}

LengthTier measure_length(const TrainingExample& example, std::string_view counter_id) {
    return measure_length(example, *make_counter(counter_id));
}

char option_letter(int index) { return static_cast<char>('A' + index); }

McqExample build_mcq(const TrainingExample& example, const std::vector<std::string>& distractor_pool,
                     int k_options, std::uint64_t seed) {
    if (k_options < 2 || k_options > 26) {
        throw DataError("k_options must be in [2, 26], got " + std::to_string(k_options));
    }
    if (example.gold_answers.empty()) throw DataError("example " + example.id + " has no gold answers");

    std::set<std::string> excluded;
    for (const auto& g : example.gold_answers) excluded.insert(option_key(g));
    std::vector<std::string> candidates;
    for (const auto& d : distractor_pool) {
        if (excluded.insert(option_key(d)).second) candidates.push_back(d);
    }
    const auto required = static_cast<std::size_t>(k_options - 1);
    if (candidates.size() < required) {
        throw DataError("insufficient distractors for " + example.id + ": required " + std::to_string(required) +
                        ", available " + std::to_string(candidates.size()));
    }

    std::mt19937_64 rng(seed);
    // partial Fisher-Yates: the first `required` slots become the draw
    for (std::size_t i = 0; i < required; ++i) {
        const auto j = i + static_cast<std::size_t>(detail::uniform_below(rng, candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }

    McqExample mcq;
    mcq.base = example;
    mcq.shuffle_seed = seed;
    mcq.options.push_back(example.gold_answers.front());
    mcq.options.insert(mcq.options.end(), candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(required));
    std::vector<int> order(mcq.options.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    detail::portable_shuffle(order, rng);
    std::vector<std::string> shuffled;
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        shuffled.push_back(mcq.options[static_cast<std::size_t>(order[pos])]);
        if (order[pos] == 0) mcq.correct_index = static_cast<int>(pos);
    }
    mcq.options = std::move(shuffled);
    return mcq;
}

std::vector<McqExample> build_mcq_dataset(const std::vector<TrainingExample>& examples, int k_options,
                                          std::uint64_t seed) {
    std::vector<std::string> pool;
    for (const auto& e : examples) pool.push_back(e.gold_answers.front());
    std::vector<McqExample> out;
    out.reserve(examples.size());
    for (const auto& e : examples) {
        const auto item_seed = Fnv1a64{}.update(std::to_string(seed)).update(":").update(e.id).value();
        out.push_back(build_mcq(e, pool, k_options, item_seed));
    }
    return out;
}

ordered_json mcq_to_json(const McqExample& mcq) {
    ordered_json j;
    j["id"] = mcq.base.id;
    j["context"] = mcq.base.context;
    j["question"] = mcq.base.question;
    j["options"] = mcq.options;
    j["answer"] = std::string(1, option_letter(mcq.correct_index));
    j["seed"] = mcq.shuffle_seed;
    j["answers"] = mcq.base.gold_answers;
    if (!mcq.base.meta.empty()) j["meta"] = mcq.base.meta;
    return j;
}

McqExample mcq_from_json(const json& r, std::size_t line) {
    McqExample mcq;
    mcq.base.id = require_string(r, "id", line);
    mcq.base.context = require_string(r, "context", line);
    mcq.base.question = require_string(r, "question", line);
    mcq.base.meta = read_meta(r, line);
    mcq.options = require_string_array(r, "options", line);
    if (mcq.options.size() < 2 || mcq.options.size() > 26) throw DataError(where(line) + ": options must have 2..26 entries");
    const auto letter = require_string(r, "answer", line);
    if (letter.size() != 1 || letter[0] < 'A' || letter[0] >= 'A' + static_cast<int>(mcq.options.size())) {
        throw DataError(where(line) + ": answer must be an option letter, got \"" + letter + "\"");
    }
    mcq.correct_index = letter[0] - 'A';
    if (auto it = r.find("seed"); it != r.end() && it->is_number_unsigned()) mcq.shuffle_seed = it->get<std::uint64_t>();
    if (auto it = r.find("answers"); it != r.end()) {
        mcq.base.gold_answers = require_string_array(r, "answers", line);
    }
    if (mcq.base.gold_answers.empty()) {
        mcq.base.gold_answers.push_back(mcq.options[static_cast<std::size_t>(mcq.correct_index)]);
    }
    validate_example(mcq.base, line);
    return mcq;
}

std::vector<McqExample> load_mcq(const std::filesystem::path& path) {
    std::vector<McqExample> out;
    std::unordered_map<std::string, std::size_t> seen;
    jsonl::for_each_record(path, [&](const json& r, std::size_t line) {
        auto mcq = mcq_from_json(r, line);
        if (auto [it, inserted] = seen.emplace(mcq.base.id, line); !inserted) {
            throw DataError(path.string() + ": duplicate id \"" + mcq.base.id + "\" on lines " +
                            std::to_string(it->second) + " and " + std::to_string(line));
        }
        out.push_back(std::move(mcq));
    });
    if (out.empty()) throw DataError(path.string() + ": empty dataset");
    return out;
}

void save_mcq(const std::filesystem::path& path, const std::vector<McqExample>& items) {
    std::vector<ordered_json> rows;
    for (const auto& m : items) rows.push_back(mcq_to_json(m));
    jsonl::write_all(path, rows);
}

bool looks_like_mcq_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json r = json::parse(line, nullptr, false);
        return !r.is_discarded() && r.is_object() && r.contains("options");
    }
    return false;
}

DatasetStats dataset_stats(const std::vector<TrainingExample>& examples, const TokenCounter& counter) {
    DatasetStats s;
    s.counter = counter.id();
    s.count = examples.size();
    long double total = 0;
    for (const auto& e : examples) {
        const auto m = measure_length(e, counter);
        total += static_cast<long double>(m.measured_tokens);
        switch (m.tier) {
            case Tier::kShort: ++s.short_count; break;
            case Tier::kMedium: ++s.medium_count; break;
            case Tier::kLong: ++s.long_count; break;
        }
    }
    if (s.count > 0) s.mean_tokens = static_cast<double>(total / static_cast<long double>(s.count));
    return s;
}

ordered_json stats_to_json(const DatasetStats& s) {
    ordered_json j;
    j["counter"] = s.counter;
    j["count"] = s.count;
    j["mean_tokens"] = s.mean_tokens ? ordered_json(*s.mean_tokens) : ordered_json(nullptr);
    j["by_tier"] = {{"short", s.short_count}, {"medium", s.medium_count}, {"long", s.long_count}};
    return j;
}

}  // namespace cotcurate
