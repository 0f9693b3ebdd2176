#include "cotcurate/metrics.hpp"

#include <unordered_map>

#include "cotcurate/error.hpp"

namespace cotcurate::metrics {
namespace {

bool is_ascii_punct(unsigned char c) noexcept {
    return (c >= '!' && c <= '/') || (c >= ':' && c <= '@') || (c >= '[' && c <= '`') || (c >= '{' && c <= '~');
}

bool is_space(unsigned char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_article(std::string_view t) noexcept { return t == "a" || t == "an" || t == "the"; }

bool is_alnum(unsigned char c) noexcept {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

}  // namespace

NormalizedAnswer normalize(std::string_view answer) {
    NormalizedAnswer out;
    std::string token;
    auto flush = [&] {
        if (!token.empty() && !is_article(token)) out.tokens.push_back(token);
        token.clear();
    };
    for (unsigned char c : answer) {
        if (is_space(c)) {
            flush();
        } else if (!is_ascii_punct(c)) {
            token += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c);
        }
    }
    flush();
    for (const auto& t : out.tokens) {
        if (!out.canonical.empty()) out.canonical += ' ';
        out.canonical += t;
    }
    return out;
}

double token_f1(const std::vector<std::string>& prediction, const std::vector<std::string>& gold) {
    if (prediction.empty() && gold.empty()) return 1.0;
    if (prediction.empty() || gold.empty()) return 0.0;
    std::unordered_map<std::string_view, std::size_t> gold_counts;
    for (const auto& t : gold) ++gold_counts[t];
    std::size_t overlap = 0;
    for (const auto& t : prediction) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++overlap;
        }
    }
    if (overlap == 0) return 0.0;
    const double precision = static_cast<double>(overlap) / static_cast<double>(prediction.size());
    const double recall = static_cast<double>(overlap) / static_cast<double>(gold.size());
    return 2.0 * precision * recall / (precision + recall);
}

double f1(std::string_view prediction, const std::vector<std::string>& golds) {
    if (golds.empty()) throw DataError("f1 requires at least one gold answer");
    const auto pred = normalize(prediction);
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, token_f1(pred.tokens, normalize(g).tokens));
    return best;
}

std::optional<int> extract_choice(std::string_view text, int num_options) {
    const auto last = static_cast<char>('A' + num_options - 1);
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c < 'A' || c > last) continue;
        const bool left = i == 0 || !is_alnum(static_cast<unsigned char>(text[i - 1]));
        const bool right = i + 1 == text.size() || !is_alnum(static_cast<unsigned char>(text[i + 1]));
        if (left && right) return c - 'A';
    }
    return std::nullopt;
}

ChoiceScore choice_accuracy(std::string_view predicted, int correct_index, int num_options) {
    const auto choice = extract_choice(predicted, num_options);
    if (!choice) return {0, true};
    return {*choice == correct_index ? 1 : 0, false};
}

VoteResult majority_vote(const std::vector<std::string>& answers) {
    if (answers.empty()) throw DataError("majority_vote requires at least one answer");
    VoteResult result;
    std::unordered_map<std::string, std::size_t> first_seen;
    std::vector<std::string> canonical;
    canonical.reserve(answers.size());
    for (std::size_t i = 0; i < answers.size(); ++i) {
        canonical.push_back(normalize(answers[i]).canonical);
        ++result.counts[canonical.back()];
        first_seen.emplace(canonical.back(), i);
    }
    std::size_t best_count = 0;
    std::size_t best_first = 0;
    std::size_t classes_at_best = 0;
    for (const auto& [form, count] : result.counts) {
        const auto first = first_seen.at(form);
        if (count > best_count) {
            best_count = count;
            best_first = first;
            classes_at_best = 1;
        } else if (count == best_count) {
            ++classes_at_best;
            best_first = std::min(best_first, first);
        }
    }
    result.winner_index = best_first;
    result.winner = answers[best_first];
    result.winner_canonical = canonical[best_first];
    result.tie_broken = classes_at_best > 1;
    return result;
}

}  // namespace cotcurate::metrics
