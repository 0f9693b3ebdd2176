// Reference implementations used only to cross-check the library.
#pragma once

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<std::string> normalize_tokens(const std::string& text) {
    std::string cleaned;
    for (char c : text) {
        const auto u = static_cast<unsigned char>(c);
        if (u < 128 && std::ispunct(u)) continue;
        cleaned += (u < 128) ? static_cast<char>(std::tolower(u)) : c;
    }
    for (char& c : cleaned) {
        if (c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') c = ' ';
    }
    std::istringstream in(cleaned);
    std::vector<std::string> tokens;
    std::string w;
    while (in >> w) {
        if (w != "a" && w != "an" && w != "the") tokens.push_back(w);
    }
    return tokens;
}

// Multiset intersection by sorting both sides and walking them together.
inline double f1_tokens(std::vector<std::string> pred, std::vector<std::string> gold) {
    if (pred.empty() && gold.empty()) return 1.0;
    if (pred.empty() || gold.empty()) return 0.0;
    const double np = static_cast<double>(pred.size());
    const double ng = static_cast<double>(gold.size());
    std::sort(pred.begin(), pred.end());
    std::sort(gold.begin(), gold.end());
    std::size_t i = 0, j = 0, common = 0;
    while (i < pred.size() && j < gold.size()) {
        if (pred[i] == gold[j]) {
            ++common, ++i, ++j;
        } else if (pred[i] < gold[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    if (common == 0) return 0.0;
    const double precision = static_cast<double>(common) / np;
    const double recall = static_cast<double>(common) / ng;
    return 2.0 * precision * recall / (precision + recall);
}

inline double f1(const std::string& pred, const std::vector<std::string>& golds) {
    double best = 0.0;
    for (const auto& g : golds) best = std::max(best, f1_tokens(normalize_tokens(pred), normalize_tokens(g)));
    return best;
}

inline bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline std::string fold(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size();) {
        if (is_ws(s[i])) {
            out += ' ';
            while (i < s.size() && is_ws(s[i])) ++i;
        } else {
            out += s[i++];
        }
    }
    return out;
}

// Tries every start offset and compares character by character.
inline bool naive_contains(const std::string& hay, const std::string& needle) {
    if (needle.empty()) return false;
    for (std::size_t start = 0; start + needle.size() <= hay.size(); ++start) {
        std::size_t k = 0;
        while (k < needle.size() && hay[start + k] == needle[k]) ++k;
        if (k == needle.size()) return true;
    }
    return false;
}

struct Vote {
    std::string winner;
    std::size_t winner_index = 0;
    bool tie = false;
};

// Counts every class, then picks the highest count, preferring the class seen earliest.
inline Vote vote(const std::vector<std::string>& answers) {
    std::vector<std::string> keys;
    std::vector<std::size_t> first;
    std::map<std::string, std::size_t> counts;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        std::string key;
        for (const auto& t : normalize_tokens(answers[i])) key += (key.empty() ? "" : " ") + t;
        if (counts[key]++ == 0) {
            keys.push_back(key);
            first.push_back(i);
        }
    }
    std::size_t best = 0;
    for (const auto& [k, c] : counts) best = std::max(best, c);
    std::size_t at_best = 0;
    for (const auto& [k, c] : counts) at_best += c == best;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        if (counts[keys[i]] == best) return {answers[first[i]], first[i], at_best > 1};
    }
    return {};
}

}  // namespace oracle
