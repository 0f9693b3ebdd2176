#include "cotcurate/token_counter.hpp"

#include <charconv>
#include <fstream>

#include "cotcurate/corpus.hpp"
#include "cotcurate/error.hpp"

namespace cotcurate {
namespace {

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

class WordCounter final : public TokenCounter {
public:
    std::string id() const override { return "words"; }
    std::uint64_t count(const TrainingExample& e) const override { return count_words(e.context); }
};

class HeuristicCounter final : public TokenCounter {
public:
    std::string id() const override { return "heuristic"; }
    // floor(words * 1.3) in exact integer arithmetic
    std::uint64_t count(const TrainingExample& e) const override { return count_words(e.context) * 13 / 10; }
};

class MetaCounter final : public TokenCounter {
public:
    std::string id() const override { return "meta"; }
    std::uint64_t count(const TrainingExample& e) const override {
        auto it = e.meta.find("tokens");
        if (it == e.meta.end()) throw DataError("example " + e.id + ": meta.tokens required by counter 'meta'");
        std::uint64_t value = 0;
        const auto& s = it->second;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw DataError("example " + e.id + ": meta.tokens is not a non-negative integer: " + s);
        }
        return value;
    }
};

}  // namespace

std::uint64_t count_words(std::string_view text) noexcept {
    std::uint64_t words = 0;
    bool in_word = false;
    for (char c : text) {
        if (is_space(c)) {
            in_word = false;
        } else if (!in_word) {
            in_word = true;
            ++words;
        }
    }
    return words;
}

VocabCounter::VocabCounter(std::string id, std::unordered_set<std::string> vocab)
    : id_(std::move(id)), vocab_(std::move(vocab)) {
    for (const auto& t : vocab_) max_token_bytes_ = std::max(max_token_bytes_, t.size());
}

std::unique_ptr<VocabCounter> VocabCounter::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocabulary file " + path);
    std::unordered_set<std::string> vocab;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) vocab.insert(line);
    }
    if (vocab.empty()) throw DataError("vocabulary file is empty: " + path);
    return std::make_unique<VocabCounter>("vocab:" + path, std::move(vocab));
}

std::uint64_t VocabCounter::count(const TrainingExample& example) const { return count_text(example.context); }

// Whitespace pre-split, then greedy longest match inside each word. Bytes with no matching
// vocabulary entry count as one token each.
std::uint64_t VocabCounter::count_text(std::string_view text) const {
    std::uint64_t tokens = 0;
    std::size_t i = 0;
    std::string probe;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && !is_space(text[end])) ++end;
        while (i < end) {
            std::size_t len = std::min(max_token_bytes_, end - i);
            for (; len > 1; --len) {
                probe.assign(text.substr(i, len));
                if (vocab_.contains(probe)) break;
            }
            i += len;
            ++tokens;
        }
    }
    return tokens;
}

std::unique_ptr<TokenCounter> make_counter(std::string_view id) {
    if (id == "heuristic") return std::make_unique<HeuristicCounter>();
    if (id == "words") return std::make_unique<WordCounter>();
    if (id == "meta") return std::make_unique<MetaCounter>();
    if (id.rfind("vocab:", 0) == 0 && id.size() > 6) return VocabCounter::from_file(std::string(id.substr(6)));
    throw UsageError("unknown token counter: " + std::string(id));
}

}  // namespace cotcurate
