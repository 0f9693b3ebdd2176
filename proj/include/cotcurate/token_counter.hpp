#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>

namespace cotcurate {

struct TrainingExample;

// Pluggable token-counting strategy. Registered ids:
//   "heuristic"     floor(whitespace word count * 1.3)  (default)
//   "words"         whitespace word count
//   "meta"          integer stored in the example's meta["tokens"]
//   "vocab:<path>"  greedy longest-match against a vocabulary file (one token per line)
class TokenCounter {
public:
    virtual ~TokenCounter() = default;
    virtual std::string id() const = 0;
    virtual std::uint64_t count(const TrainingExample& example) const = 0;
};

inline constexpr std::string_view kDefaultCounter = "heuristic";

// Throws UsageError on an unknown id, IoError if a vocabulary file cannot be read.
std::unique_ptr<TokenCounter> make_counter(std::string_view id);

std::uint64_t count_words(std::string_view text) noexcept;

class VocabCounter final : public TokenCounter {
public:
    VocabCounter(std::string id, std::unordered_set<std::string> vocab);
    static std::unique_ptr<VocabCounter> from_file(const std::string& path);

    std::string id() const override { return id_; }
    std::uint64_t count(const TrainingExample& example) const override;
    std::uint64_t count_text(std::string_view text) const;

private:
    std::string id_;
    std::unordered_set<std::string> vocab_;
    std::size_t max_token_bytes_ = 1;
};

}  // namespace cotcurate
