#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cotcurate::metrics {

// Extractive-QA answer normalization: lowercase, delete ASCII punctuation, drop the articles
// a/an/the, collapse whitespace.
struct NormalizedAnswer {
    std::vector<std::string> tokens;
    std::string canonical;
};

NormalizedAnswer normalize(std::string_view answer);

// Multiset token F1 between two already-normalized token lists.
double token_f1(const std::vector<std::string>& prediction, const std::vector<std::string>& gold);

// Max over golds of token_f1(normalize(prediction), normalize(gold)). Both-empty scores 1,
// one-sided empty scores 0. Throws DataError on an empty golds list.
double f1(std::string_view prediction, const std::vector<std::string>& golds);

// First standalone option letter (A.. up to num_options) in free text, word-boundary
// delimited and optionally parenthesized. Returns the option index.
std::optional<int> extract_choice(std::string_view text, int num_options = 4);

struct ChoiceScore {
    int correct = 0;       // 0 or 1
    bool flagged = false;  // no option letter could be extracted
};

ChoiceScore choice_accuracy(std::string_view predicted, int correct_index, int num_options = 4);

struct VoteResult {
    std::string winner;            // verbatim text of the winning class's first occurrence
    std::string winner_canonical;
    std::size_t winner_index = 0;  // position of that first occurrence in the input
    std::map<std::string, std::size_t> counts;  // canonical form -> votes
    bool tie_broken = false;
};

// Votes on normalized classes; ties go to the class that occurs first. Throws DataError on
// an empty list.
VoteResult majority_vote(const std::vector<std::string>& answers);

}  // namespace cotcurate::metrics
