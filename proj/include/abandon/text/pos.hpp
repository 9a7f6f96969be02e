#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace abandon::text {

enum class PosTag { Noun, Verb, Adjective, Adverb, Pronoun, Determiner, Preposition, Conjunction, Other };
inline constexpr int kPosTagCount = 9;

std::string_view pos_tag_name(PosTag tag);

// Closed-class words are looked up; open-class words are guessed from
// common verbs/adjectives/adverbs and suffixes, with noun as the fallback
// for alphabetic tokens and "other" for everything else.
PosTag tag_token(std::string_view token);

using PosCounts = std::array<std::size_t, kPosTagCount>;

PosCounts pos_counts(const std::vector<std::string>& tokens);
PosCounts pos_counts(std::string_view text);

}  // namespace abandon::text
