#pragma once

#include <string>
#include <string_view>

namespace abandon::text {

// Vowel-group count (a, e, i, o, u, y) with a silent final 'e' removed,
// except after a consonant in a final "le"; at least 1.
int count_syllables(std::string_view word);

struct ReadabilityCounts {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t polysyllables = 0;  // words of 3+ syllables
};

ReadabilityCounts readability_counts(std::string_view text);

// Both formulas return 0 when the text has no words or no sentences.
double flesch_kincaid_grade(const ReadabilityCounts& c);
double smog_index(const ReadabilityCounts& c);

struct ReadabilityScores {
  double flesch_kincaid = 0.0;
  double smog = 0.0;
};

ReadabilityScores readability(std::string_view text);

}  // namespace abandon::text
