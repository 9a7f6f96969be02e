#include "abandon/text/readability.hpp"

#include <cmath>

#include "abandon/text/tokenize.hpp"

namespace abandon::text {

namespace {
bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y'; }
bool is_letter(char c) { return c >= 'a' && c <= 'z'; }
}  // namespace

int count_syllables(std::string_view word) {
  int groups = 0;
  bool in_group = false;
  for (char c : word) {
    bool v = is_vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  std::size_t n = word.size();
  if (groups > 1 && n >= 2 && word[n - 1] == 'e' && !is_vowel(word[n - 2])) {
    bool consonant_le = n >= 3 && word[n - 2] == 'l' && is_letter(word[n - 3]) && !is_vowel(word[n - 3]);
    if (!consonant_le) --groups;
  }
  return groups < 1 ? 1 : groups;
}

ReadabilityCounts readability_counts(std::string_view text) {
  ReadabilityCounts c;
  for (const auto& sentence : split_sentences(text)) {
    ++c.sentences;
    for (const auto& w : sentence) {
      ++c.words;
      int syl = count_syllables(w);
      c.syllables += static_cast<std::size_t>(syl);
      if (syl >= 3) ++c.polysyllables;
    }
  }
  return c;
}

double flesch_kincaid_grade(const ReadabilityCounts& c) {
  if (c.words == 0 || c.sentences == 0) return 0.0;
  double w = static_cast<double>(c.words);
  return 0.39 * (w / static_cast<double>(c.sentences)) + 11.8 * (static_cast<double>(c.syllables) / w) - 15.59;
}

double smog_index(const ReadabilityCounts& c) {
  if (c.words == 0 || c.sentences == 0) return 0.0;
  return 1.0430 * std::sqrt(static_cast<double>(c.polysyllables) * 30.0 / static_cast<double>(c.sentences)) + 3.1291;
}

ReadabilityScores readability(std::string_view text) {
  auto c = readability_counts(text);
  return {flesch_kincaid_grade(c), smog_index(c)};
}

}  // namespace abandon::text
