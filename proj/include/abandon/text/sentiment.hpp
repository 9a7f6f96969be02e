#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "abandon/text/lexicon.hpp"

namespace abandon::text {

struct SentimentScores {
  double positive = 0.0;
  double negative = 0.0;
  double neutral = 1.0;
  double compound = 0.0;
};

// Squashes a raw valence sum into (-1, 1).
inline double normalize_compound(double raw, double alpha = 15.0) { return raw / std::sqrt(raw * raw + alpha); }

// Rule-based scorer. Each token takes its lexicon valence (0 when absent);
// a negation term among the three preceding tokens flips the sign. The
// proportions follow the usual valence-shifted split: positive tokens
// contribute v + 1, negative tokens |v - 1|, unscored tokens 1 each.
class SentimentAnalyzer {
 public:
  SentimentAnalyzer();
  explicit SentimentAnalyzer(Lexicon valence, Lexicon negations = negation_terms());

  SentimentScores score(std::string_view text) const;
  SentimentScores score_tokens(const std::vector<std::string>& tokens) const;
  // Sum of (negation-adjusted) token valences.
  double raw_valence(const std::vector<std::string>& tokens) const;

 private:
  std::vector<double> token_valences(const std::vector<std::string>& tokens) const;

  Lexicon valence_;
  Lexicon negations_;
};

}  // namespace abandon::text

