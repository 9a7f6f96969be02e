#include "abandon/text/sentiment.hpp"

#include <cmath>

#include "abandon/text/tokenize.hpp"

namespace abandon::text {

SentimentAnalyzer::SentimentAnalyzer() : SentimentAnalyzer(default_valence_lexicon()) {}

SentimentAnalyzer::SentimentAnalyzer(Lexicon valence, Lexicon negations)
    : valence_(std::move(valence)), negations_(std::move(negations)) {}

namespace {

constexpr std::size_t kNegationReach = 3;

bool is_negation(const Lexicon& negations, const std::string& tok) {
  if (negations.contains(tok)) return true;
  return tok.size() > 3 && tok.compare(tok.size() - 3, 3, "n't") == 0;
}

}  // namespace

std::vector<double> SentimentAnalyzer::token_valences(const std::vector<std::string>& tokens) const {
  std::vector<double> out(tokens.size(), 0.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const double* v = valence_.find(tokens[i]);
    if (!v) continue;
    double val = *v;
    for (std::size_t back = 1; back <= kNegationReach && back <= i; ++back) {
      if (is_negation(negations_, tokens[i - back])) {
        val = -val;
        break;
      }
    }
    out[i] = val;
  }
  return out;
}

double SentimentAnalyzer::raw_valence(const std::vector<std::string>& tokens) const {
  double sum = 0.0;
  for (double v : token_valences(tokens)) sum += v;
  return sum;
}

SentimentScores SentimentAnalyzer::score_tokens(const std::vector<std::string>& tokens) const {
  SentimentScores s;
  if (tokens.empty()) return s;
  double pos = 0.0, neg = 0.0, neu = 0.0, raw = 0.0;
  for (double val : token_valences(tokens)) {
    raw += val;
    if (val > 0) {
      pos += val + 1.0;
    } else if (val < 0) {
      neg += std::fabs(val - 1.0);
    } else {
      neu += 1.0;
    }
  }
  double total = pos + neg + neu;
  s.positive = pos / total;
  s.negative = neg / total;
  s.neutral = neu / total;
  s.compound = normalize_compound(raw);
  return s;
}

SentimentScores SentimentAnalyzer::score(std::string_view text) const { return score_tokens(tokenize(text)); }

}  // namespace abandon::text
