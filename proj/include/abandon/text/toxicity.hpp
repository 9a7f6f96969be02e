#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "abandon/text/lexicon.hpp"

namespace abandon::text {

// toxicity, severe_toxicity, obscene, insult, identity_attack, threat
struct ToxicityScores {
  std::array<double, kToxicityDims> values{};

  double toxicity() const { return values[0]; }
  double severe_toxicity() const { return values[1]; }
  double obscene() const { return values[2]; }
  double insult() const { return values[3]; }
  double identity_attack() const { return values[4]; }
  double threat() const { return values[5]; }
  bool operator==(const ToxicityScores&) const = default;
};

// Pluggable toxicity source. Scorers are immutable after construction and
// may be shared between threads.
class ToxicityScorer {
 public:
  virtual ~ToxicityScorer() = default;
  virtual ToxicityScores score(std::string_view event_id, const std::vector<std::string>& tokens) const = 0;
  // Throws DataError when some events cannot be scored.
  virtual void check_coverage(const std::vector<std::string>& /*event_ids*/) const {}
  virtual std::string name() const = 0;
};

// Per dimension: min(1, gain * sum of matched term weights / token count).
class LexiconToxicityScorer : public ToxicityScorer {
 public:
  LexiconToxicityScorer();
  LexiconToxicityScorer(std::array<Lexicon, kToxicityDims> lexicons, double gain = 2.0);
  // Reads <dir>/<dimension>.txt for each dimension.
  static LexiconToxicityScorer from_directory(const std::filesystem::path& dir, double gain = 2.0);

  ToxicityScores score(std::string_view event_id, const std::vector<std::string>& tokens) const override;
  std::string name() const override { return "lexicon"; }
  const Lexicon& lexicon(int dim) const { return lexicons_[static_cast<std::size_t>(dim)]; }

 private:
  std::array<Lexicon, kToxicityDims> lexicons_;
  double gain_;
};

// Scores computed elsewhere, keyed by event id, returned verbatim.
class ImportedToxicityScorer : public ToxicityScorer {
 public:
  // CSV with header event_id,toxicity,severe_toxicity,obscene,insult,identity_attack,threat
  static ImportedToxicityScorer from_csv(const std::filesystem::path& path);
  void add(std::string event_id, ToxicityScores scores) { table_[std::move(event_id)] = scores; }

  ToxicityScores score(std::string_view event_id, const std::vector<std::string>& tokens) const override;
  void check_coverage(const std::vector<std::string>& event_ids) const override;
  std::string name() const override { return "imported"; }
  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, ToxicityScores> table_;
};

}  // namespace abandon::text
