#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace abandon::text {

// Term -> weight table. The text format is one "term weight" pair per line;
// a missing weight means 1, blank lines and lines starting with '#' are
// ignored.
class Lexicon {
 public:
  Lexicon() = default;

  static Lexicon parse(std::string_view content, const std::string& origin = "lexicon");
  static Lexicon load(const std::filesystem::path& path);

  void set(std::string term, double weight) { terms_[std::move(term)] = weight; }
  // Returns nullptr for unknown terms.
  const double* find(const std::string& term) const {
    auto it = terms_.find(term);
    return it == terms_.end() ? nullptr : &it->second;
  }
  bool contains(const std::string& term) const { return terms_.count(term) > 0; }
  std::size_t size() const { return terms_.size(); }
  // Terms in lexicographic order.
  std::vector<std::string> terms() const;

 private:
  std::unordered_map<std::string, double> terms_;
};

// Built-in tables.
const Lexicon& default_valence_lexicon();
const Lexicon& negation_terms();

inline constexpr int kToxicityDims = 6;
extern const char* const kToxicityDimNames[kToxicityDims];
const Lexicon& default_toxicity_lexicon(int dim);

}  // namespace abandon::text
