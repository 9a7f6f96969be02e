#include "abandon/text/toxicity.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "abandon/common/error.hpp"

namespace abandon::text {

namespace {

std::array<Lexicon, kToxicityDims> builtin_lexicons() {
  std::array<Lexicon, kToxicityDims> out;
  for (int d = 0; d < kToxicityDims; ++d) out[static_cast<std::size_t>(d)] = default_toxicity_lexicon(d);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace

LexiconToxicityScorer::LexiconToxicityScorer() : LexiconToxicityScorer(builtin_lexicons()) {}

LexiconToxicityScorer::LexiconToxicityScorer(std::array<Lexicon, kToxicityDims> lexicons, double gain)
    : lexicons_(std::move(lexicons)), gain_(gain) {
  if (!(gain > 0)) throw UsageError("toxicity gain must be positive");
}

LexiconToxicityScorer LexiconToxicityScorer::from_directory(const std::filesystem::path& dir, double gain) {
  std::array<Lexicon, kToxicityDims> lex;
  for (int d = 0; d < kToxicityDims; ++d) {
    lex[static_cast<std::size_t>(d)] = Lexicon::load(dir / (std::string(kToxicityDimNames[d]) + ".txt"));
  }
  return LexiconToxicityScorer(std::move(lex), gain);
}

ToxicityScores LexiconToxicityScorer::score(std::string_view, const std::vector<std::string>& tokens) const {
  ToxicityScores s;
  if (tokens.empty()) return s;
  for (std::size_t d = 0; d < kToxicityDims; ++d) {
    double matched = 0.0;
    for (const auto& t : tokens) {
      if (const double* w = lexicons_[d].find(t)) matched += *w;
    }
    double density = matched / static_cast<double>(tokens.size());
    s.values[d] = std::clamp(density * gain_, 0.0, 1.0);
  }
  return s;
}

ImportedToxicityScorer ImportedToxicityScorer::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read toxicity scores " + path.string());
  std::string line;
  const std::string expected = "event_id,toxicity,severe_toxicity,obscene,insult,identity_attack,threat";
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty toxicity score file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw DataError(path.string() + ": expected header " + expected);
  ImportedToxicityScorer out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 7) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected 7 columns");
    ToxicityScores s;
    for (std::size_t d = 0; d < kToxicityDims; ++d) {
      try {
        std::size_t used = 0;
        s.values[d] = std::stod(cells[d + 1], &used);
        if (used != cells[d + 1].size()) throw std::invalid_argument(cells[d + 1]);
      } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad score '" + cells[d + 1] + "'");
      }
      if (s.values[d] < 0.0 || s.values[d] > 1.0) {
        throw DataError(path.string() + ":" + std::to_string(lineno) + ": score outside [0,1]");
      }
    }
    out.add(cells[0], s);
  }
  return out;
}

ToxicityScores ImportedToxicityScorer::score(std::string_view event_id, const std::vector<std::string>&) const {
  auto it = table_.find(std::string(event_id));
  if (it == table_.end()) throw DataError("no imported toxicity scores for event " + std::string(event_id));
  return it->second;
}

void ImportedToxicityScorer::check_coverage(const std::vector<std::string>& event_ids) const {
  std::vector<std::string> missing;
  for (const auto& id : event_ids) {
    if (!table_.count(id)) missing.push_back(id);
  }
  if (missing.empty()) return;
  std::ostringstream msg;
  msg << "imported toxicity scores are missing " << missing.size() << " event id(s):";
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < missing.size() && i < kShown; ++i) msg << ' ' << missing[i];
  if (missing.size() > kShown) msg << " ...";
  throw DataError(msg.str());
}

}  // namespace abandon::text
