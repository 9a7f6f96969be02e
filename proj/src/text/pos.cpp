#include "abandon/text/pos.hpp"

#include <string>
#include <unordered_map>

#include "abandon/text/tokenize.hpp"

namespace abandon::text {

namespace {

const std::unordered_map<std::string_view, PosTag>& word_table() {
  static const auto table = [] {
    std::unordered_map<std::string_view, PosTag> t;
    auto add = [&](PosTag tag, std::initializer_list<std::string_view> words) {
      for (auto w : words) t.emplace(w, tag);
    };
    add(PosTag::Determiner, {"the", "a", "an", "this", "that", "these", "those", "each", "every", "either",
                             "neither", "some", "any", "no", "another", "such", "what", "which", "whose",
                             "all", "both", "few", "many", "much", "several", "most"});
    add(PosTag::Pronoun, {"i", "me", "my", "mine", "myself", "you", "your", "yours", "yourself", "yourselves",
                          "he", "him", "his", "himself", "she", "her", "hers", "herself", "it", "its",
                          "itself", "we", "us", "our", "ours", "ourselves", "they", "them", "their",
                          "theirs", "themselves", "who", "whom", "someone", "somebody", "something",
                          "anyone", "anybody", "anything", "everyone", "everybody", "everything",
                          "nobody", "nothing", "none", "one", "i'm", "you're", "he's", "she's", "it's",
                          "we're", "they're", "i've", "you've", "we've", "they've", "i'd", "you'd",
                          "i'll", "you'll", "we'll", "they'll"});
    add(PosTag::Preposition, {"of", "in", "on", "at", "by", "for", "with", "about", "against", "between",
                              "into", "through", "during", "before", "after", "above", "below", "to",
                              "from", "up", "down", "out", "off", "over", "under", "around", "among",
                              "across", "behind", "beyond", "near", "since", "toward", "towards",
                              "upon", "within", "without", "via", "per", "like", "than", "despite"});
    add(PosTag::Conjunction, {"and", "or", "but", "nor", "so", "yet", "because", "although", "though",
                              "while", "if", "unless", "whereas", "whether", "as", "once", "until",
                              "when", "whenever", "where", "wherever", "then"});
    add(PosTag::Verb, {"is", "are", "was", "were", "be", "been", "being", "am", "have", "has", "had",
                       "do", "does", "did", "done", "will", "would", "shall", "should", "can", "could",
                       "may", "might", "must", "go", "goes", "went", "gone", "get", "gets", "got",
                       "make", "makes", "made", "say", "says", "said", "know", "knows", "knew",
                       "think", "thinks", "thought", "see", "sees", "saw", "seen", "come", "comes",
                       "came", "take", "takes", "took", "taken", "want", "wants", "give", "gives",
                       "gave", "given", "use", "find", "found", "tell", "told", "ask", "work",
                       "seem", "feel", "felt", "try", "leave", "left", "call", "keep", "kept",
                       "let", "put", "mean", "meant", "post", "read", "write", "wrote", "ban",
                       "love", "hate", "need", "believe", "agree", "isn't", "aren't", "wasn't",
                       "don't", "doesn't", "didn't", "can't", "won't", "wouldn't", "shouldn't",
                       "couldn't", "haven't", "hasn't", "kill", "stop", "run", "look", "care"});
    add(PosTag::Adjective, {"good", "bad", "new", "old", "great", "big", "small", "high", "low", "long",
                            "short", "little", "own", "other", "same", "right", "wrong", "real",
                            "true", "false", "sure", "free", "best", "better", "worse", "worst",
                            "whole", "nice", "cool", "stupid", "dumb", "happy", "sad", "mad",
                            "young", "full", "hard", "easy", "strong", "weak", "dead", "fake",
                            "able", "clear", "last", "next", "first", "second", "fine", "late",
                            "early", "huge", "tiny", "ugly", "poor", "rich", "white", "black",
                            "red", "crazy", "funny", "weird", "smart", "evil", "pathetic"});
    add(PosTag::Adverb, {"not", "very", "also", "just", "never", "always", "often", "still", "already",
                         "really", "here", "there", "now", "soon", "too", "quite", "almost", "again",
                         "ever", "even", "only", "maybe", "perhaps", "rather", "well", "away",
                         "back", "yes", "sometimes", "anyway", "instead", "today", "tomorrow",
                         "yesterday", "else", "how", "why", "n't", "lol"});
    return t;
  }();
  return table;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() > suffix.size() + 1 && s.substr(s.size() - suffix.size()) == suffix;
}

bool has_letter(std::string_view s) {
  for (unsigned char c : s) {
    if ((c >= 'a' && c <= 'z') || c >= 0x80) return true;
  }
  return false;
}

}  // namespace

std::string_view pos_tag_name(PosTag tag) {
  static constexpr std::string_view names[kPosTagCount] = {"noun",       "verb",        "adjective",
                                                           "adverb",     "pronoun",     "determiner",
                                                           "preposition", "conjunction", "other"};
  return names[static_cast<int>(tag)];
}

PosTag tag_token(std::string_view token) {
  const auto& table = word_table();
  if (auto it = table.find(token); it != table.end()) return it->second;
  if (!has_letter(token)) return PosTag::Other;
  if (ends_with(token, "ly")) return PosTag::Adverb;
  for (auto suf : {"ing", "ed", "ize", "ise", "ify", "ate", "en"}) {
    if (ends_with(token, suf)) return PosTag::Verb;
  }
  for (auto suf : {"ous", "ful", "ive", "able", "ible", "al", "ic", "less", "ish", "est", "ary", "ent", "ant"}) {
    if (ends_with(token, suf)) return PosTag::Adjective;
  }
  return PosTag::Noun;
}

PosCounts pos_counts(const std::vector<std::string>& tokens) {
  PosCounts c{};
  for (const auto& t : tokens) ++c[static_cast<std::size_t>(tag_token(t))];
  return c;
}

PosCounts pos_counts(std::string_view text) { return pos_counts(tokenize(text)); }

}  // namespace abandon::text
