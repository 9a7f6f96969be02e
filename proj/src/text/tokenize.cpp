#include "abandon/text/tokenize.hpp"

namespace abandon::text {

namespace {

bool is_alnum(unsigned char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); }
bool is_word_byte(unsigned char c) { return is_alnum(c) || c == '\'' || c >= 0x80; }
bool is_sentence_break(char c) { return c == '.' || c == '!' || c == '?' || c == '\n'; }

void emit(std::string_view raw, std::vector<std::string>& out) {
  std::size_t b = 0, e = raw.size();
  while (b < e && raw[b] == '\'') ++b;
  while (e > b && raw[e - 1] == '\'') --e;
  if (b == e) return;
  std::string tok(raw.substr(b, e - b));
  for (auto& c : tok) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  out.push_back(std::move(tok));
}

bool starts_url(std::string_view s, std::size_t i) {
  auto rest = s.substr(i);
  return rest.starts_with("http://") || rest.starts_with("https://") || rest.starts_with("www.");
}

}  // namespace

std::string strip_markdown(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool line_start = true;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (line_start) {
      // Quote markers and headers at the start of a line.
      std::size_t j = i;
      while (j < text.size() && (text[j] == '>' || text[j] == '#' || text[j] == ' ' || text[j] == '\t')) ++j;
      if (j > i) {
        i = j;
        line_start = false;
        continue;
      }
      line_start = false;
    }
    if (c == '\n') {
      out.push_back(c);
      line_start = true;
      ++i;
      continue;
    }
    if (c == ']' && i + 1 < text.size() && text[i + 1] == '(') {
      auto close = text.find(')', i + 2);
      if (close != std::string_view::npos) {
        i = close + 1;
        continue;
      }
    }
    if (starts_url(text, i)) {
      while (i < text.size() && text[i] != ' ' && text[i] != '\n' && text[i] != '\t') ++i;
      continue;
    }
    if (c == '*' || c == '_' || c == '~' || c == '`' || c == '[' || c == ']' || c == '^') {
      ++i;
      continue;
    }
    if (text.substr(i).starts_with("&gt;")) {
      i += 4;
      continue;
    }
    if (text.substr(i).starts_with("&amp;")) {
      out.push_back('&');
      i += 5;
      continue;
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_byte(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_byte(static_cast<unsigned char>(text[j]))) ++j;
    emit(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::vector<std::vector<std::string>> split_sentences(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || is_sentence_break(text[i])) {
      auto toks = tokenize(text.substr(start, i - start));
      if (!toks.empty()) out.push_back(std::move(toks));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace abandon::text
