#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abandon::text {

// Removes markdown markup: quote markers, emphasis and code characters,
// headers, link targets (link text is kept) and bare URLs.
std::string strip_markdown(std::string_view text);

// Lower-cased word tokens. A token is a maximal run of ASCII letters,
// digits, apostrophes or non-ASCII bytes that contains at least one letter,
// digit or non-ASCII byte; apostrophes at either end are trimmed.
std::vector<std::string> tokenize(std::string_view text);

// Sentences are the segments between runs of '.', '!', '?' or newlines
// that contain at least one token.
std::vector<std::vector<std::string>> split_sentences(std::string_view text);

}  // namespace abandon::text
