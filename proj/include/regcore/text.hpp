#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace regcore {

/// Splits on every occurrence of `sep`; empty fields are preserved.
std::vector<std::string_view> split(std::string_view s, char sep);

/// Maximal runs of non-whitespace (ASCII space, \t, \n, \v, \f, \r).
/// This is the "word" used for corpus statistics and deduplication.
std::vector<std::string_view> whitespace_tokens(std::string_view text);
std::size_t count_whitespace_tokens(std::string_view text);

/// Classifier tokenizer: lowercase, whitespace split, leading and trailing
/// punctuation stripped, empty tokens dropped. Inner punctuation such as the
/// apostrophe in "l'été" is kept.
std::vector<std::string> tokenize(std::string_view text);

/// Lowercases ASCII, Latin-1, Latin Extended-A, Greek and basic Cyrillic.
/// Other code points (and invalid UTF-8 bytes) pass through unchanged.
std::string utf8_lower(std::string_view text);

}  // namespace regcore
