#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace raglab::text {

/// Maximal runs of non-whitespace bytes. This is the "word" unit used by
/// passage segmentation and the approximate token counter.
std::vector<std::string_view> whitespace_words(std::string_view s);

int word_count(std::string_view s);

/// Lowercased maximal alphanumeric runs, in input order. ASCII alphanumerics
/// and letters of the major Unicode scripts count as word characters; every
/// other code point separates. Case folding covers ASCII and Latin-1.
std::vector<std::string> tokenize(std::string_view s);

/// Lowercases, replaces every non-alphanumeric character with a space,
/// collapses whitespace runs and trims. Equal to joining tokenize() output
/// with single spaces.
std::string normalize(std::string_view s);

}  // namespace raglab::text
