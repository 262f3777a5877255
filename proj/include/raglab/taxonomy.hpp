#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "raglab/types.hpp"

namespace raglab::taxonomy {

/// Matching normalization: lowercase, non-alphanumerics to spaces, collapsed.
std::string normalize(std::string_view s);

/// True iff the normalization of any answer occurs as a contiguous
/// whole-word sequence inside the normalization of `text`. Answers that
/// normalize to nothing never match. Throws on an empty answer list.
bool contains_answer(std::string_view text,
                     const std::vector<std::string>& answers);

using WarnHandler = std::function<void(const std::string&)>;

/// Replaces the handler used for gold-passage warnings; returns the previous
/// one. The default writes to stderr.
WarnHandler set_warn_handler(WarnHandler handler);

/// Four-way document typing:
///   gold        — doc id equals the record's gold passage id
///   relevant    — retrieved and answer-bearing
///   distracting — retrieved and answer-free
///   random      — sampled independently of the query
/// A sampled document whose id equals the gold id is an error; resample
/// upstream. A gold passage lacking every answer string triggers a warning.
DocLabel classify(const Passage& doc, const QueryRecord& record,
                  const Provenance& provenance);

}  // namespace raglab::taxonomy
