#pragma once

#include "instrbo/types.hpp"

#include <string>
#include <vector>

namespace instrbo {

/// Shared answer normalization: trim, ASCII case-fold, collapse internal
/// whitespace, strip terminal punctuation.
std::string normalize_answer(const std::string& s);

/// Tokens for the exact-set metric: split on commas as well as whitespace.
std::vector<std::string> set_tokens(const std::string& s);

/// 1 iff the normalized strings are equal.
int metric_exact_match(const std::string& pred, const std::string& gold);

/// 1 iff the sets of normalized tokens are equal, order-insensitive.
int metric_exact_set(const std::string& pred, const std::string& gold);

/// 1 iff normalized gold is a substring of normalized pred or vice versa.
int metric_contain(const std::string& pred, const std::string& gold);

/// Token-level F1 over normalized whitespace tokens (multiset intersection);
/// 0 when either side is empty.
double metric_f1(const std::string& pred, const std::string& gold);

double evaluate_metric(Metric m, const std::string& pred, const std::string& gold);

/// F1 over pre-tokenized inputs; the string overload normalizes then calls this.
double token_f1(const std::vector<std::string>& pred_tokens,
                const std::vector<std::string>& gold_tokens);

}  // namespace instrbo
