#pragma once

#include "instrbo/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace instrbo {

struct SearchConfig {
    int dimension = 0;
    double lower = -1.0;  // per-coordinate box [lower, upper]
    double upper = 1.0;
    int population_size = 0;  // 0 -> 4 + floor(3 ln d)
    int max_evaluations = 5000;
    double sigma0 = 0.0;  // 0 -> (upper - lower) / 6
    std::uint64_t seed = 0;

    int resolved_population() const;
    double resolved_sigma0() const;
    void validate() const;
};

using Objective = std::function<double(const SoftPrompt&)>;

struct SearchResult {
    SoftPrompt best_point;
    double best_value = 0.0;
    int evaluations = 0;
    int nan_samples = 0;
};

/// Maximizes the objective over the box with (mu/lambda) CMA-ES: rank-based
/// selection, covariance adaptation, and cumulative step-size control.
/// Out-of-bounds samples are clipped into the box before evaluation, so every
/// reported point lies inside it. Deterministic given the seed. Samples whose
/// objective is NaN get -inf fitness and are counted; a generation where
/// every sample is NaN throws SearchError.
SearchResult maximize(const Objective& objective, const SearchConfig& cfg);

/// The k all-time best evaluated points from one maximize run, deduplicated
/// by 1e-9 proximity and padded with uniform in-bounds points when fewer
/// than k distinct points were evaluated.
std::vector<SoftPrompt> propose_candidates(const Objective& objective, const SearchConfig& cfg,
                                           int k);

}  // namespace instrbo
