#pragma once

#include "instrbo/gp.hpp"
#include "instrbo/types.hpp"

#include <vector>

namespace instrbo {

struct AcquisitionContext {
    const GaussianPosterior* posterior = nullptr;
    double incumbent = 0.0;
    int batch_size = 1;

    static AcquisitionContext from(const GaussianPosterior& posterior, int batch_size);
};

/// Closed-form expected improvement for a Gaussian with the given mean and
/// variance over the incumbent. Falls back to max(0, mean - incumbent) when
/// the standard deviation is below 1e-12.
double expected_improvement(double mean, double variance, double incumbent);

double expected_improvement(const AcquisitionContext& ctx, const SoftPrompt& p);

/// The k candidates with largest EI, ties broken by smaller index; output
/// sorted by EI descending. Throws ArgumentError when candidates are empty
/// or k is out of range.
std::vector<SoftPrompt> select_batch(const AcquisitionContext& ctx,
                                     const std::vector<SoftPrompt>& candidates, int k);

}  // namespace instrbo
