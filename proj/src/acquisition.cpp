#include "instrbo/acquisition.hpp"

#include "instrbo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace instrbo {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

double normal_pdf(double z) {
    return std::exp(-0.5 * z * z) * 0.39894228040143267793994605993438;
}

}  // namespace

AcquisitionContext AcquisitionContext::from(const GaussianPosterior& posterior, int batch_size) {
    if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
    return AcquisitionContext{&posterior, posterior.incumbent(), batch_size};
}

double expected_improvement(double mean, double variance, double incumbent) {
    double sigma = std::sqrt(std::max(variance, 0.0));
    double delta = mean - incumbent;
    if (sigma <= 1e-12) return std::max(0.0, delta);
    double z = delta / sigma;
    double ei = delta * normal_cdf(z) + sigma * normal_pdf(z);
    return std::max(ei, 0.0);
}

double expected_improvement(const AcquisitionContext& ctx, const SoftPrompt& p) {
    auto [mu, var] = ctx.posterior->mean_variance(p);
    return expected_improvement(mu, var, ctx.incumbent);
}

std::vector<SoftPrompt> select_batch(const AcquisitionContext& ctx,
                                     const std::vector<SoftPrompt>& candidates, int k) {
    if (candidates.empty()) throw ArgumentError("select_batch needs candidates");
    if (k < 1 || static_cast<std::size_t>(k) > candidates.size()) {
        throw ArgumentError("select_batch k=" + std::to_string(k) + " out of range for " +
                            std::to_string(candidates.size()) + " candidates");
    }
    std::vector<double> ei(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ei[i] = expected_improvement(ctx, candidates[i]);
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });
    std::vector<SoftPrompt> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.push_back(candidates[order[i]]);
    return out;
}

}  // namespace instrbo
