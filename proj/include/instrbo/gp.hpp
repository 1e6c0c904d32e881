#pragma once

#include "instrbo/kernels.hpp"
#include "instrbo/types.hpp"

#include <Eigen/Cholesky>
#include <memory>
#include <utility>
#include <vector>

namespace instrbo {

/// Gaussian-process posterior over the black-box objective, conditioned on
/// the collected (soft prompt, score) pairs. Immutable after fit; concurrent
/// mean/variance queries are safe.
class GaussianPosterior {
public:
    /// Prepares the factorization of (K + noise^2 I); K comes from the kernel
    /// state, which must be built over exactly these records' prompts.
    /// On factorization failure the jitter ladder is walked; exhausting it
    /// throws ConditioningError carrying the attempted jitters.
    static GaussianPosterior fit(const std::vector<EvalRecord>& records,
                                 std::shared_ptr<const KernelState> kernel, double noise);

    /// Posterior mean at p; the prior mean is 0, so this vanishes far from data.
    double mean(const SoftPrompt& p) const;

    /// Posterior variance at p, clamped at 0 from below.
    double variance(const SoftPrompt& p) const;

    /// Mean and variance sharing one cross-kernel evaluation.
    std::pair<double, double> mean_variance(const SoftPrompt& p) const;

    const KernelState& kernel() const { return *kernel_; }
    int size() const { return static_cast<int>(scores_.size()); }
    const Vector& scores() const { return scores_; }
    double noise() const { return noise_; }
    double applied_jitter() const { return jitter_; }

    /// Best observed training score.
    double incumbent() const { return incumbent_; }

    /// Count of variance clamps whose pre-clamp value was below -1e-8.
    long large_clamp_count() const { return large_clamps_; }

private:
    GaussianPosterior() = default;

    std::shared_ptr<const KernelState> kernel_;
    Vector scores_;
    double noise_ = 0.0;
    double jitter_ = 0.0;
    double incumbent_ = 0.0;
    Eigen::LLT<Matrix> llt_;
    Vector alpha_;  // (K + noise^2 I)^{-1} H
    mutable long large_clamps_ = 0;
};

}  // namespace instrbo
