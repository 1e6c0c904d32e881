#include "instrbo/gp.hpp"

#include "instrbo/errors.hpp"

#include <algorithm>
#include <cmath>

namespace instrbo {

GaussianPosterior GaussianPosterior::fit(const std::vector<EvalRecord>& records,
                                         std::shared_ptr<const KernelState> kernel,
                                         double noise) {
    if (records.empty()) throw ArgumentError("GP fit needs at least one record");
    if (!kernel) throw ArgumentError("GP fit needs a kernel state");
    if (noise < 0.0) throw ArgumentError("GP noise must be >= 0");
    const auto m = static_cast<Eigen::Index>(records.size());
    if (kernel->size() != m) {
        throw ArgumentError("kernel state covers " + std::to_string(kernel->size()) +
                            " prompts but " + std::to_string(m) + " records were given");
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& r = records[i];
        if (!std::isfinite(r.score) || r.score < 0.0 || r.score > 1.0) {
            throw ArgumentError("record score out of [0, 1]");
        }
        const auto& kp = kernel->prompts()[i];
        if (r.prompt.size() != kp.size() || (r.prompt.array() != kp.array()).any()) {
            throw ArgumentError("kernel state was not built over these records' prompts");
        }
    }

    GaussianPosterior gp;
    gp.kernel_ = std::move(kernel);
    gp.noise_ = noise;
    gp.scores_.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) gp.scores_(i) = records[i].score;
    gp.incumbent_ = gp.scores_.maxCoeff();

    Matrix base = gp.kernel_->k();
    base.diagonal().array() += noise * noise;
    std::vector<double> attempted;
    bool done = false;
    for (double jitter : jitter_ladder()) {
        Matrix shifted = base;
        shifted.diagonal().array() += jitter;
        gp.llt_.compute(shifted);
        if (gp.llt_.info() == Eigen::Success) {
            gp.jitter_ = jitter;
            done = true;
            break;
        }
        attempted.push_back(jitter);
    }
    if (!done) {
        throw ConditioningError("GP factorization failed after jitter ladder", attempted);
    }
    gp.alpha_ = gp.llt_.solve(gp.scores_);
    return gp;
}

double GaussianPosterior::mean(const SoftPrompt& p) const {
    return kernel_->cross(p).dot(alpha_);
}

double GaussianPosterior::variance(const SoftPrompt& p) const {
    Vector kp = kernel_->cross(p);
    double v = kernel_->self(p) - kp.dot(llt_.solve(kp));
    if (v < 0.0) {
        if (v < -1e-8) ++large_clamps_;
        v = 0.0;
    }
    return v;
}

std::pair<double, double> GaussianPosterior::mean_variance(const SoftPrompt& p) const {
    Vector kp = kernel_->cross(p);
    double mu = kp.dot(alpha_);
    double v = kernel_->self(p) - kp.dot(llt_.solve(kp));
    if (v < 0.0) {
        if (v < -1e-8) ++large_clamps_;
        v = 0.0;
    }
    return {mu, v};
}

}  // namespace instrbo
