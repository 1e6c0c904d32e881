#include "instrbo/kernels.hpp"

#include "instrbo/errors.hpp"
#include "instrbo/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace instrbo {

std::string kernel_family_name(KernelFamily f) {
    return f == KernelFamily::Matern52 ? "matern52" : "squared_exponential";
}

KernelFamily kernel_family_from_name(const std::string& name) {
    if (name == "matern52") return KernelFamily::Matern52;
    if (name == "squared_exponential" || name == "se" || name == "rbf")
        return KernelFamily::SquaredExponential;
    throw ConfigError("unknown kernel family: " + name);
}

std::string kernel_mode_name(KernelMode m) {
    return m == KernelMode::Coupled ? "coupled" : "standard";
}

KernelMode kernel_mode_from_name(const std::string& name) {
    if (name == "coupled") return KernelMode::Coupled;
    if (name == "standard") return KernelMode::Standard;
    throw ConfigError("unknown kernel mode: " + name);
}

void LatentKernelSpec::validate() const {
    if (!(lengthscale > 0.0)) throw ConfigError("kernel lengthscale must be > 0");
    if (!(output_scale > 0.0)) throw ConfigError("kernel output_scale must be > 0");
}

double latent_kernel(const LatentKernelSpec& spec, const SoftPrompt& p, const SoftPrompt& q) {
    if (p.size() != q.size()) {
        throw ArgumentError("kernel arguments have mismatched dimensions " +
                            std::to_string(p.size()) + " vs " + std::to_string(q.size()));
    }
    double r = (p - q).norm() / spec.lengthscale;
    if (spec.family == KernelFamily::SquaredExponential) {
        return spec.output_scale * std::exp(-0.5 * r * r);
    }
    const double sqrt5 = 2.2360679774997896964091736687747;
    double a = sqrt5 * r;
    return spec.output_scale * (1.0 + a + a * a / 3.0) * std::exp(-a);
}

std::string similarity_metric_name(SimilarityMetric m) {
    return m == SimilarityMetric::ExactMatch ? "exact_match" : "f1";
}

SimilarityMetric similarity_metric_from_name(const std::string& name) {
    if (name == "exact_match" || name == "em") return SimilarityMetric::ExactMatch;
    if (name == "f1") return SimilarityMetric::F1;
    throw ConfigError("unknown similarity metric: " + name);
}

namespace {

double prediction_agreement(const std::string& a, const std::string& b, SimilarityMetric metric) {
    return metric == SimilarityMetric::ExactMatch
               ? static_cast<double>(metric_exact_match(a, b))
               : metric_f1(a, b);
}

}  // namespace

SimilarityResult instruction_similarity(const Instruction& vi, const Instruction& vj,
                                        const std::vector<std::string>& probes,
                                        const ProbePredictor& predictor,
                                        SimilarityMetric metric) {
    if (probes.empty()) throw ArgumentError("instruction similarity needs at least one probe");
    SimilarityResult result;
    double sum = 0.0;
    int used = 0;
    for (const auto& probe : probes) {
        std::string pi;
        std::string pj;
        try {
            pi = predictor(vi, probe);
            pj = predictor(vj, probe);
        } catch (const BudgetExhaustedError&) {
            throw;
        } catch (const Error&) {
            ++result.skipped_probes;
            continue;
        }
        sum += prediction_agreement(pi, pj, metric);
        ++used;
    }
    if (used == 0) throw EvaluationError("all similarity probes failed");
    result.value = sum / static_cast<double>(used);
    return result;
}

double prediction_similarity(const PredictionSet& a, const PredictionSet& b,
                             SimilarityMetric metric) {
    if (a.size() != b.size()) {
        throw ArgumentError("prediction sets cover different probe counts");
    }
    if (a.size() == 0) throw ArgumentError("prediction sets are empty");
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!a.ok[i] || !b.ok[i]) continue;
        sum += prediction_agreement(a.texts[i], b.texts[i], metric);
        ++used;
    }
    if (used == 0) throw EvaluationError("no probe succeeded for both instructions");
    return sum / static_cast<double>(used);
}

const std::vector<double>& jitter_ladder() {
    static const std::vector<double> ladder = {0.0,  1e-10, 1e-9, 1e-8,
                                               1e-7, 1e-6,  1e-5, 1e-4};
    return ladder;
}

namespace {

/// Symmetrize, force a unit diagonal, then clip negative eigenvalues at zero.
Matrix sanitize_similarity(const Matrix& s) {
    Matrix sym = 0.5 * (s + s.transpose());
    sym.diagonal().setOnes();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
    if (eig.info() != Eigen::Success) {
        throw ConditioningError("similarity matrix eigendecomposition failed", {});
    }
    if (eig.eigenvalues().minCoeff() >= 0.0) return sym;
    Vector clipped = eig.eigenvalues().cwiseMax(0.0);
    return eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::LLT<Matrix> factorize_with_ladder(const Matrix& m, double* applied,
                                         const std::string& what) {
    std::vector<double> attempted;
    for (double jitter : jitter_ladder()) {
        Matrix shifted = m;
        shifted.diagonal().array() += jitter;
        Eigen::LLT<Matrix> llt(shifted);
        if (llt.info() == Eigen::Success) {
            *applied = jitter;
            return llt;
        }
        attempted.push_back(jitter);
    }
    throw ConditioningError(what + " factorization failed after jitter ladder", attempted);
}

}  // namespace

KernelState KernelState::build(KernelMode mode, const LatentKernelSpec& spec,
                               std::vector<SoftPrompt> prompts,
                               std::vector<Instruction> instructions, const Matrix& s_entries) {
    spec.validate();
    const auto m = static_cast<Eigen::Index>(prompts.size());
    if (m < 1) throw ArgumentError("kernel state needs at least one prompt");
    for (const auto& p : prompts) {
        if (p.size() != prompts.front().size()) {
            throw ArgumentError("prompts have inconsistent dimensions");
        }
    }
    if (mode == KernelMode::Coupled) {
        if (s_entries.rows() != m || s_entries.cols() != m) {
            throw ArgumentError("similarity matrix must be m x m in coupled mode");
        }
        if (!instructions.empty() && static_cast<Eigen::Index>(instructions.size()) != m) {
            throw ArgumentError("instruction count does not match prompt count");
        }
    }

    KernelState state;
    state.mode_ = mode;
    state.spec_ = spec;
    state.prompts_ = std::move(prompts);
    state.instructions_ = std::move(instructions);

    state.latent_.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i; j < m; ++j) {
            double v = latent_kernel(spec, state.prompts_[i], state.prompts_[j]);
            state.latent_(i, j) = v;
            state.latent_(j, i) = v;
        }
    }

    if (mode == KernelMode::Coupled) {
        state.s_ = sanitize_similarity(s_entries);
        // K = L L^{-1} S L^{-1} L = S on the training prompts.
        state.k_ = state.s_;
        state.latent_llt_ =
            factorize_with_ladder(state.latent_, &state.latent_jitter_, "latent kernel matrix");
    } else {
        if (s_entries.size() > 0) {
            if (s_entries.rows() != m || s_entries.cols() != m) {
                throw ArgumentError("similarity matrix must be m x m when provided");
            }
            state.s_ = sanitize_similarity(s_entries);
        }
        state.k_ = state.latent_;
    }
    return state;
}

Vector KernelState::latent_cross(const SoftPrompt& p) const {
    Vector lp(size());
    for (int j = 0; j < size(); ++j) lp(j) = latent_kernel(spec_, p, prompts_[j]);
    return lp;
}

Vector KernelState::cross(const SoftPrompt& p) const {
    Vector lp = latent_cross(p);
    if (mode_ == KernelMode::Standard) return lp;
    return s_ * latent_llt_.solve(lp);
}

double KernelState::self(const SoftPrompt& p) const {
    if (mode_ == KernelMode::Standard) return spec_.output_scale;
    Vector w = latent_llt_.solve(latent_cross(p));
    return w.dot(s_ * w);
}

double KernelState::kernel_value(const SoftPrompt& p, const SoftPrompt& q) const {
    if (mode_ == KernelMode::Standard) return latent_kernel(spec_, p, q);
    Vector wp = latent_llt_.solve(latent_cross(p));
    Vector wq = latent_llt_.solve(latent_cross(q));
    return wp.dot(s_ * wq);
}

}  // namespace instrbo
