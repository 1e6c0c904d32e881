#pragma once

#include "instrbo/types.hpp"

#include <Eigen/Cholesky>
#include <functional>
#include <string>
#include <vector>

namespace instrbo {

enum class KernelFamily { Matern52, SquaredExponential };
enum class KernelMode { Coupled, Standard };

std::string kernel_family_name(KernelFamily f);
KernelFamily kernel_family_from_name(const std::string& name);
std::string kernel_mode_name(KernelMode m);
KernelMode kernel_mode_from_name(const std::string& name);

struct LatentKernelSpec {
    KernelFamily family = KernelFamily::Matern52;
    double lengthscale = 1.0;
    double output_scale = 1.0;

    void validate() const;
};

/// Stationary base kernel over the latent space; l(p, p) = output_scale.
/// Throws ArgumentError on dimension mismatch.
double latent_kernel(const LatentKernelSpec& spec, const SoftPrompt& p, const SoftPrompt& q);

enum class SimilarityMetric { ExactMatch, F1 };

std::string similarity_metric_name(SimilarityMetric m);
SimilarityMetric similarity_metric_from_name(const std::string& name);

using ProbePredictor = std::function<std::string(const Instruction&, const std::string&)>;

struct SimilarityResult {
    double value = 0.0;
    int skipped_probes = 0;
};

/// Agreement between two instructions' zero-shot predictions, averaged over
/// the probe inputs. Probes where the predictor throws are skipped and
/// counted; if every probe fails an EvaluationError is thrown.
SimilarityResult instruction_similarity(const Instruction& vi, const Instruction& vj,
                                        const std::vector<std::string>& probes,
                                        const ProbePredictor& predictor,
                                        SimilarityMetric metric);

/// Same similarity computed from prediction lists already cached during
/// scoring: no extra oracle calls. Items where either side failed are skipped.
double prediction_similarity(const PredictionSet& a, const PredictionSet& b,
                             SimilarityMetric metric);

/// Kernel matrices over the evaluated prompts and their instructions.
///
/// Coupled mode warps the latent kernel so its restriction to the training
/// prompts reproduces the instruction-similarity matrix S; off the training
/// set it extrapolates through the latent kernel. Standard mode uses the
/// latent kernel alone.
class KernelState {
public:
    /// S must be m x m in coupled mode; it is symmetrized, its diagonal is
    /// forced to 1, and negative eigenvalues are clipped to 0 before use.
    /// Standard mode accepts an empty S. Throws ConditioningError if the
    /// latent matrix cannot be factorized after the jitter ladder.
    static KernelState build(KernelMode mode, const LatentKernelSpec& spec,
                             std::vector<SoftPrompt> prompts,
                             std::vector<Instruction> instructions, const Matrix& s_entries);

    KernelMode mode() const { return mode_; }
    const LatentKernelSpec& spec() const { return spec_; }
    int size() const { return static_cast<int>(prompts_.size()); }
    const std::vector<SoftPrompt>& prompts() const { return prompts_; }
    const std::vector<Instruction>& instructions() const { return instructions_; }

    /// Effective kernel matrix over the training prompts (K = S in coupled
    /// mode, K = L in standard mode).
    const Matrix& k() const { return k_; }
    const Matrix& s() const { return s_; }
    const Matrix& latent() const { return latent_; }
    double latent_jitter() const { return latent_jitter_; }

    /// Cross-kernel vector [k(p, p_1), ..., k(p, p_m)].
    Vector cross(const SoftPrompt& p) const;

    /// Kernel value at (p, p); the prior variance scale at p.
    double self(const SoftPrompt& p) const;

    /// General two-argument kernel evaluation (symmetric in p, q).
    double kernel_value(const SoftPrompt& p, const SoftPrompt& q) const;

private:
    KernelState() = default;

    Vector latent_cross(const SoftPrompt& p) const;

    KernelMode mode_ = KernelMode::Coupled;
    LatentKernelSpec spec_;
    std::vector<SoftPrompt> prompts_;
    std::vector<Instruction> instructions_;
    Matrix latent_;  // L, exact (no jitter)
    Matrix s_;       // sanitized S (empty in standard mode when not provided)
    Matrix k_;       // effective training matrix
    Eigen::LLT<Matrix> latent_llt_;  // factorization of L + jitter*I (coupled mode)
    double latent_jitter_ = 0.0;
};

/// Jitter ladder shared by the latent and GP factorizations: a first attempt
/// with no jitter, then 1e-10 through 1e-4 in decade steps.
const std::vector<double>& jitter_ladder();

}  // namespace instrbo
