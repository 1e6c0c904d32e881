#pragma once

#include "instrbo/oracles.hpp"
#include "instrbo/projection.hpp"
#include "instrbo/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace instrbo {

/// Desk-scale stand-in for an LLM task: a vocabulary, a hidden target
/// instruction that attains the maximal score, and an optional noise level.
struct SyntheticTask {
    std::vector<std::string> vocabulary;
    std::vector<std::string> target_tokens;
    double noise_level = 0.0;
    std::uint64_t seed = 0;

    std::string target_text() const;
    void validate() const;
};

SyntheticTask load_synthetic_task(const std::string& path);
void save_synthetic_task(const SyntheticTask& task, const std::string& path);

/// Built-in word list used when no task file is supplied.
const std::vector<std::string>& default_vocabulary();

/// Deterministic unit-norm token embeddings derived from the task seed,
/// one row per vocabulary token.
Matrix token_embeddings(const SyntheticTask& task, int embedding_width);

/// Deterministic gold answer for any probe input, derived from the task seed.
/// Validation pairs produced by make_task_spec use exactly this function.
std::vector<std::string> synthetic_gold_tokens(const SyntheticTask& task,
                                               const std::string& query);

/// Stand-in for the black-box predictor: emits a string whose token overlap
/// with the gold answer grows with the instruction's token-F1 agreement with
/// the hidden target. With noise_level > 0, each output token flips to a
/// random vocabulary token under a stream keyed by (instruction, query).
std::string synthetic_predict(const Instruction& instruction, const std::string& query,
                              const SyntheticTask& task);

/// Exemplars plus a validation set sampled from the synthetic task.
TaskSpec make_task_spec(const SyntheticTask& task, int validation_size, int kappa,
                        Metric metric = Metric::F1);

/// Generator oracle that decodes the lifted prompt to the nearest vocabulary
/// token per soft-token slot (cosine distance, ties to the lowest index).
class SyntheticGenerator final : public GeneratorOracle {
public:
    SyntheticGenerator(SyntheticTask task, int soft_token_count, int embedding_width);

    int lifted_dim() const override { return soft_token_count_ * embedding_width_; }
    int soft_token_count() const { return soft_token_count_; }
    int embedding_width() const { return embedding_width_; }

    GeneratedInstruction generate(const Vector& lifted,
                                  const std::vector<Exemplar>& exemplars) override;

    /// Embedding concatenation of a token sequence; the decode of this vector
    /// recovers the tokens.
    Vector encode_tokens(const std::vector<std::string>& tokens) const;

    std::vector<std::string> decode(const Vector& lifted) const;

private:
    SyntheticTask task_;
    int soft_token_count_;
    int embedding_width_;
    Matrix embeddings_;  // |vocabulary| x embedding_width, unit rows
};

class SyntheticPredictor final : public PredictorOracle {
public:
    explicit SyntheticPredictor(SyntheticTask task, CallBudget* budget = nullptr);

    std::string predict(const Instruction& instruction, const std::string& query) override;

private:
    SyntheticTask task_;
    CallBudget* budget_;
};

/// Builds a task whose target is the decode of a seeded in-box latent point
/// under the given projection, so the optimum is reachable by construction.
SyntheticTask plant_synthetic_task(std::vector<std::string> vocabulary, std::uint64_t task_seed,
                                   const ProjectionMatrix& projection, int soft_token_count,
                                   int embedding_width, double box_half_width,
                                   double noise_level);

}  // namespace instrbo
