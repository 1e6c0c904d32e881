#pragma once

#include "instrbo/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace instrbo {

/// Bounded per-campaign counter over oracle calls. The campaign persists its
/// state before surfacing the exhaustion, so runs are resumable.
class CallBudget {
public:
    CallBudget() = default;
    explicit CallBudget(std::optional<std::int64_t> limit) : limit_(limit) {}

    /// Charges one call; throws BudgetExhaustedError if the limit is already spent.
    void charge(const char* what);

    std::int64_t used() const { return used_; }
    std::optional<std::int64_t> limit() const { return limit_; }

    /// Restores the used counter when resuming from a checkpoint.
    void restore(std::int64_t used) { used_ = used; }

private:
    std::optional<std::int64_t> limit_;
    std::int64_t used_ = 0;
};

struct GeneratedInstruction {
    Instruction instruction;
    bool fallback_used = false;  // oracle produced empty text; single-token fallback substituted
};

/// Generator oracle contract: lifted soft prompt plus exemplars in, one
/// non-empty instruction out. Deterministic per oracle policy.
class GeneratorOracle {
public:
    virtual ~GeneratorOracle() = default;

    /// The oracle's declared lifted dimension d'.
    virtual int lifted_dim() const = 0;

    virtual GeneratedInstruction generate(const Vector& lifted,
                                          const std::vector<Exemplar>& exemplars) = 0;
};

/// Scorer-side predictor contract: zero-shot answer for (instruction, query).
class PredictorOracle {
public:
    virtual ~PredictorOracle() = default;

    virtual std::string predict(const Instruction& instruction, const std::string& query) = 0;
};

struct ScoreResult {
    double score = 0.0;
    PredictionSet predictions;  // cached so the similarity matrix reuses them
    int failed_items = 0;
};

/// Mean metric value of the predictor's answers over the validation set.
/// A predictor failure on an item counts the item as 0 and flags it; if every
/// item fails an EvaluationError is thrown. Budget exhaustion propagates.
ScoreResult score_instruction(const Instruction& instruction, const TaskSpec& task,
                              PredictorOracle& predictor);

/// Task data file: {"metric": ..., "exemplars": [[x, y], ...],
/// "validation_set": [[X, Y], ...]}.
TaskSpec load_task_spec(const std::string& path);
void save_task_spec(const TaskSpec& task, const std::string& path);

}  // namespace instrbo
