#pragma once

#include "instrbo/kernels.hpp"
#include "instrbo/oracles.hpp"
#include "instrbo/projection.hpp"
#include "instrbo/synthetic.hpp"
#include "instrbo/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace instrbo {

struct CampaignSeeds {
    std::uint64_t projection = 7;
    std::uint64_t search = 11;
    std::uint64_t synthetic = 13;
};

struct CampaignConfig {
    int d = 10;
    int soft_token_count = 5;  // one of {3, 5, 10} unless allow_any_token_count
    bool allow_any_token_count = false;
    int kappa = 5;
    int validation_size = 20;
    int batch_size = 25;
    int max_iterations = 5;  // evaluated batches, the uniform first batch included
    double box_half_width = 1.0;
    double noise = 1e-3;  // GP observation noise
    KernelMode kernel_mode = KernelMode::Coupled;
    KernelFamily kernel_family = KernelFamily::Matern52;
    double lengthscale = 0.0;   // 0 -> sqrt(d)
    double output_scale = 1.0;
    SimilarityMetric similarity_metric = SimilarityMetric::F1;
    ProjectionDistribution projection_distribution = ProjectionDistribution::Uniform;
    int embedding_width = 16;  // synthetic generator embedding width
    int search_budget = 2000;  // acquisition CMA-ES evaluations per iteration
    int search_population = 0;
    double search_sigma0 = 0.0;
    CampaignSeeds seeds;
    std::optional<std::int64_t> oracle_budget;
    int convergence_patience = 2;
    double convergence_epsilon = 1e-3;
    std::string output_dir;  // empty -> no persistence

    // remote oracle endpoints; both empty -> synthetic oracles
    std::string generator_url;
    std::string predictor_url;
    int generator_dprime = 0;  // required with generator_url
    std::string auth_token;
    int http_timeout_ms = 30000;
    int http_max_attempts = 3;
    int http_backoff_ms = 100;

    LatentKernelSpec kernel_spec() const;
    void validate() const;

    /// Stable hash of the canonical serialization, as a hex string.
    std::string config_hash() const;
};

struct IterationStat {
    int iteration = 0;
    double best_so_far = 0.0;
    double batch_mean = 0.0;
    double top15_mean = 0.0;
};

struct CampaignResult {
    Instruction best_instruction;
    double best_score = 0.0;
    int best_index = -1;
    std::vector<EvalRecord> records;
    std::vector<IterationStat> stats;
    int iterations_completed = 0;
    bool converged = false;
    bool halted = false;  // budget exhausted; resumable state persisted
    std::int64_t generator_calls = 0;
    std::int64_t predictor_calls = 0;
};

/// Per-iteration trace: best-so-far, batch mean, and the mean score of the
/// best ceil(0.15 m) records seen so far.
std::vector<IterationStat> trace_report(const std::vector<EvalRecord>& records);

void write_trace_csv(std::ostream& out, const std::vector<IterationStat>& stats);

/// True iff the best score reached 1.0, or it improved by less than epsilon
/// over the last `patience` completed iterations. Throws ArgumentError when
/// no iteration has completed.
bool convergence_check(const std::vector<IterationStat>& stats, int patience, double epsilon);

/// Runs the full loop: sample the projection, evaluate a uniform first batch,
/// then per iteration refresh the instruction-coupled kernel, refit the GP,
/// and propose the next batch by maximizing expected improvement with CMA-ES.
/// On budget exhaustion the state is persisted and the result is returned
/// with halted = true. `synthetic`, when given, is embedded in the checkpoint
/// so a resume can reconstruct the oracles.
CampaignResult run_campaign(const CampaignConfig& cfg, const TaskSpec& task,
                            GeneratorOracle& generator, PredictorOracle& predictor,
                            CallBudget* budget = nullptr,
                            const std::optional<SyntheticTask>& synthetic = std::nullopt);

/// Pure-exploration comparator: the same total number of soft prompts, all
/// drawn uniformly from the box, no surrogate and no acquisition step.
CampaignResult uniform_baseline(const CampaignConfig& cfg, const TaskSpec& task,
                                GeneratorOracle& generator, PredictorOracle& predictor,
                                CallBudget* budget = nullptr,
                                const std::optional<SyntheticTask>& synthetic = std::nullopt);

/// Everything needed to continue a halted or finished run.
struct Checkpoint {
    CampaignConfig config;
    TaskSpec task;
    std::optional<SyntheticTask> synthetic_task;
    std::vector<EvalRecord> records;
    struct CacheEntry {
        Instruction instruction;
        double score = 0.0;
        PredictionSet predictions;
        int failed_items = 0;
    };
    std::vector<CacheEntry> cache;
    int iterations_completed = 0;
    bool baseline_mode = false;
    std::optional<int> pending_iteration;
    std::vector<SoftPrompt> pending_prompts;
    std::int64_t generator_calls = 0;
    std::int64_t predictor_calls = 0;
    std::int64_t budget_used = 0;
    bool halted = false;
};

Checkpoint load_checkpoint(const std::string& output_dir);

/// Continues a checkpointed run in the same output directory. With identical
/// seeds the completed trace is identical to an uninterrupted run.
CampaignResult resume_campaign(const std::string& output_dir, GeneratorOracle& generator,
                               PredictorOracle& predictor, CallBudget* budget = nullptr);

/// Reads record lines back from a run log (header lines are skipped).
std::vector<EvalRecord> read_run_log(const std::string& path);

}  // namespace instrbo
