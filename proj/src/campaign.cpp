#include "instrbo/campaign.hpp"

#include "instrbo/acquisition.hpp"
#include "instrbo/cmaes.hpp"
#include "instrbo/errors.hpp"
#include "instrbo/gp.hpp"
#include "instrbo/metrics.hpp"
#include "instrbo/rng.hpp"
#include "json_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace instrbo {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kRunLogFile = "run_log.jsonl";
constexpr const char* kCheckpointFile = "checkpoint.json";
constexpr const char* kTraceFile = "trace.csv";

std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm.tm_year + 1900,
                  tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    return buf;
}


}  // namespace

LatentKernelSpec CampaignConfig::kernel_spec() const {
    LatentKernelSpec spec;
    spec.family = kernel_family;
    spec.lengthscale = lengthscale > 0.0 ? lengthscale : std::sqrt(static_cast<double>(d));
    spec.output_scale = output_scale;
    return spec;
}

void CampaignConfig::validate() const {
    if (d < 1) throw ConfigError("d must be >= 1");
    if (soft_token_count < 1) throw ConfigError("soft_token_count must be >= 1");
    if (!allow_any_token_count && soft_token_count != 3 && soft_token_count != 5 &&
        soft_token_count != 10) {
        throw ConfigError("soft_token_count must be one of {3, 5, 10}; "
                          "set allow_any_token_count to override");
    }
    if (kappa < 1) throw ConfigError("kappa must be >= 1");
    if (validation_size < 1) throw ConfigError("validation_size must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (max_iterations < 0) throw ConfigError("max_iterations must be >= 0");
    if (!(box_half_width > 0.0)) throw ConfigError("box_half_width must be > 0");
    if (noise < 0.0) throw ConfigError("noise must be >= 0");
    if (embedding_width < 1) throw ConfigError("embedding_width must be >= 1");
    if (convergence_patience < 1) throw ConfigError("convergence_patience must be >= 1");
    if (convergence_epsilon < 0.0) throw ConfigError("convergence_epsilon must be >= 0");
    kernel_spec().validate();
    SearchConfig sc;
    sc.dimension = d;
    sc.lower = -box_half_width;
    sc.upper = box_half_width;
    sc.population_size = search_population;
    sc.max_evaluations = search_budget;
    sc.sigma0 = search_sigma0;
    sc.validate();
    if (!generator_url.empty() && generator_dprime < 1) {
        throw ConfigError("generator_dprime is required with a remote generator");
    }
    if (generator_url.empty() != predictor_url.empty()) {
        throw ConfigError("generator_url and predictor_url must be set together");
    }
}

std::string CampaignConfig::config_hash() const {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(detail::config_to_json(*this).dump())));
    return buf;
}

std::vector<IterationStat> trace_report(const std::vector<EvalRecord>& records) {
    std::vector<IterationStat> stats;
    if (records.empty()) return stats;

    std::vector<double> scores;
    scores.reserve(records.size());
    double best = 0.0;
    std::size_t idx = 0;
    while (idx < records.size()) {
        int iteration = records[idx].iteration;
        double batch_sum = 0.0;
        int batch_count = 0;
        while (idx < records.size() && records[idx].iteration == iteration) {
            best = std::max(best, records[idx].score);
            scores.push_back(records[idx].score);
            batch_sum += records[idx].score;
            ++batch_count;
            ++idx;
        }
        auto m = static_cast<int>(scores.size());
        int top = (3 * m + 19) / 20;  // ceil(0.15 m)
        std::vector<double> sorted = scores;
        std::partial_sort(sorted.begin(), sorted.begin() + top, sorted.end(),
                          std::greater<>());
        double top_sum = 0.0;
        for (int i = 0; i < top; ++i) top_sum += sorted[i];
        stats.push_back({iteration, best, batch_sum / batch_count, top_sum / top});
    }
    return stats;
}

void write_trace_csv(std::ostream& out, const std::vector<IterationStat>& stats) {
    out << "iteration,best_so_far,batch_mean,top15_mean\n";
    char buf[128];
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", s.iteration, s.best_so_far,
                      s.batch_mean, s.top15_mean);
        out << buf;
    }
}

bool convergence_check(const std::vector<IterationStat>& stats, int patience, double epsilon) {
    if (stats.empty()) throw ArgumentError("convergence check needs a completed iteration");
    if (patience < 1) throw ArgumentError("patience must be >= 1");
    const auto n = stats.size();
    if (stats[n - 1].best_so_far >= 1.0) return true;
    if (n <= static_cast<std::size_t>(patience)) return false;
    return stats[n - 1].best_so_far - stats[n - 1 - patience].best_so_far < epsilon;
}

namespace {

struct ScoredEntry {
    Instruction instruction;
    double score = 0.0;
    PredictionSet predictions;
    int failed_items = 0;
    // derived caches for similarity entries
    std::vector<std::string> norm;
    std::vector<std::vector<std::string>> tokens;
};

ScoredEntry make_entry(const Instruction& instruction, double score, PredictionSet preds,
                       int failed_items) {
    ScoredEntry e;
    e.instruction = instruction;
    e.score = score;
    e.predictions = std::move(preds);
    e.failed_items = failed_items;
    e.norm.reserve(e.predictions.size());
    e.tokens.reserve(e.predictions.size());
    for (const auto& text : e.predictions.texts) {
        e.norm.push_back(normalize_answer(text));
        e.tokens.push_back(whitespace_tokens(e.norm.back()));
    }
    return e;
}

double entry_similarity(const ScoredEntry& a, const ScoredEntry& b, SimilarityMetric metric) {
    if (a.instruction.id == b.instruction.id) return 1.0;
    double sum = 0.0;
    int used = 0;
    for (std::size_t i = 0; i < a.predictions.size(); ++i) {
        if (!a.predictions.ok[i] || !b.predictions.ok[i]) continue;
        sum += metric == SimilarityMetric::ExactMatch
                   ? static_cast<double>(a.norm[i] == b.norm[i])
                   : token_f1(a.tokens[i], b.tokens[i]);
        ++used;
    }
    if (used == 0) throw EvaluationError("no probe succeeded for both instructions");
    return sum / static_cast<double>(used);
}

class Runner {
public:
    Runner(CampaignConfig cfg, TaskSpec task, GeneratorOracle& generator,
           PredictorOracle& predictor, CallBudget* budget,
           std::optional<SyntheticTask> synthetic, bool baseline)
        : cfg_(std::move(cfg)),
          task_(std::move(task)),
          generator_(generator),
          predictor_(predictor),
          budget_(budget),
          synthetic_(std::move(synthetic)),
          baseline_(baseline) {
        cfg_.validate();
        task_.validate();
        if (static_cast<int>(task_.validation_set.size()) != cfg_.validation_size ||
            static_cast<int>(task_.exemplars.size()) != cfg_.kappa) {
            throw ConfigError("task sizes do not match the configured validation_size/kappa");
        }
        projection_ = sample_projection(cfg_.d, generator_.lifted_dim(), cfg_.seeds.projection,
                                        cfg_.projection_distribution);
    }

    void restore(const Checkpoint& ck) {
        records_ = ck.records;
        for (const auto& entry : ck.cache) {
            cache_.emplace(entry.instruction.id,
                           make_entry(entry.instruction, entry.score, entry.predictions,
                                      entry.failed_items));
        }
        iterations_completed_ = ck.iterations_completed;
        pending_iteration_ = ck.pending_iteration;
        pending_prompts_ = ck.pending_prompts;
        pending_next_ = 0;
        if (pending_iteration_) {
            for (const auto& r : records_) {
                if (r.iteration == *pending_iteration_) ++pending_next_;
            }
        }
        generator_calls_ = ck.generator_calls;
        predictor_calls_ = ck.predictor_calls;
        if (budget_) budget_->restore(ck.budget_used);
        for (std::size_t i = 0; i < records_.size(); ++i) {
            if (best_index_ < 0 || records_[i].score > records_[best_index_].score) {
                best_index_ = static_cast<int>(i);
            }
        }
    }

    CampaignResult execute(bool fresh_log) {
        if (persistent()) {
            fs::create_directories(cfg_.output_dir);
            log_.open(fs::path(cfg_.output_dir) / kRunLogFile,
                      fresh_log ? std::ios::trunc : std::ios::app);
            if (!log_) throw ConfigError("cannot open run log in " + cfg_.output_dir);
            if (fresh_log) log_header();
        }

        while (iterations_completed_ < total_iterations() && !converged_) {
            if (!pending_iteration_) {
                int iteration = iterations_completed_ + 1;
                pending_prompts_ = (baseline_ || iteration == 1) ? uniform_batch(iteration)
                                                                 : bo_batch(iteration);
                pending_iteration_ = iteration;
                pending_next_ = 0;
                write_checkpoint(false);
            }
            try {
                evaluate_pending();
            } catch (const BudgetExhaustedError&) {
                write_checkpoint(true);
                return make_result(true);
            } catch (...) {
                write_checkpoint(false);
                throw;
            }
            ++iterations_completed_;
            pending_iteration_.reset();
            pending_prompts_.clear();
            if (!baseline_) {
                converged_ = convergence_check(trace_report(records_),
                                               cfg_.convergence_patience,
                                               cfg_.convergence_epsilon);
            }
            write_checkpoint(false);
        }

        if (persistent()) {
            std::ofstream trace(fs::path(cfg_.output_dir) / kTraceFile);
            write_trace_csv(trace, trace_report(records_));
        }
        return make_result(false);
    }

private:
    bool persistent() const { return !cfg_.output_dir.empty(); }
    int total_iterations() const { return std::max(1, cfg_.max_iterations); }

    std::vector<SoftPrompt> uniform_batch(int iteration) {
        Rng rng(mix_seed(cfg_.seeds.search, static_cast<std::uint64_t>(iteration - 1)));
        std::vector<SoftPrompt> batch(cfg_.batch_size);
        for (auto& p : batch) {
            p.resize(cfg_.d);
            for (int i = 0; i < cfg_.d; ++i) {
                p(i) = rng.uniform(-cfg_.box_half_width, cfg_.box_half_width);
            }
        }
        return batch;
    }

    std::vector<SoftPrompt> bo_batch(int iteration) {
        const auto m = records_.size();
        std::vector<SoftPrompt> prompts(m);
        std::vector<Instruction> instructions(m);
        for (std::size_t i = 0; i < m; ++i) {
            prompts[i] = records_[i].prompt;
            instructions[i] = records_[i].instruction;
        }

        Matrix similarity;
        if (cfg_.kernel_mode == KernelMode::Coupled) {
            similarity = Matrix::Identity(m, m);
            for (std::size_t i = 0; i < m; ++i) {
                const auto& a = cache_.at(instructions[i].id);
                for (std::size_t j = i + 1; j < m; ++j) {
                    double s = entry_similarity(a, cache_.at(instructions[j].id),
                                                cfg_.similarity_metric);
                    similarity(i, j) = s;
                    similarity(j, i) = s;
                }
            }
        }

        auto state = std::make_shared<KernelState>(
            KernelState::build(cfg_.kernel_mode, cfg_.kernel_spec(), std::move(prompts),
                               std::move(instructions), similarity));
        GaussianPosterior gp = GaussianPosterior::fit(records_, state, cfg_.noise);
        AcquisitionContext ctx = AcquisitionContext::from(gp, cfg_.batch_size);

        SearchConfig sc;
        sc.dimension = cfg_.d;
        sc.lower = -cfg_.box_half_width;
        sc.upper = cfg_.box_half_width;
        sc.population_size = cfg_.search_population;
        sc.max_evaluations = cfg_.search_budget;
        sc.sigma0 = cfg_.search_sigma0;
        sc.seed = mix_seed(cfg_.seeds.search, static_cast<std::uint64_t>(iteration - 1));
        return propose_candidates(
            [&](const SoftPrompt& p) { return expected_improvement(ctx, p); }, sc,
            cfg_.batch_size);
    }

    void evaluate_pending() {
        for (; pending_next_ < pending_prompts_.size(); ++pending_next_) {
            const SoftPrompt& p = pending_prompts_[pending_next_];
            Vector lifted = project(projection_, p);
            GeneratedInstruction gen = generator_.generate(lifted, task_.exemplars);
            ++generator_calls_;

            std::int64_t predictor_cost = 0;
            auto it = cache_.find(gen.instruction.id);
            if (it == cache_.end()) {
                ScoreResult sr = score_instruction(gen.instruction, task_, predictor_);
                predictor_cost = static_cast<std::int64_t>(task_.validation_set.size());
                predictor_calls_ += predictor_cost;
                it = cache_.emplace(gen.instruction.id,
                                    make_entry(gen.instruction, sr.score,
                                               std::move(sr.predictions), sr.failed_items))
                         .first;
            }

            EvalRecord record{p,
                              gen.instruction,
                              it->second.score,
                              *pending_iteration_,
                              gen.fallback_used,
                              it->second.failed_items};
            records_.push_back(record);
            if (best_index_ < 0 || record.score > records_[best_index_].score) {
                best_index_ = static_cast<int>(records_.size()) - 1;
            }
            log_record(record, 1, predictor_cost);
        }
    }

    void log_header() {
        if (!log_) return;
        json j;
        j["header"] = true;
        j["config"] = detail::config_to_json(cfg_);
        j["config_hash"] = cfg_.config_hash();
        j["baseline"] = baseline_;
        j["projection"] = {{"seed", projection_.seed},
                           {"d", projection_.rows()},
                           {"d_prime", projection_.cols()},
                           {"distribution", distribution_name(projection_.distribution)}};
        log_ << j.dump() << "\n";
        log_.flush();
    }

    void log_record(const EvalRecord& r, std::int64_t generator_cost,
                    std::int64_t predictor_cost) {
        if (!log_) return;
        json j = detail::record_to_json(r);
        j["generator_calls"] = generator_cost;
        j["predictor_calls"] = predictor_cost;
        j["timestamp"] = iso_timestamp();
        log_ << j.dump() << "\n";
        log_.flush();
    }

    void write_checkpoint(bool halted) {
        if (!persistent()) return;
        json j;
        j["config"] = detail::config_to_json(cfg_);
        j["config_hash"] = cfg_.config_hash();
        j["task"] = detail::task_to_json(task_);
        j["synthetic_task"] = synthetic_ ? detail::synthetic_to_json(*synthetic_) : json(nullptr);
        j["baseline"] = baseline_;
        j["iterations_completed"] = iterations_completed_;
        j["halted"] = halted;
        if (pending_iteration_) {
            json pending;
            pending["iteration"] = *pending_iteration_;
            auto& prompts = pending["prompts"] = json::array();
            for (const auto& p : pending_prompts_) {
                prompts.push_back(std::vector<double>(p.data(), p.data() + p.size()));
            }
            j["pending"] = pending;
        } else {
            j["pending"] = nullptr;
        }
        auto& recs = j["records"] = json::array();
        for (const auto& r : records_) recs.push_back(detail::record_to_json(r));
        auto& cache = j["cache"] = json::array();
        for (const auto& [id, entry] : cache_) {
            json e;
            e["instruction"] = entry.instruction.text;
            e["score"] = entry.score;
            e["texts"] = entry.predictions.texts;
            e["ok"] = entry.predictions.ok;
            e["failed_items"] = entry.failed_items;
            cache.push_back(e);
        }
        j["generator_calls"] = generator_calls_;
        j["predictor_calls"] = predictor_calls_;
        j["budget_used"] = budget_ ? budget_->used() : 0;

        fs::path path = fs::path(cfg_.output_dir) / kCheckpointFile;
        fs::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            if (!out) throw ConfigError("cannot write checkpoint in " + cfg_.output_dir);
            out << j.dump() << "\n";
        }
        fs::rename(tmp, path);
    }

    CampaignResult make_result(bool halted) {
        CampaignResult result;
        result.records = records_;
        result.stats = trace_report(records_);
        result.iterations_completed = iterations_completed_;
        result.converged = converged_;
        result.halted = halted;
        result.generator_calls = generator_calls_;
        result.predictor_calls = predictor_calls_;
        result.best_index = best_index_;
        if (best_index_ >= 0) {
            result.best_instruction = records_[best_index_].instruction;
            result.best_score = records_[best_index_].score;
        }
        return result;
    }

    CampaignConfig cfg_;
    TaskSpec task_;
    GeneratorOracle& generator_;
    PredictorOracle& predictor_;
    CallBudget* budget_;
    std::optional<SyntheticTask> synthetic_;
    bool baseline_;
    ProjectionMatrix projection_;

    std::vector<EvalRecord> records_;
    std::map<std::uint64_t, ScoredEntry> cache_;
    int iterations_completed_ = 0;
    std::optional<int> pending_iteration_;
    std::vector<SoftPrompt> pending_prompts_;
    std::size_t pending_next_ = 0;
    std::int64_t generator_calls_ = 0;
    std::int64_t predictor_calls_ = 0;
    int best_index_ = -1;
    bool converged_ = false;
    std::ofstream log_;
};

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg, const TaskSpec& task,
                            GeneratorOracle& generator, PredictorOracle& predictor,
                            CallBudget* budget, const std::optional<SyntheticTask>& synthetic) {
    Runner runner(cfg, task, generator, predictor, budget, synthetic, false);
    return runner.execute(true);
}

CampaignResult uniform_baseline(const CampaignConfig& cfg, const TaskSpec& task,
                                GeneratorOracle& generator, PredictorOracle& predictor,
                                CallBudget* budget,
                                const std::optional<SyntheticTask>& synthetic) {
    Runner runner(cfg, task, generator, predictor, budget, synthetic, true);
    return runner.execute(true);
}

Checkpoint load_checkpoint(const std::string& output_dir) {
    fs::path path = fs::path(output_dir) / kCheckpointFile;
    std::ifstream in(path);
    if (!in) throw ConfigError("no checkpoint found at " + path.string());
    json j = json::parse(in);

    Checkpoint ck;
    ck.config = detail::config_from_json(j.at("config"));
    if (j.value("config_hash", "") != ck.config.config_hash()) {
        throw ConfigError("checkpoint config hash mismatch; refusing to resume");
    }
    ck.task = detail::task_from_json(j.at("task"));
    if (!j.at("synthetic_task").is_null()) {
        ck.synthetic_task = detail::synthetic_from_json(j.at("synthetic_task"));
    }
    ck.baseline_mode = j.value("baseline", false);
    ck.iterations_completed = j.value("iterations_completed", 0);
    ck.halted = j.value("halted", false);
    if (j.contains("pending") && !j["pending"].is_null()) {
        ck.pending_iteration = j["pending"].at("iteration").get<int>();
        for (const auto& arr : j["pending"].at("prompts")) {
            auto coords = arr.get<std::vector<double>>();
            ck.pending_prompts.push_back(Eigen::Map<const Vector>(
                coords.data(), static_cast<Eigen::Index>(coords.size())));
        }
    }
    for (const auto& r : j.at("records")) ck.records.push_back(detail::record_from_json(r));
    for (const auto& e : j.at("cache")) {
        Checkpoint::CacheEntry entry;
        entry.instruction = Instruction::from_text(e.at("instruction").get<std::string>());
        entry.score = e.at("score").get<double>();
        entry.predictions.texts = e.at("texts").get<std::vector<std::string>>();
        entry.predictions.ok = e.at("ok").get<std::vector<std::uint8_t>>();
        entry.failed_items = e.value("failed_items", 0);
        ck.cache.push_back(std::move(entry));
    }
    ck.generator_calls = j.value("generator_calls", std::int64_t{0});
    ck.predictor_calls = j.value("predictor_calls", std::int64_t{0});
    ck.budget_used = j.value("budget_used", std::int64_t{0});
    return ck;
}

CampaignResult resume_campaign(const std::string& output_dir, GeneratorOracle& generator,
                               PredictorOracle& predictor, CallBudget* budget) {
    Checkpoint ck = load_checkpoint(output_dir);
    Runner runner(ck.config, ck.task, generator, predictor, budget, ck.synthetic_task,
                  ck.baseline_mode);
    runner.restore(ck);
    return runner.execute(false);
}

std::vector<EvalRecord> read_run_log(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open run log: " + path);
    std::vector<EvalRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line);
        if (j.value("header", false)) continue;
        records.push_back(detail::record_from_json(j));
    }
    return records;
}

}  // namespace instrbo
