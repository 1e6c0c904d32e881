#include "instrbo/campaign.hpp"
#include "instrbo/errors.hpp"
#include "instrbo/http_oracle.hpp"
#include "instrbo/oracles.hpp"
#include "instrbo/synthetic.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace instrbo;

namespace {

struct CliOptions {
    CampaignConfig cfg;
    std::string task_file;     // synthetic task description
    std::string data_file;     // explicit task data (required with remote oracles)
    std::string metric = "f1";
    double task_noise = 0.0;   // noise level for a generated synthetic task
    std::int64_t budget_flag = -1;
};

void add_campaign_options(CLI::App* cmd, CliOptions& opt) {
    cmd->set_config("--config", "", "INI config file; command-line flags override it");
    cmd->add_option("-d,--dimension", opt.cfg.d, "Latent search dimension");
    cmd->add_option("--tokens", opt.cfg.soft_token_count, "Soft-token count (3, 5 or 10)");
    cmd->add_flag("--allow-any-token-count", opt.cfg.allow_any_token_count,
                  "Permit token counts outside {3, 5, 10}");
    cmd->add_option("--kappa", opt.cfg.kappa, "Exemplar count");
    cmd->add_option("--validation-size", opt.cfg.validation_size, "Validation set size");
    cmd->add_option("-b,--batch-size", opt.cfg.batch_size, "Soft prompts per iteration");
    cmd->add_option("-n,--iterations", opt.cfg.max_iterations,
                    "Evaluated batches, the uniform first batch included");
    cmd->add_option("--box-half-width", opt.cfg.box_half_width, "Latent box half-width");
    cmd->add_option("--noise", opt.cfg.noise, "GP observation noise");
    cmd->add_option("--kernel-mode", [&opt](const std::vector<std::string>& v) {
        opt.cfg.kernel_mode = kernel_mode_from_name(v.back());
        return true;
    }, "coupled | standard")->expected(1);
    cmd->add_option("--kernel-family", [&opt](const std::vector<std::string>& v) {
        opt.cfg.kernel_family = kernel_family_from_name(v.back());
        return true;
    }, "matern52 | squared_exponential")->expected(1);
    cmd->add_option("--lengthscale", opt.cfg.lengthscale,
                    "Latent kernel lengthscale (0 = sqrt(d))");
    cmd->add_option("--output-scale", opt.cfg.output_scale, "Latent kernel output scale");
    cmd->add_option("--similarity-metric", [&opt](const std::vector<std::string>& v) {
        opt.cfg.similarity_metric = similarity_metric_from_name(v.back());
        return true;
    }, "exact_match | f1")->expected(1);
    cmd->add_option("--projection-distribution", [&opt](const std::vector<std::string>& v) {
        opt.cfg.projection_distribution = distribution_from_name(v.back());
        return true;
    }, "uniform | normal")->expected(1);
    cmd->add_option("--embedding-width", opt.cfg.embedding_width,
                    "Synthetic generator embedding width");
    cmd->add_option("--search-budget", opt.cfg.search_budget,
                    "CMA-ES evaluations per acquisition round");
    cmd->add_option("--search-population", opt.cfg.search_population,
                    "CMA-ES population size (0 = default)");
    cmd->add_option("--search-sigma0", opt.cfg.search_sigma0,
                    "CMA-ES initial step size (0 = box/3)");
    cmd->add_option("--seed-projection", opt.cfg.seeds.projection, "Projection seed");
    cmd->add_option("--seed-search", opt.cfg.seeds.search, "Search / init seed");
    cmd->add_option("--seed-synthetic", opt.cfg.seeds.synthetic, "Synthetic task seed");
    cmd->add_option("--oracle-budget", opt.budget_flag,
                    "Max oracle calls per campaign (-1 = unlimited)");
    cmd->add_option("--patience", opt.cfg.convergence_patience, "Convergence patience");
    cmd->add_option("--epsilon", opt.cfg.convergence_epsilon,
                    "Convergence improvement threshold");
    cmd->add_option("-o,--out", opt.cfg.output_dir, "Output directory (logs and checkpoint)");
    cmd->add_option("--task", opt.task_file, "Synthetic task file (JSON)");
    cmd->add_option("--data", opt.data_file,
                    "Task data file with exemplars and validation pairs (JSON)");
    cmd->add_option("--metric", opt.metric, "Scoring metric for generated synthetic tasks");
    cmd->add_option("--task-noise", opt.task_noise,
                    "Noise level for a generated synthetic task");
    cmd->add_option("--generator-url", opt.cfg.generator_url, "Remote generator endpoint");
    cmd->add_option("--predictor-url", opt.cfg.predictor_url, "Remote predictor endpoint");
    cmd->add_option("--generator-dprime", opt.cfg.generator_dprime,
                    "Lifted dimension declared by the remote generator");
    cmd->add_option("--auth-token", opt.cfg.auth_token, "Bearer token for remote oracles");
    cmd->add_option("--http-timeout-ms", opt.cfg.http_timeout_ms, "HTTP timeout");
    cmd->add_option("--http-max-attempts", opt.cfg.http_max_attempts, "HTTP retry attempts");
    cmd->add_option("--http-backoff-ms", opt.cfg.http_backoff_ms, "Initial retry backoff");
}

struct Oracles {
    std::unique_ptr<GeneratorOracle> generator;
    std::unique_ptr<PredictorOracle> predictor;
    std::unique_ptr<CallBudget> budget;
    TaskSpec task;
    std::optional<SyntheticTask> synthetic;
};

HttpOracleConfig http_config(const CampaignConfig& cfg, const std::string& url) {
    HttpOracleConfig http;
    http.base_url = url;
    http.auth_token = cfg.auth_token;
    http.timeout_ms = cfg.http_timeout_ms;
    http.max_attempts = cfg.http_max_attempts;
    http.backoff_initial_ms = cfg.http_backoff_ms;
    return http;
}

Oracles build_oracles(CliOptions& opt) {
    Oracles out;
    if (opt.budget_flag >= 0) opt.cfg.oracle_budget = opt.budget_flag;
    out.budget = std::make_unique<CallBudget>(opt.cfg.oracle_budget);

    if (!opt.cfg.generator_url.empty()) {
        if (opt.data_file.empty()) {
            throw ConfigError("remote oracles need --data with validation pairs");
        }
        out.task = load_task_spec(opt.data_file);
        out.generator = std::make_unique<HttpGenerator>(
            http_config(opt.cfg, opt.cfg.generator_url), opt.cfg.generator_dprime,
            out.budget.get());
        out.predictor = std::make_unique<HttpPredictor>(
            http_config(opt.cfg, opt.cfg.predictor_url), out.budget.get());
        return out;
    }

    SyntheticTask task;
    if (!opt.task_file.empty()) {
        task = load_synthetic_task(opt.task_file);
    } else {
        auto projection = sample_projection(
            opt.cfg.d, opt.cfg.soft_token_count * opt.cfg.embedding_width,
            opt.cfg.seeds.projection, opt.cfg.projection_distribution);
        task = plant_synthetic_task(default_vocabulary(), opt.cfg.seeds.synthetic, projection,
                                    opt.cfg.soft_token_count, opt.cfg.embedding_width,
                                    opt.cfg.box_half_width, opt.task_noise);
    }
    out.synthetic = task;
    out.task = !opt.data_file.empty()
                   ? load_task_spec(opt.data_file)
                   : make_task_spec(task, opt.cfg.validation_size, opt.cfg.kappa,
                                    metric_from_name(opt.metric));
    out.generator = std::make_unique<SyntheticGenerator>(task, opt.cfg.soft_token_count,
                                                         opt.cfg.embedding_width);
    out.predictor = std::make_unique<SyntheticPredictor>(task, out.budget.get());
    return out;
}

void print_result(const CampaignResult& result, const std::string& label) {
    std::cout << label << ": " << result.records.size() << " evaluations over "
              << result.iterations_completed << " iteration(s)\n";
    std::cout << "  best score       " << result.best_score << "\n";
    std::cout << "  best instruction \"" << result.best_instruction.text << "\"\n";
    if (result.converged) std::cout << "  stopped early: converged\n";
    std::cout << "  oracle calls     generator=" << result.generator_calls
              << " predictor=" << result.predictor_calls << "\n";
    if (result.halted) {
        std::cout << "  HALTED: oracle budget exhausted; resume with `instrbo resume -o <dir>`\n";
    }
}

int finish(const CampaignResult& result, const std::string& label) {
    print_result(result, label);
    return result.halted ? 3 : 0;
}

int cmd_run(CliOptions& opt, bool baseline) {
    auto oracles = build_oracles(opt);
    auto result = baseline
                      ? uniform_baseline(opt.cfg, oracles.task, *oracles.generator,
                                         *oracles.predictor, oracles.budget.get(),
                                         oracles.synthetic)
                      : run_campaign(opt.cfg, oracles.task, *oracles.generator,
                                     *oracles.predictor, oracles.budget.get(),
                                     oracles.synthetic);
    return finish(result, baseline ? "uniform baseline" : "campaign");
}

int cmd_sweep(CliOptions& opt) {
    if (!opt.cfg.generator_url.empty()) {
        throw ConfigError("sweep-tokens drives the synthetic generator; remote oracles have "
                          "a fixed lifted dimension");
    }
    std::string base_out = opt.cfg.output_dir;
    int best_tokens = 0;
    double best_score = -1.0;
    for (int tokens : {3, 5, 10}) {
        CliOptions variant = opt;
        variant.cfg.soft_token_count = tokens;
        if (!base_out.empty()) {
            variant.cfg.output_dir =
                (fs::path(base_out) / ("tokens-" + std::to_string(tokens))).string();
        }
        auto oracles = build_oracles(variant);
        auto result = run_campaign(variant.cfg, oracles.task, *oracles.generator,
                                   *oracles.predictor, oracles.budget.get(), oracles.synthetic);
        print_result(result, "tokens=" + std::to_string(tokens));
        if (result.halted) return 3;
        if (result.best_score > best_score) {
            best_score = result.best_score;
            best_tokens = tokens;
        }
    }
    std::cout << "selected soft-token count: " << best_tokens << " (score " << best_score
              << ")\n";
    return 0;
}

int cmd_resume(const std::string& out_dir, std::optional<std::int64_t> budget_override) {
    auto ck = load_checkpoint(out_dir);
    auto limit = ck.config.oracle_budget;
    if (budget_override) {
        limit = *budget_override >= 0 ? std::optional<std::int64_t>(*budget_override)
                                      : std::nullopt;
    }
    auto budget = std::make_unique<CallBudget>(limit);

    std::unique_ptr<GeneratorOracle> generator;
    std::unique_ptr<PredictorOracle> predictor;
    if (!ck.config.generator_url.empty()) {
        generator = std::make_unique<HttpGenerator>(
            http_config(ck.config, ck.config.generator_url), ck.config.generator_dprime,
            budget.get());
        predictor = std::make_unique<HttpPredictor>(
            http_config(ck.config, ck.config.predictor_url), budget.get());
    } else {
        if (!ck.synthetic_task) {
            throw ConfigError("checkpoint has neither remote endpoints nor a synthetic task");
        }
        generator = std::make_unique<SyntheticGenerator>(
            *ck.synthetic_task, ck.config.soft_token_count, ck.config.embedding_width);
        predictor = std::make_unique<SyntheticPredictor>(*ck.synthetic_task, budget.get());
    }
    auto result = resume_campaign(out_dir, *generator, *predictor, budget.get());
    return finish(result, "resumed campaign");
}

int cmd_report(const std::string& log_path, const std::string& csv_path) {
    auto records = read_run_log(log_path);
    if (records.empty()) {
        std::cout << "run log holds no records\n";
        return 0;
    }
    auto stats = trace_report(records);
    if (csv_path.empty()) {
        write_trace_csv(std::cout, stats);
    } else {
        std::ofstream out(csv_path);
        if (!out) throw ConfigError("cannot write " + csv_path);
        write_trace_csv(out, stats);
        std::cout << "trace written to " << csv_path << "\n";
    }
    const EvalRecord* best = &records.front();
    for (const auto& r : records) {
        if (r.score > best->score) best = &r;
    }
    std::cout << records.size() << " records, best score " << best->score
              << " at iteration " << best->iteration << "\n";
    std::cout << "best instruction: \"" << best->instruction.text << "\"\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Latent-space Bayesian optimization of instructions for black-box oracles"};
    app.require_subcommand(1);

    CliOptions run_opt, baseline_opt, sweep_opt;
    auto* run = app.add_subcommand("run", "Run an optimization campaign");
    add_campaign_options(run, run_opt);
    auto* baseline = app.add_subcommand("baseline", "Uniform-sampling comparator");
    add_campaign_options(baseline, baseline_opt);
    auto* sweep = app.add_subcommand("sweep-tokens",
                                     "Run campaigns with 3/5/10 soft tokens and pick the best");
    add_campaign_options(sweep, sweep_opt);

    std::string log_path, csv_path, resume_dir;
    auto* report = app.add_subcommand("report", "Per-iteration trace CSV and summary");
    report->add_option("--log", log_path, "run_log.jsonl path")->required();
    report->add_option("--csv", csv_path, "CSV output path (default: stdout)");
    auto* resume = app.add_subcommand("resume", "Continue a checkpointed campaign");
    resume->add_option("-o,--out", resume_dir, "Campaign output directory")->required();
    std::int64_t resume_budget = 0;
    auto* resume_budget_opt = resume->add_option(
        "--oracle-budget", resume_budget,
        "Replace the checkpointed oracle budget (-1 = unlimited)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_opt, false);
        if (baseline->parsed()) return cmd_run(baseline_opt, true);
        if (sweep->parsed()) return cmd_sweep(sweep_opt);
        if (report->parsed()) return cmd_report(log_path, csv_path);
        if (resume->parsed()) {
            std::optional<std::int64_t> override;
            if (resume_budget_opt->count() > 0) override = resume_budget;
            return cmd_resume(resume_dir, override);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
