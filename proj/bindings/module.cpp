#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "instrbo/acquisition.hpp"
#include "instrbo/campaign.hpp"
#include "instrbo/cmaes.hpp"
#include "instrbo/errors.hpp"
#include "instrbo/gp.hpp"
#include "instrbo/kernels.hpp"
#include "instrbo/metrics.hpp"
#include "instrbo/oracles.hpp"
#include "instrbo/projection.hpp"
#include "instrbo/synthetic.hpp"

#include <memory>

namespace py = pybind11;
using namespace instrbo;

namespace {

std::vector<Instruction> instructions_from_text(const std::vector<std::string>& texts) {
    std::vector<Instruction> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(Instruction::from_text(t));
    return out;
}

std::shared_ptr<KernelState> build_kernel_state(const std::string& mode,
                                                const LatentKernelSpec& spec,
                                                const std::vector<SoftPrompt>& prompts,
                                                const std::vector<std::string>& instructions,
                                                const Matrix& similarity) {
    return std::make_shared<KernelState>(
        KernelState::build(kernel_mode_from_name(mode), spec, prompts,
                           instructions_from_text(instructions), similarity));
}

std::shared_ptr<GaussianPosterior> fit_gp(std::shared_ptr<KernelState> state,
                                          const std::vector<double>& scores, double noise) {
    std::vector<EvalRecord> records;
    records.reserve(scores.size());
    const auto& prompts = state->prompts();
    const auto& instructions = state->instructions();
    if (prompts.size() != scores.size()) {
        throw ArgumentError("score count does not match the kernel state size");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        Instruction ins = i < instructions.size()
                              ? instructions[i]
                              : Instruction::from_text("point " + std::to_string(i));
        records.push_back({prompts[i], ins, scores[i], 1, false, 0});
    }
    return std::make_shared<GaussianPosterior>(
        GaussianPosterior::fit(records, std::move(state), noise));
}

struct SyntheticRun {
    CampaignConfig cfg;
    SyntheticTask task;
    TaskSpec spec;
    std::unique_ptr<SyntheticGenerator> generator;
    std::unique_ptr<SyntheticPredictor> predictor;
    std::unique_ptr<CallBudget> budget;
};

SyntheticRun prepare_synthetic(const CampaignConfig& cfg, const SyntheticTask& task,
                               const std::string& metric) {
    SyntheticRun run;
    run.cfg = cfg;
    run.task = task;
    run.spec = make_task_spec(task, cfg.validation_size, cfg.kappa, metric_from_name(metric));
    run.generator =
        std::make_unique<SyntheticGenerator>(task, cfg.soft_token_count, cfg.embedding_width);
    run.budget = std::make_unique<CallBudget>(cfg.oracle_budget);
    run.predictor = std::make_unique<SyntheticPredictor>(task, run.budget.get());
    return run;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Latent-space Bayesian optimization of instructions";

    py::register_exception<Error>(m, "EngineError", PyExc_RuntimeError);

    // projection
    py::class_<ProjectionMatrix>(m, "ProjectionMatrix")
        .def_readonly("entries", &ProjectionMatrix::entries)
        .def_readonly("seed", &ProjectionMatrix::seed)
        .def_property_readonly(
            "distribution",
            [](const ProjectionMatrix& a) { return distribution_name(a.distribution); })
        .def_property_readonly("d", &ProjectionMatrix::rows)
        .def_property_readonly("d_prime", &ProjectionMatrix::cols);

    m.def(
        "sample_projection",
        [](int d, int d_prime, std::uint64_t seed, const std::string& distribution) {
            return sample_projection(d, d_prime, seed, distribution_from_name(distribution));
        },
        py::arg("d"), py::arg("d_prime"), py::arg("seed"),
        py::arg("distribution") = "uniform");
    m.def("project", &project, py::arg("projection"), py::arg("prompt"));

    py::class_<DistortionReport>(m, "DistortionReport")
        .def_readonly("max_relative", &DistortionReport::max_relative)
        .def_readonly("mean_relative", &DistortionReport::mean_relative)
        .def_readonly("scale", &DistortionReport::scale)
        .def_readonly("pair_count", &DistortionReport::pair_count)
        .def_readonly("skipped_pairs", &DistortionReport::skipped_pairs);
    m.def("jl_distortion_report", &jl_distortion_report, py::arg("projection"),
          py::arg("points"));

    // metrics
    m.def("normalize_answer", &normalize_answer);
    m.def("metric_exact_match", &metric_exact_match);
    m.def("metric_exact_set", &metric_exact_set);
    m.def("metric_contain", &metric_contain);
    m.def("metric_f1", &metric_f1);

    // kernels
    py::class_<LatentKernelSpec>(m, "LatentKernelSpec")
        .def(py::init([](const std::string& family, double lengthscale, double output_scale) {
                 return LatentKernelSpec{kernel_family_from_name(family), lengthscale,
                                         output_scale};
             }),
             py::arg("family") = "matern52", py::arg("lengthscale") = 1.0,
             py::arg("output_scale") = 1.0)
        .def_readwrite("lengthscale", &LatentKernelSpec::lengthscale)
        .def_readwrite("output_scale", &LatentKernelSpec::output_scale);
    m.def("latent_kernel", &latent_kernel, py::arg("spec"), py::arg("p"), py::arg("q"));

    py::class_<KernelState, std::shared_ptr<KernelState>>(m, "KernelState")
        .def_property_readonly("k", [](const KernelState& s) { return s.k(); })
        .def_property_readonly("s", [](const KernelState& s) { return s.s(); })
        .def_property_readonly("latent", [](const KernelState& s) { return s.latent(); })
        .def("cross", &KernelState::cross, py::arg("prompt"))
        .def("self_kernel", &KernelState::self, py::arg("prompt"))
        .def("kernel_value", &KernelState::kernel_value, py::arg("p"), py::arg("q"))
        .def_property_readonly("size", &KernelState::size);
    m.def("build_kernel_state", &build_kernel_state, py::arg("mode"), py::arg("spec"),
          py::arg("prompts"), py::arg("instructions") = std::vector<std::string>{},
          py::arg("similarity") = Matrix());

    // GP + acquisition
    py::class_<GaussianPosterior, std::shared_ptr<GaussianPosterior>>(m, "GaussianPosterior")
        .def("mean", &GaussianPosterior::mean, py::arg("prompt"))
        .def("variance", &GaussianPosterior::variance, py::arg("prompt"))
        .def_property_readonly("incumbent", &GaussianPosterior::incumbent)
        .def_property_readonly("noise", &GaussianPosterior::noise)
        .def_property_readonly("applied_jitter", &GaussianPosterior::applied_jitter);
    m.def("fit_gp", &fit_gp, py::arg("kernel_state"), py::arg("scores"), py::arg("noise"));

    m.def("expected_improvement",
          py::overload_cast<double, double, double>(&expected_improvement), py::arg("mean"),
          py::arg("variance"), py::arg("incumbent"));
    m.def(
        "expected_improvement_at",
        [](const GaussianPosterior& gp, const SoftPrompt& p) {
            return expected_improvement(AcquisitionContext::from(gp, 1), p);
        },
        py::arg("posterior"), py::arg("prompt"));
    m.def(
        "select_batch",
        [](const GaussianPosterior& gp, const std::vector<SoftPrompt>& candidates, int k) {
            return select_batch(AcquisitionContext::from(gp, k), candidates, k);
        },
        py::arg("posterior"), py::arg("candidates"), py::arg("k"));

    // CMA-ES search
    py::class_<SearchConfig>(m, "SearchConfig")
        .def(py::init<>())
        .def_readwrite("dimension", &SearchConfig::dimension)
        .def_readwrite("lower", &SearchConfig::lower)
        .def_readwrite("upper", &SearchConfig::upper)
        .def_readwrite("population_size", &SearchConfig::population_size)
        .def_readwrite("max_evaluations", &SearchConfig::max_evaluations)
        .def_readwrite("sigma0", &SearchConfig::sigma0)
        .def_readwrite("seed", &SearchConfig::seed);
    py::class_<SearchResult>(m, "SearchResult")
        .def_readonly("best_point", &SearchResult::best_point)
        .def_readonly("best_value", &SearchResult::best_value)
        .def_readonly("evaluations", &SearchResult::evaluations)
        .def_readonly("nan_samples", &SearchResult::nan_samples);
    m.def("maximize", &maximize, py::arg("objective"), py::arg("config"));
    m.def("propose_candidates", &propose_candidates, py::arg("objective"), py::arg("config"),
          py::arg("k"));

    // synthetic oracles
    py::class_<SyntheticTask>(m, "SyntheticTask")
        .def(py::init<>())
        .def_readwrite("vocabulary", &SyntheticTask::vocabulary)
        .def_readwrite("target_tokens", &SyntheticTask::target_tokens)
        .def_readwrite("noise_level", &SyntheticTask::noise_level)
        .def_readwrite("seed", &SyntheticTask::seed)
        .def_property_readonly("target_text", &SyntheticTask::target_text);
    m.def("default_vocabulary", [] { return default_vocabulary(); });
    m.def("load_synthetic_task", &load_synthetic_task, py::arg("path"));
    m.def("save_synthetic_task", &save_synthetic_task, py::arg("task"), py::arg("path"));
    m.def(
        "synthetic_predict",
        [](const std::string& instruction, const std::string& query, const SyntheticTask& t) {
            return synthetic_predict(Instruction::from_text(instruction), query, t);
        },
        py::arg("instruction"), py::arg("query"), py::arg("task"));
    m.def(
        "plant_synthetic_task",
        [](const std::vector<std::string>& vocabulary, std::uint64_t seed,
           const ProjectionMatrix& projection, int soft_token_count, int embedding_width,
           double box_half_width, double noise_level) {
            return plant_synthetic_task(vocabulary, seed, projection, soft_token_count,
                                        embedding_width, box_half_width, noise_level);
        },
        py::arg("vocabulary"), py::arg("seed"), py::arg("projection"),
        py::arg("soft_token_count"), py::arg("embedding_width"),
        py::arg("box_half_width") = 1.0, py::arg("noise_level") = 0.0);

    py::class_<SyntheticGenerator>(m, "SyntheticGenerator")
        .def(py::init<SyntheticTask, int, int>(), py::arg("task"), py::arg("soft_token_count"),
             py::arg("embedding_width"))
        .def_property_readonly("lifted_dim", &SyntheticGenerator::lifted_dim)
        .def(
            "generate",
            [](SyntheticGenerator& g, const Vector& lifted) {
                auto out = g.generate(lifted, {});
                return py::make_tuple(out.instruction.text, out.fallback_used);
            },
            py::arg("lifted"))
        .def("encode_tokens", &SyntheticGenerator::encode_tokens, py::arg("tokens"))
        .def("decode", &SyntheticGenerator::decode, py::arg("lifted"));

    m.def(
        "score_synthetic",
        [](const std::string& instruction, const SyntheticTask& task, int validation_size,
           int kappa, const std::string& metric) {
            auto spec = make_task_spec(task, validation_size, kappa, metric_from_name(metric));
            SyntheticPredictor predictor(task);
            auto result = score_instruction(Instruction::from_text(instruction), spec, predictor);
            return py::make_tuple(result.score, result.predictions.texts);
        },
        py::arg("instruction"), py::arg("task"), py::arg("validation_size") = 20,
        py::arg("kappa") = 5, py::arg("metric") = "f1");

    // campaign
    py::class_<CampaignSeeds>(m, "CampaignSeeds")
        .def(py::init<>())
        .def_readwrite("projection", &CampaignSeeds::projection)
        .def_readwrite("search", &CampaignSeeds::search)
        .def_readwrite("synthetic", &CampaignSeeds::synthetic);

    py::class_<CampaignConfig>(m, "CampaignConfig")
        .def(py::init<>())
        .def_readwrite("d", &CampaignConfig::d)
        .def_readwrite("soft_token_count", &CampaignConfig::soft_token_count)
        .def_readwrite("allow_any_token_count", &CampaignConfig::allow_any_token_count)
        .def_readwrite("kappa", &CampaignConfig::kappa)
        .def_readwrite("validation_size", &CampaignConfig::validation_size)
        .def_readwrite("batch_size", &CampaignConfig::batch_size)
        .def_readwrite("max_iterations", &CampaignConfig::max_iterations)
        .def_readwrite("box_half_width", &CampaignConfig::box_half_width)
        .def_readwrite("noise", &CampaignConfig::noise)
        .def_property(
            "kernel_mode",
            [](const CampaignConfig& c) { return kernel_mode_name(c.kernel_mode); },
            [](CampaignConfig& c, const std::string& v) {
                c.kernel_mode = kernel_mode_from_name(v);
            })
        .def_readwrite("lengthscale", &CampaignConfig::lengthscale)
        .def_readwrite("embedding_width", &CampaignConfig::embedding_width)
        .def_readwrite("search_budget", &CampaignConfig::search_budget)
        .def_readwrite("search_population", &CampaignConfig::search_population)
        .def_readwrite("convergence_patience", &CampaignConfig::convergence_patience)
        .def_readwrite("convergence_epsilon", &CampaignConfig::convergence_epsilon)
        .def_readwrite("output_dir", &CampaignConfig::output_dir)
        .def_readwrite("seeds", &CampaignConfig::seeds);

    py::class_<EvalRecord>(m, "EvalRecord")
        .def_readonly("prompt", &EvalRecord::prompt)
        .def_property_readonly("instruction",
                               [](const EvalRecord& r) { return r.instruction.text; })
        .def_readonly("score", &EvalRecord::score)
        .def_readonly("iteration", &EvalRecord::iteration);

    py::class_<IterationStat>(m, "IterationStat")
        .def_readonly("iteration", &IterationStat::iteration)
        .def_readonly("best_so_far", &IterationStat::best_so_far)
        .def_readonly("batch_mean", &IterationStat::batch_mean)
        .def_readonly("top15_mean", &IterationStat::top15_mean);

    py::class_<CampaignResult>(m, "CampaignResult")
        .def_property_readonly("best_instruction",
                               [](const CampaignResult& r) { return r.best_instruction.text; })
        .def_readonly("best_score", &CampaignResult::best_score)
        .def_readonly("records", &CampaignResult::records)
        .def_readonly("stats", &CampaignResult::stats)
        .def_readonly("iterations_completed", &CampaignResult::iterations_completed)
        .def_readonly("converged", &CampaignResult::converged)
        .def_readonly("halted", &CampaignResult::halted)
        .def_readonly("generator_calls", &CampaignResult::generator_calls)
        .def_readonly("predictor_calls", &CampaignResult::predictor_calls);

    m.def(
        "run_synthetic_campaign",
        [](const CampaignConfig& cfg, const SyntheticTask& task, const std::string& metric) {
            auto run = prepare_synthetic(cfg, task, metric);
            return run_campaign(run.cfg, run.spec, *run.generator, *run.predictor,
                                run.budget.get(), run.task);
        },
        py::arg("config"), py::arg("task"), py::arg("metric") = "f1");
    m.def(
        "uniform_synthetic_baseline",
        [](const CampaignConfig& cfg, const SyntheticTask& task, const std::string& metric) {
            auto run = prepare_synthetic(cfg, task, metric);
            return uniform_baseline(run.cfg, run.spec, *run.generator, *run.predictor,
                                    run.budget.get(), run.task);
        },
        py::arg("config"), py::arg("task"), py::arg("metric") = "f1");
    m.def(
        "plant_default_task",
        [](const CampaignConfig& cfg, double noise_level) {
            auto projection = sample_projection(
                cfg.d, cfg.soft_token_count * cfg.embedding_width, cfg.seeds.projection,
                cfg.projection_distribution);
            return plant_synthetic_task(default_vocabulary(), cfg.seeds.synthetic, projection,
                                        cfg.soft_token_count, cfg.embedding_width,
                                        cfg.box_half_width, noise_level);
        },
        py::arg("config"), py::arg("noise_level") = 0.0);
}
