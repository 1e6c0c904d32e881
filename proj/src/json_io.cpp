#include "json_io.hpp"

#include "instrbo/errors.hpp"

namespace instrbo::detail {

using nlohmann::json;

json config_to_json(const CampaignConfig& c) {
    json j;
    j["d"] = c.d;
    j["soft_token_count"] = c.soft_token_count;
    j["allow_any_token_count"] = c.allow_any_token_count;
    j["kappa"] = c.kappa;
    j["validation_size"] = c.validation_size;
    j["batch_size"] = c.batch_size;
    j["max_iterations"] = c.max_iterations;
    j["box_half_width"] = c.box_half_width;
    j["noise"] = c.noise;
    j["kernel_mode"] = kernel_mode_name(c.kernel_mode);
    j["kernel_family"] = kernel_family_name(c.kernel_family);
    j["lengthscale"] = c.lengthscale;
    j["output_scale"] = c.output_scale;
    j["similarity_metric"] = similarity_metric_name(c.similarity_metric);
    j["projection_distribution"] = distribution_name(c.projection_distribution);
    j["embedding_width"] = c.embedding_width;
    j["search_budget"] = c.search_budget;
    j["search_population"] = c.search_population;
    j["search_sigma0"] = c.search_sigma0;
    j["seed_projection"] = c.seeds.projection;
    j["seed_search"] = c.seeds.search;
    j["seed_synthetic"] = c.seeds.synthetic;
    j["oracle_budget"] = c.oracle_budget ? json(*c.oracle_budget) : json(nullptr);
    j["convergence_patience"] = c.convergence_patience;
    j["convergence_epsilon"] = c.convergence_epsilon;
    j["output_dir"] = c.output_dir;
    j["generator_url"] = c.generator_url;
    j["predictor_url"] = c.predictor_url;
    j["generator_dprime"] = c.generator_dprime;
    j["auth_token"] = c.auth_token;
    j["http_timeout_ms"] = c.http_timeout_ms;
    j["http_max_attempts"] = c.http_max_attempts;
    j["http_backoff_ms"] = c.http_backoff_ms;
    return j;
}

CampaignConfig config_from_json(const json& j) {
    CampaignConfig c;
    c.d = j.value("d", c.d);
    c.soft_token_count = j.value("soft_token_count", c.soft_token_count);
    c.allow_any_token_count = j.value("allow_any_token_count", c.allow_any_token_count);
    c.kappa = j.value("kappa", c.kappa);
    c.validation_size = j.value("validation_size", c.validation_size);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.box_half_width = j.value("box_half_width", c.box_half_width);
    c.noise = j.value("noise", c.noise);
    c.kernel_mode = kernel_mode_from_name(j.value("kernel_mode", "coupled"));
    c.kernel_family = kernel_family_from_name(j.value("kernel_family", "matern52"));
    c.lengthscale = j.value("lengthscale", c.lengthscale);
    c.output_scale = j.value("output_scale", c.output_scale);
    c.similarity_metric = similarity_metric_from_name(j.value("similarity_metric", "f1"));
    c.projection_distribution =
        distribution_from_name(j.value("projection_distribution", "uniform"));
    c.embedding_width = j.value("embedding_width", c.embedding_width);
    c.search_budget = j.value("search_budget", c.search_budget);
    c.search_population = j.value("search_population", c.search_population);
    c.search_sigma0 = j.value("search_sigma0", c.search_sigma0);
    c.seeds.projection = j.value("seed_projection", c.seeds.projection);
    c.seeds.search = j.value("seed_search", c.seeds.search);
    c.seeds.synthetic = j.value("seed_synthetic", c.seeds.synthetic);
    if (j.contains("oracle_budget") && !j["oracle_budget"].is_null()) {
        c.oracle_budget = j["oracle_budget"].get<std::int64_t>();
    }
    c.convergence_patience = j.value("convergence_patience", c.convergence_patience);
    c.convergence_epsilon = j.value("convergence_epsilon", c.convergence_epsilon);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.generator_url = j.value("generator_url", c.generator_url);
    c.predictor_url = j.value("predictor_url", c.predictor_url);
    c.generator_dprime = j.value("generator_dprime", c.generator_dprime);
    c.auth_token = j.value("auth_token", c.auth_token);
    c.http_timeout_ms = j.value("http_timeout_ms", c.http_timeout_ms);
    c.http_max_attempts = j.value("http_max_attempts", c.http_max_attempts);
    c.http_backoff_ms = j.value("http_backoff_ms", c.http_backoff_ms);
    return c;
}

json record_to_json(const EvalRecord& r) {
    json j;
    j["iteration"] = r.iteration;
    j["prompt"] = std::vector<double>(r.prompt.data(), r.prompt.data() + r.prompt.size());
    j["instruction"] = r.instruction.text;
    j["score"] = r.score;
    j["generator_fallback"] = r.generator_fallback;
    j["failed_items"] = r.failed_items;
    return j;
}

EvalRecord record_from_json(const json& j) {
    EvalRecord r;
    auto coords = j.at("prompt").get<std::vector<double>>();
    r.prompt = Eigen::Map<const Vector>(coords.data(), static_cast<Eigen::Index>(coords.size()));
    r.instruction = Instruction::from_text(j.at("instruction").get<std::string>());
    r.score = j.at("score").get<double>();
    r.iteration = j.at("iteration").get<int>();
    r.generator_fallback = j.value("generator_fallback", false);
    r.failed_items = j.value("failed_items", 0);
    return r;
}

json task_to_json(const TaskSpec& t) {
    json j;
    j["metric"] = metric_name(t.metric);
    auto& ex = j["exemplars"] = json::array();
    for (const auto& e : t.exemplars) ex.push_back({e.input_text, e.output_text});
    auto& val = j["validation_set"] = json::array();
    for (const auto& [x, y] : t.validation_set) val.push_back({x, y});
    return j;
}

TaskSpec task_from_json(const json& j) {
    TaskSpec t;
    t.metric = metric_from_name(j.at("metric").get<std::string>());
    for (const auto& e : j.at("exemplars")) {
        t.exemplars.push_back({e.at(0).get<std::string>(), e.at(1).get<std::string>()});
    }
    for (const auto& v : j.at("validation_set")) {
        t.validation_set.emplace_back(v.at(0).get<std::string>(), v.at(1).get<std::string>());
    }
    return t;
}

json synthetic_to_json(const SyntheticTask& t) {
    json j;
    j["vocabulary"] = t.vocabulary;
    j["target_instruction"] = t.target_text();
    j["noise_level"] = t.noise_level;
    j["seed"] = t.seed;
    return j;
}

SyntheticTask synthetic_from_json(const json& j) {
    SyntheticTask t;
    t.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    t.target_tokens = whitespace_tokens(j.at("target_instruction").get<std::string>());
    t.noise_level = j.value("noise_level", 0.0);
    t.seed = j.value("seed", std::uint64_t{0});
    return t;
}

}  // namespace instrbo::detail
