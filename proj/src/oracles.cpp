#include "instrbo/oracles.hpp"

#include "instrbo/errors.hpp"
#include "instrbo/metrics.hpp"
#include "json_io.hpp"

#include <fstream>

namespace instrbo {

void CallBudget::charge(const char* what) {
    if (limit_ && used_ >= *limit_) {
        throw BudgetExhaustedError(std::string("oracle call budget of ") +
                                   std::to_string(*limit_) + " exhausted before " + what);
    }
    ++used_;
}

ScoreResult score_instruction(const Instruction& instruction, const TaskSpec& task,
                              PredictorOracle& predictor) {
    task.validate();
    ScoreResult result;
    const auto n = task.validation_set.size();
    result.predictions.texts.resize(n);
    result.predictions.ok.assign(n, 0);

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& [query, gold] = task.validation_set[i];
        std::string prediction;
        try {
            prediction = predictor.predict(instruction, query);
        } catch (const BudgetExhaustedError&) {
            throw;
        } catch (const Error&) {
            ++result.failed_items;
            continue;  // item counted as 0
        }
        result.predictions.texts[i] = prediction;
        result.predictions.ok[i] = 1;
        sum += evaluate_metric(task.metric, prediction, gold);
    }
    if (result.failed_items == static_cast<int>(n)) {
        throw EvaluationError("predictor failed on every validation item");
    }
    result.score = sum / static_cast<double>(n);
    return result;
}

TaskSpec load_task_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open task data file: " + path);
    TaskSpec task = detail::task_from_json(nlohmann::json::parse(in));
    task.validate();
    return task;
}

void save_task_spec(const TaskSpec& task, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write task data file: " + path);
    out << detail::task_to_json(task).dump(2) << "\n";
}

}  // namespace instrbo
