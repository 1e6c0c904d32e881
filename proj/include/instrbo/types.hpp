#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace instrbo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Point in the d-dimensional latent search space; the optimization variable.
using SoftPrompt = Eigen::VectorXd;

/// Throws ArgumentError unless p has dimension d and all coordinates are finite.
void validate_prompt(const SoftPrompt& p, Eigen::Index d);

/// Discrete instruction: whitespace-tokenized text plus a stable content id.
struct Instruction {
    std::string text;
    std::uint64_t id = 0;

    /// Trims and hashes; throws ArgumentError if the text is empty after trimming.
    static Instruction from_text(const std::string& text);

    std::vector<std::string> tokens() const;

    bool operator==(const Instruction& other) const { return id == other.id && text == other.text; }
};

/// One (input, output) demonstration pair from the target task.
struct Exemplar {
    std::string input_text;
    std::string output_text;
};

enum class Metric { ExactMatch, ExactSet, Contain, F1 };

std::string metric_name(Metric m);
Metric metric_from_name(const std::string& name);

/// Target-task data handed to the scorer oracle.
struct TaskSpec {
    std::vector<Exemplar> exemplars;
    std::vector<std::pair<std::string, std::string>> validation_set;
    Metric metric = Metric::F1;

    void validate() const;
};

/// Per-item predictor outputs, cached so the similarity matrix can reuse them.
struct PredictionSet {
    std::vector<std::string> texts;
    std::vector<std::uint8_t> ok;  // 0 = predictor failed on this item

    std::size_t size() const { return texts.size(); }
};

/// One scored (soft prompt, instruction) pair; the BO training datum.
struct EvalRecord {
    SoftPrompt prompt;
    Instruction instruction;
    double score = 0.0;
    int iteration = 0;
    bool generator_fallback = false;
    int failed_items = 0;
};

std::vector<std::string> whitespace_tokens(const std::string& s);

}  // namespace instrbo
