#include "instrbo/synthetic.hpp"

#include "instrbo/errors.hpp"
#include "instrbo/metrics.hpp"
#include "instrbo/rng.hpp"
#include "json_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace instrbo {

using nlohmann::json;

std::string SyntheticTask::target_text() const {
    std::string out;
    for (const auto& t : target_tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

void SyntheticTask::validate() const {
    if (vocabulary.empty()) throw ConfigError("synthetic task has an empty vocabulary");
    std::set<std::string> vocab(vocabulary.begin(), vocabulary.end());
    for (const auto& t : target_tokens) {
        if (!vocab.count(t)) {
            throw ConfigError("target token '" + t + "' is not in the vocabulary");
        }
    }
    if (noise_level < 0.0 || noise_level >= 0.5) {
        throw ConfigError("noise_level must be in [0, 0.5)");
    }
}

SyntheticTask load_synthetic_task(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open synthetic task file: " + path);
    SyntheticTask task = detail::synthetic_from_json(json::parse(in));
    task.validate();
    return task;
}

void save_synthetic_task(const SyntheticTask& task, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write synthetic task file: " + path);
    out << detail::synthetic_to_json(task).dump(2) << "\n";
}

const std::vector<std::string>& default_vocabulary() {
    static const std::vector<std::string> vocab = {
        "find",   "the",    "sum",    "of",       "two",     "numbers", "sort",
        "words",  "list",   "output", "input",    "first",   "letter",  "each",
        "word",   "animal", "larger", "opposite", "plural",  "count",   "objects",
        "answer", "make",   "order",  "translate", "french",  "german",  "spanish",
        "number", "letters", "difference", "between"};
    return vocab;
}

Matrix token_embeddings(const SyntheticTask& task, int embedding_width) {
    if (embedding_width < 1) throw ConfigError("embedding width must be >= 1");
    const auto v = static_cast<Eigen::Index>(task.vocabulary.size());
    Matrix emb(v, embedding_width);
    Rng rng(mix_seed(task.seed, fnv1a64("token-embeddings")));
    for (Eigen::Index i = 0; i < v; ++i) {
        for (int j = 0; j < embedding_width; ++j) emb(i, j) = rng.normal();
        double norm = emb.row(i).norm();
        if (norm > 0.0) emb.row(i) /= norm;
    }
    return emb;
}

namespace {

/// Nearest-vocabulary decode per soft-token slot; cosine distance, ties to
/// the lowest token index.
std::vector<std::string> decode_rows(const Matrix& embeddings,
                                     const std::vector<std::string>& vocabulary,
                                     const Vector& lifted, int soft_token_count,
                                     int embedding_width) {
    std::vector<std::string> tokens;
    tokens.reserve(soft_token_count);
    for (int t = 0; t < soft_token_count; ++t) {
        Vector row = lifted.segment(static_cast<Eigen::Index>(t) * embedding_width,
                                    embedding_width);
        double row_norm = row.norm();
        int best = 0;
        double best_sim = -2.0;
        for (Eigen::Index v = 0; v < embeddings.rows(); ++v) {
            double sim = row_norm > 0.0 ? embeddings.row(v).dot(row) / row_norm : 0.0;
            if (sim > best_sim) {
                best_sim = sim;
                best = static_cast<int>(v);
            }
        }
        tokens.push_back(vocabulary[best]);
    }
    return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
        if (!out.empty()) out.push_back(' ');
        out += t;
    }
    return out;
}

}  // namespace

std::vector<std::string> synthetic_gold_tokens(const SyntheticTask& task,
                                               const std::string& query) {
    Rng rng(mix_seed(mix_seed(task.seed, fnv1a64("gold")), fnv1a64(query)));
    const auto n = 3 + static_cast<int>(rng.uniform_int(4));  // 3..6 tokens
    std::vector<std::string> tokens;
    tokens.reserve(n);
    for (int i = 0; i < n; ++i) {
        tokens.push_back(task.vocabulary[rng.uniform_int(task.vocabulary.size())]);
    }
    return tokens;
}

std::string synthetic_predict(const Instruction& instruction, const std::string& query,
                              const SyntheticTask& task) {
    std::vector<std::string> gold = synthetic_gold_tokens(task, query);
    double agreement = token_f1(whitespace_tokens(normalize_answer(instruction.text)),
                                whitespace_tokens(normalize_answer(task.target_text())));
    const auto n = static_cast<int>(gold.size());
    const auto correct = static_cast<int>(std::lround(agreement * n));

    std::vector<std::string> out;
    out.reserve(n);
    for (int i = 0; i < correct; ++i) out.push_back(gold[i]);
    // Wrong tokens are keyed by (instruction, query, slot): different bad
    // instructions disagree with the gold answer in different ways, so
    // prediction similarity carries signal instead of lumping all failures
    // together. '#' keeps them off the vocabulary and out of any gold answer.
    std::uint64_t wrong_key = mix_seed(fnv1a64(instruction.text), fnv1a64(query));
    for (int i = correct; i < n; ++i) {
        out.push_back("#" + std::to_string(splitmix64(wrong_key + i) % 100000));
    }

    if (task.noise_level > 0.0) {
        Rng rng(mix_seed(mix_seed(task.seed, fnv1a64(instruction.text)), fnv1a64(query)));
        for (auto& token : out) {
            if (rng.uniform01() < task.noise_level) {
                token = task.vocabulary[rng.uniform_int(task.vocabulary.size())];
            }
        }
    }
    return join_tokens(out);
}

TaskSpec make_task_spec(const SyntheticTask& task, int validation_size, int kappa,
                        Metric metric) {
    if (validation_size < 1) throw ConfigError("validation_size must be >= 1");
    if (kappa < 1) throw ConfigError("kappa must be >= 1");
    TaskSpec spec;
    spec.metric = metric;
    for (int i = 0; i < kappa; ++i) {
        std::string x = "example-" + std::to_string(i);
        spec.exemplars.push_back({x, join_tokens(synthetic_gold_tokens(task, x))});
    }
    for (int i = 0; i < validation_size; ++i) {
        std::string x = "query-" + std::to_string(i);
        spec.validation_set.emplace_back(x, join_tokens(synthetic_gold_tokens(task, x)));
    }
    return spec;
}

SyntheticGenerator::SyntheticGenerator(SyntheticTask task, int soft_token_count,
                                       int embedding_width)
    : task_(std::move(task)),
      soft_token_count_(soft_token_count),
      embedding_width_(embedding_width) {
    task_.validate();
    if (soft_token_count_ < 1) throw ConfigError("soft token count must be >= 1");
    embeddings_ = token_embeddings(task_, embedding_width_);
}

GeneratedInstruction SyntheticGenerator::generate(const Vector& lifted,
                                                  const std::vector<Exemplar>&) {
    if (lifted.size() != lifted_dim()) {
        throw ArgumentError("lifted prompt has length " + std::to_string(lifted.size()) +
                            ", generator expects " + std::to_string(lifted_dim()));
    }
    auto tokens = decode_rows(embeddings_, task_.vocabulary, lifted, soft_token_count_,
                              embedding_width_);
    return {Instruction::from_text(join_tokens(tokens)), false};
}

Vector SyntheticGenerator::encode_tokens(const std::vector<std::string>& tokens) const {
    if (static_cast<int>(tokens.size()) != soft_token_count_) {
        throw ArgumentError("token count does not match the soft-token slot count");
    }
    Vector lifted(lifted_dim());
    for (int t = 0; t < soft_token_count_; ++t) {
        auto it = std::find(task_.vocabulary.begin(), task_.vocabulary.end(), tokens[t]);
        if (it == task_.vocabulary.end()) {
            throw ArgumentError("token '" + tokens[t] + "' is not in the vocabulary");
        }
        auto idx = static_cast<Eigen::Index>(it - task_.vocabulary.begin());
        lifted.segment(static_cast<Eigen::Index>(t) * embedding_width_, embedding_width_) =
            embeddings_.row(idx);
    }
    return lifted;
}

std::vector<std::string> SyntheticGenerator::decode(const Vector& lifted) const {
    return decode_rows(embeddings_, task_.vocabulary, lifted, soft_token_count_,
                       embedding_width_);
}

SyntheticPredictor::SyntheticPredictor(SyntheticTask task, CallBudget* budget)
    : task_(std::move(task)), budget_(budget) {
    task_.validate();
}

std::string SyntheticPredictor::predict(const Instruction& instruction,
                                        const std::string& query) {
    if (budget_) budget_->charge("synthetic predict");
    return synthetic_predict(instruction, query, task_);
}

SyntheticTask plant_synthetic_task(std::vector<std::string> vocabulary, std::uint64_t task_seed,
                                   const ProjectionMatrix& projection, int soft_token_count,
                                   int embedding_width, double box_half_width,
                                   double noise_level) {
    SyntheticTask task;
    task.vocabulary = std::move(vocabulary);
    task.noise_level = noise_level;
    task.seed = task_seed;
    if (task.vocabulary.empty()) throw ConfigError("synthetic task has an empty vocabulary");

    Matrix embeddings = token_embeddings(task, embedding_width);
    Rng rng(mix_seed(task_seed, fnv1a64("planted-optimum")));
    SoftPrompt planted(projection.rows());
    for (Eigen::Index i = 0; i < planted.size(); ++i) {
        planted(i) = rng.uniform(-box_half_width, box_half_width);
    }
    task.target_tokens = decode_rows(embeddings, task.vocabulary, project(projection, planted),
                                     soft_token_count, embedding_width);
    task.validate();
    return task;
}

}  // namespace instrbo
