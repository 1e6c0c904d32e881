#include "instrbo/types.hpp"

#include "instrbo/errors.hpp"
#include "instrbo/rng.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace instrbo {

void validate_prompt(const SoftPrompt& p, Eigen::Index d) {
    if (p.size() != d) {
        throw ArgumentError("soft prompt has dimension " + std::to_string(p.size()) +
                            ", expected " + std::to_string(d));
    }
    if (!p.allFinite()) {
        throw ArgumentError("soft prompt contains non-finite coordinates");
    }
}

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

}  // namespace

Instruction Instruction::from_text(const std::string& text) {
    std::string trimmed = trim(text);
    if (trimmed.empty()) {
        throw ArgumentError("instruction text is empty after trimming");
    }
    return Instruction{trimmed, fnv1a64(trimmed)};
}

std::vector<std::string> Instruction::tokens() const { return whitespace_tokens(text); }

std::vector<std::string> whitespace_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::string metric_name(Metric m) {
    switch (m) {
        case Metric::ExactMatch: return "exact_match";
        case Metric::ExactSet: return "exact_set";
        case Metric::Contain: return "contain";
        case Metric::F1: return "f1";
    }
    return "f1";
}

Metric metric_from_name(const std::string& name) {
    if (name == "exact_match" || name == "em") return Metric::ExactMatch;
    if (name == "exact_set" || name == "es") return Metric::ExactSet;
    if (name == "contain") return Metric::Contain;
    if (name == "f1") return Metric::F1;
    throw ConfigError("unknown metric name: " + name);
}

void TaskSpec::validate() const {
    if (exemplars.empty()) throw ConfigError("task has no exemplars");
    if (validation_set.empty()) throw ConfigError("task has an empty validation set");
    for (const auto& ex : exemplars) {
        if (ex.input_text.empty()) throw ConfigError("exemplar with empty input");
    }
}

}  // namespace instrbo
