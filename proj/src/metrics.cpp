#include "instrbo/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

namespace instrbo {

std::string normalize_answer(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char raw : s) {
        auto c = static_cast<unsigned char>(raw);
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    static const std::string terminal_punct = ".,;:!?";
    while (!out.empty() &&
           (terminal_punct.find(out.back()) != std::string::npos || out.back() == ' ')) {
        out.pop_back();
    }
    return out;
}

std::vector<std::string> set_tokens(const std::string& s) {
    std::string norm = normalize_answer(s);
    std::vector<std::string> out;
    std::string cur;
    for (char c : norm) {
        if (c == ' ' || c == ',') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

int metric_exact_match(const std::string& pred, const std::string& gold) {
    return normalize_answer(pred) == normalize_answer(gold) ? 1 : 0;
}

int metric_exact_set(const std::string& pred, const std::string& gold) {
    auto p = set_tokens(pred);
    auto g = set_tokens(gold);
    std::set<std::string> ps(p.begin(), p.end());
    std::set<std::string> gs(g.begin(), g.end());
    return ps == gs ? 1 : 0;
}

int metric_contain(const std::string& pred, const std::string& gold) {
    std::string p = normalize_answer(pred);
    std::string g = normalize_answer(gold);
    if (p.empty() || g.empty()) return p == g ? 1 : 0;
    return (p.find(g) != std::string::npos || g.find(p) != std::string::npos) ? 1 : 0;
}

double token_f1(const std::vector<std::string>& pred_tokens,
                const std::vector<std::string>& gold_tokens) {
    if (pred_tokens.empty() || gold_tokens.empty()) return 0.0;
    std::map<std::string, int> gold_counts;
    for (const auto& t : gold_tokens) ++gold_counts[t];
    int common = 0;
    for (const auto& t : pred_tokens) {
        auto it = gold_counts.find(t);
        if (it != gold_counts.end() && it->second > 0) {
            --it->second;
            ++common;
        }
    }
    if (common == 0) return 0.0;
    double precision = static_cast<double>(common) / static_cast<double>(pred_tokens.size());
    double recall = static_cast<double>(common) / static_cast<double>(gold_tokens.size());
    return 2.0 * precision * recall / (precision + recall);
}

double metric_f1(const std::string& pred, const std::string& gold) {
    return token_f1(whitespace_tokens(normalize_answer(pred)),
                    whitespace_tokens(normalize_answer(gold)));
}

double evaluate_metric(Metric m, const std::string& pred, const std::string& gold) {
    switch (m) {
        case Metric::ExactMatch: return metric_exact_match(pred, gold);
        case Metric::ExactSet: return metric_exact_set(pred, gold);
        case Metric::Contain: return metric_contain(pred, gold);
        case Metric::F1: return metric_f1(pred, gold);
    }
    return 0.0;
}

}  // namespace instrbo
