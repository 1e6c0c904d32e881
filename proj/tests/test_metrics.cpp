#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "instrbo/metrics.hpp"
#include "instrbo/rng.hpp"

using namespace instrbo;

TEST_CASE("normalization trims, folds case, collapses whitespace, strips trailing punctuation") {
    CHECK(normalize_answer("  The   Answer!! ") == "the answer");
    CHECK(normalize_answer("Paris.") == "paris");
    CHECK(normalize_answer("a, b") == "a, b");
    CHECK(normalize_answer("") == "");
}

TEST_CASE("exact match") {
    CHECK(metric_exact_match("Paris", "paris") == 1);
    CHECK(metric_exact_match("Paris", "London") == 0);
    CHECK(metric_exact_match("m a t t e r", "m a t t e r") == 1);
}

TEST_CASE("exact set ignores order and splits on commas") {
    CHECK(metric_exact_set("b a", "a b") == 1);
    CHECK(metric_exact_set("a b", "a b c") == 0);
    CHECK(metric_exact_set("cat, dog", "dog, cat") == 1);
}

TEST_CASE("contain matches substrings either way") {
    CHECK(metric_contain("the word is broke", "broke") == 1);
    CHECK(metric_contain("abc", "xyz") == 0);
    CHECK(metric_contain("4", "answer: 4") == 1);
}

TEST_CASE("token F1") {
    CHECK(metric_f1("a b c", "a b c") == doctest::Approx(1.0));
    CHECK(metric_f1("a b c", "a b d") == doctest::Approx(2.0 / 3.0));
    CHECK(metric_f1("", "a") == doctest::Approx(0.0));
}

TEST_CASE("multiset intersection counts duplicates once per occurrence") {
    // common = {a, a}; precision 2/3, recall 2/2
    CHECK(metric_f1("a a b", "a a") == doctest::Approx(2.0 * (2.0 / 3.0) / (2.0 / 3.0 + 1.0)));
}

TEST_CASE("all metrics stay in [0, 1]; F1 is symmetric; EM(a, a) = 1") {
    const std::vector<std::string> vocab = {"a", "b", "cat", "dog", "sum", "two"};
    Rng rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        auto draw = [&]() {
            std::string s;
            auto len = rng.uniform_int(5);
            for (std::uint64_t i = 0; i < len; ++i) {
                if (!s.empty()) s.push_back(' ');
                s += vocab[rng.uniform_int(vocab.size())];
            }
            return s;
        };
        std::string pred = draw();
        std::string gold = draw();
        for (Metric m : {Metric::ExactMatch, Metric::ExactSet, Metric::Contain, Metric::F1}) {
            double v = evaluate_metric(m, pred, gold);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(metric_f1(pred, gold) == doctest::Approx(metric_f1(gold, pred)));
        if (!normalize_answer(pred).empty()) {
            CHECK(metric_exact_match(pred, pred) == 1);
        }
    }
}
