#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "instrbo/acquisition.hpp"
#include "instrbo/errors.hpp"
#include "instrbo/rng.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

using namespace instrbo;

namespace {

std::vector<SoftPrompt> random_prompts(int m, int d, Rng& rng) {
    std::vector<SoftPrompt> prompts(m);
    for (auto& p : prompts) {
        p.resize(d);
        for (int i = 0; i < d; ++i) p(i) = rng.uniform(-1, 1);
    }
    return prompts;
}

std::vector<EvalRecord> make_records(const std::vector<SoftPrompt>& prompts,
                                     const std::vector<double>& scores) {
    std::vector<EvalRecord> records;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        records.push_back({prompts[i], Instruction::from_text("i" + std::to_string(i)),
                           scores[i], 1, false, 0});
    }
    return records;
}

/// Monte-Carlo estimate of E[max(0, H - incumbent)] with H ~ N(mean, variance).
std::pair<double, double> mc_improvement(double mean, double sigma, double incumbent,
                                         int samples, std::uint64_t seed) {
    Rng rng(seed);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int i = 0; i < samples; ++i) {
        double v = std::max(0.0, mean + sigma * rng.normal() - incumbent);
        sum += v;
        sum_sq += v * v;
    }
    double estimate = sum / samples;
    double var = std::max(0.0, sum_sq / samples - estimate * estimate);
    return {estimate, std::sqrt(var / samples)};
}

}  // namespace

TEST_CASE("degenerate sigma branch") {
    CHECK(expected_improvement(0.3, 0.0, 0.5) == doctest::Approx(0.0));
    CHECK(expected_improvement(1.5, 0.0, 0.5) == doctest::Approx(1.0));
}

TEST_CASE("closed form matches a large Monte-Carlo estimate at mean == incumbent") {
    double closed = expected_improvement(0.0, 1.0, 0.0);
    CHECK(closed == doctest::Approx(0.3989422804014327).epsilon(1e-12));
    auto [estimate, se] = mc_improvement(0.0, 1.0, 0.0, 1000000, 123);
    CHECK(std::abs(closed - estimate) < 3e-3);
    CHECK(std::abs(closed - estimate) < 3.0 * se + 1e-12);
}

TEST_CASE("closed form tracks Monte-Carlo across a (delta, sigma) grid") {
    std::uint64_t seed = 1000;
    for (double delta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        for (double sigma : {0.1, 1.0, 3.0}) {
            double closed = expected_improvement(delta, sigma * sigma, 0.0);
            auto [estimate, se] = mc_improvement(delta, sigma, 0.0, 200000, seed++);
            CHECK(std::abs(closed - estimate) <= 3.0 * se + 1e-12);
        }
    }
}

TEST_CASE("EI is nonnegative and monotone in mean and spread") {
    Rng rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        double mu = rng.uniform(-2, 2);
        double sigma = rng.uniform(0, 3);
        double b = rng.uniform(-2, 2);
        double ei = expected_improvement(mu, sigma * sigma, b);
        CHECK(ei >= 0.0);
        CHECK(expected_improvement(mu + 0.5, sigma * sigma, b) >= ei - 1e-14);
        if (mu <= b) {
            CHECK(expected_improvement(mu, (sigma + 0.5) * (sigma + 0.5), b) >= ei - 1e-14);
        }
    }
}

TEST_CASE("EI vanishes at a noiseless incumbent training point") {
    Rng rng(3);
    auto prompts = random_prompts(5, 3, rng);
    auto state = std::make_shared<KernelState>(KernelState::build(
        KernelMode::Standard, LatentKernelSpec{}, prompts, {}, Matrix()));
    auto gp = GaussianPosterior::fit(make_records(prompts, {0.1, 0.8, 0.3, 0.2, 0.4}),
                                     state, 0.0);
    auto ctx = AcquisitionContext::from(gp, 1);
    CHECK(ctx.incumbent == doctest::Approx(0.8));
    CHECK(expected_improvement(ctx, prompts[1]) <= 1e-6);
}

TEST_CASE("select_batch returns everything EI-sorted when k equals the pool") {
    Rng rng(5);
    auto prompts = random_prompts(6, 3, rng);
    auto state = std::make_shared<KernelState>(KernelState::build(
        KernelMode::Standard, LatentKernelSpec{}, prompts, {}, Matrix()));
    auto gp = GaussianPosterior::fit(
        make_records(prompts, {0.2, 0.9, 0.1, 0.5, 0.3, 0.7}), state, 1e-3);
    auto ctx = AcquisitionContext::from(gp, 6);

    auto candidates = random_prompts(10, 3, rng);
    auto batch = select_batch(ctx, candidates, 10);
    REQUIRE(batch.size() == 10);
    for (std::size_t i = 1; i < batch.size(); ++i) {
        CHECK(expected_improvement(ctx, batch[i - 1]) >=
              expected_improvement(ctx, batch[i]) - 1e-14);
    }
}

TEST_CASE("ties break toward earlier candidates") {
    Rng rng(6);
    auto prompts = random_prompts(2, 3, rng);
    auto state = std::make_shared<KernelState>(KernelState::build(
        KernelMode::Standard, LatentKernelSpec{}, prompts, {}, Matrix()));
    auto gp = GaussianPosterior::fit(make_records(prompts, {0.4, 0.6}), state, 1e-3);
    auto ctx = AcquisitionContext::from(gp, 2);

    SoftPrompt same = SoftPrompt::Constant(3, 0.25);
    std::vector<SoftPrompt> candidates(5, same);
    auto batch = select_batch(ctx, candidates, 3);
    REQUIRE(batch.size() == 3);
    for (const auto& b : batch) CHECK((b.array() == same.array()).all());
}

TEST_CASE("top-25 of 100 random candidates matches a full-sort oracle") {
    Rng rng(7);
    auto prompts = random_prompts(8, 4, rng);
    std::vector<double> scores(8);
    for (auto& s : scores) s = rng.uniform01();
    auto state = std::make_shared<KernelState>(KernelState::build(
        KernelMode::Standard, LatentKernelSpec{}, prompts, {}, Matrix()));
    auto gp = GaussianPosterior::fit(make_records(prompts, scores), state, 1e-3);
    auto ctx = AcquisitionContext::from(gp, 25);

    auto candidates = random_prompts(100, 4, rng);
    auto batch = select_batch(ctx, candidates, 25);

    std::vector<double> ei(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ei[i] = expected_improvement(ctx, candidates[i]);
    }
    std::vector<std::size_t> order(candidates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return ei[a] > ei[b]; });
    REQUIRE(batch.size() == 25);
    for (int i = 0; i < 25; ++i) {
        CHECK((batch[i].array() == candidates[order[i]].array()).all());
    }
}

TEST_CASE("select_batch argument validation") {
    Rng rng(8);
    auto prompts = random_prompts(2, 3, rng);
    auto state = std::make_shared<KernelState>(KernelState::build(
        KernelMode::Standard, LatentKernelSpec{}, prompts, {}, Matrix()));
    auto gp = GaussianPosterior::fit(make_records(prompts, {0.4, 0.6}), state, 1e-3);
    auto ctx = AcquisitionContext::from(gp, 2);
    auto candidates = random_prompts(3, 3, rng);
    CHECK_THROWS_AS(select_batch(ctx, candidates, 4), ArgumentError);
    CHECK_THROWS_AS(select_batch(ctx, {}, 1), ArgumentError);
    CHECK_THROWS_AS(select_batch(ctx, candidates, 0), ArgumentError);
}
