#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "instrbo/errors.hpp"
#include "instrbo/projection.hpp"
#include "instrbo/rng.hpp"

#include <cmath>

using namespace instrbo;

namespace {

SoftPrompt make_prompt(std::initializer_list<double> values) {
    SoftPrompt p(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double v : values) p(i++) = v;
    return p;
}

std::vector<SoftPrompt> random_points(int n, int d, std::uint64_t seed, double half_width) {
    Rng rng(seed);
    std::vector<SoftPrompt> points(n);
    for (auto& p : points) {
        p.resize(d);
        for (int i = 0; i < d; ++i) p(i) = rng.uniform(-half_width, half_width);
    }
    return points;
}

}  // namespace

TEST_CASE("sampled entries stay in [-1, 1] at paper-scale dimensions") {
    auto A = sample_projection(10, 5120, 7);
    CHECK(A.rows() == 10);
    CHECK(A.cols() == 5120);
    CHECK(A.entries.minCoeff() >= -1.0);
    CHECK(A.entries.maxCoeff() <= 1.0);
}

TEST_CASE("same seed reproduces the matrix exactly") {
    auto a = sample_projection(1, 1, 0);
    auto b = sample_projection(1, 1, 0);
    CHECK(a.entries(0, 0) == b.entries(0, 0));

    auto big_a = sample_projection(6, 40, 12345);
    auto big_b = sample_projection(6, 40, 12345);
    CHECK((big_a.entries.array() == big_b.entries.array()).all());
}

TEST_CASE("empirical mean of uniform entries is near zero") {
    auto A = sample_projection(2, 100, 3);
    double mean = A.entries.mean();
    CHECK(mean > -0.1);
    CHECK(mean < 0.1);
}

TEST_CASE("normal distribution switch produces entries outside [-1, 1]") {
    auto A = sample_projection(4, 200, 11, ProjectionDistribution::Normal);
    CHECK(A.entries.cwiseAbs().maxCoeff() > 1.0);
    auto B = sample_projection(4, 200, 11, ProjectionDistribution::Normal);
    CHECK((A.entries.array() == B.entries.array()).all());
}

TEST_CASE("rejects a shrinking projection") {
    CHECK_THROWS_AS(sample_projection(10, 5, 0), ConfigError);
    CHECK_THROWS_AS(sample_projection(0, 5, 0), ConfigError);
}

TEST_CASE("project: identity rows pass the prompt through") {
    ProjectionMatrix A;
    A.entries = Matrix::Identity(2, 2);
    CHECK(project(A, make_prompt({3, 4})) == make_prompt({3, 4}));
}

TEST_CASE("project: zero prompt maps to the zero vector") {
    auto A = sample_projection(3, 17, 5);
    CHECK(project(A, SoftPrompt::Zero(3)).isZero(0.0));
}

TEST_CASE("project: hand-computed 2x3 product") {
    ProjectionMatrix A;
    A.entries.resize(2, 3);
    A.entries << 1, 1, 1, 2, 0, -1;
    Vector lifted = project(A, make_prompt({1, 2}));
    CHECK(lifted(0) == 5.0);
    CHECK(lifted(1) == 1.0);
    CHECK(lifted(2) == -1.0);
}

TEST_CASE("project rejects mismatched dimensions") {
    auto A = sample_projection(3, 8, 1);
    CHECK_THROWS_AS(project(A, SoftPrompt::Zero(4)), ArgumentError);
}

TEST_CASE("projection is linear") {
    auto A = sample_projection(4, 20, 9);
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        SoftPrompt p(4), q(4);
        for (int i = 0; i < 4; ++i) {
            p(i) = rng.uniform(-2, 2);
            q(i) = rng.uniform(-2, 2);
        }
        double alpha = rng.uniform(-3, 3);
        double beta = rng.uniform(-3, 3);
        Vector combined = project(A, alpha * p + beta * q);
        Vector split = alpha * project(A, p) + beta * project(A, q);
        CHECK((combined - split).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("distortion report skips identical points") {
    auto A = sample_projection(3, 9, 2);
    auto p = make_prompt({1, 2, 3});
    auto report = jl_distortion_report(A, {p, p});
    CHECK(report.skipped_pairs == 1);
    CHECK(report.pair_count == 0);
    CHECK(report.max_relative == 0.0);
}

TEST_CASE("random lift keeps pairwise distances within modest distortion") {
    auto A = sample_projection(10, 2048, 21);
    auto report = jl_distortion_report(A, random_points(20, 10, 4, 1.0));
    CHECK(report.pair_count == 190);
    CHECK(report.mean_relative < 0.15);
    // the fitted scale lands near the sqrt(3 / d') of a uniform [-1, 1] lift
    CHECK(report.scale == doctest::Approx(std::sqrt(3.0 / 2048)).epsilon(0.2));
}

TEST_CASE("single pair: max distortion equals mean distortion") {
    auto A = sample_projection(5, 64, 8);
    auto report = jl_distortion_report(A, random_points(2, 5, 10, 1.0));
    CHECK(report.pair_count == 1);
    CHECK(report.max_relative == doctest::Approx(report.mean_relative).epsilon(1e-15));
}

TEST_CASE("distortion report needs two points") {
    auto A = sample_projection(3, 9, 2);
    CHECK_THROWS_AS(jl_distortion_report(A, {make_prompt({1, 2, 3})}), ArgumentError);
}
