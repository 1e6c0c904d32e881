#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "instrbo/errors.hpp"
#include "instrbo/kernels.hpp"
#include "instrbo/rng.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>

using namespace instrbo;

namespace {

std::vector<SoftPrompt> random_prompts(int m, int d, Rng& rng, double half_width = 1.0) {
    std::vector<SoftPrompt> prompts(m);
    for (auto& p : prompts) {
        p.resize(d);
        for (int i = 0; i < d; ++i) p(i) = rng.uniform(-half_width, half_width);
    }
    return prompts;
}

/// Random PSD matrix with unit diagonal (correlation form).
Matrix random_psd_unit_diag(int m, Rng& rng) {
    Matrix g(m, m + 2);
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m + 2; ++j) g(i, j) = rng.normal();
    }
    Matrix s0 = g * g.transpose();
    Vector inv_sqrt = s0.diagonal().cwiseSqrt().cwiseInverse();
    return inv_sqrt.asDiagonal() * s0 * inv_sqrt.asDiagonal();
}

std::vector<Instruction> dummy_instructions(int m) {
    std::vector<Instruction> out;
    for (int i = 0; i < m; ++i) out.push_back(Instruction::from_text("ins " + std::to_string(i)));
    return out;
}

}  // namespace

TEST_CASE("kernel at zero distance equals the output scale") {
    Rng rng(1);
    auto prompts = random_prompts(1, 6, rng);
    for (auto family : {KernelFamily::Matern52, KernelFamily::SquaredExponential}) {
        LatentKernelSpec spec{family, 1.7, 2.5};
        CHECK(latent_kernel(spec, prompts[0], prompts[0]) == doctest::Approx(2.5));
    }
}

TEST_CASE("squared exponential at unit distance") {
    LatentKernelSpec spec{KernelFamily::SquaredExponential, 1.0, 1.0};
    SoftPrompt p = SoftPrompt::Zero(3);
    SoftPrompt q = SoftPrompt::Zero(3);
    q(0) = 1.0;
    CHECK(latent_kernel(spec, p, q) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK(latent_kernel(spec, p, q) == doctest::Approx(0.6065306597126334).epsilon(1e-12));
}

TEST_CASE("kernel decays monotonically to zero with distance") {
    for (auto family : {KernelFamily::Matern52, KernelFamily::SquaredExponential}) {
        LatentKernelSpec spec{family, 1.0, 1.0};
        SoftPrompt p = SoftPrompt::Zero(2);
        double prev = latent_kernel(spec, p, p);
        for (double dist = 0.5; dist <= 8.0; dist += 0.5) {
            SoftPrompt q = SoftPrompt::Zero(2);
            q(0) = dist;
            double v = latent_kernel(spec, p, q);
            CHECK(v < prev);
            prev = v;
        }
        SoftPrompt far = SoftPrompt::Zero(2);
        far(0) = 40.0;
        CHECK(latent_kernel(spec, p, far) < 1e-8);
    }
}

TEST_CASE("kernel rejects mismatched dimensions") {
    LatentKernelSpec spec;
    CHECK_THROWS_AS(latent_kernel(spec, SoftPrompt::Zero(2), SoftPrompt::Zero(3)),
                    ArgumentError);
}

TEST_CASE("instruction similarity of an instruction with itself is 1") {
    auto v = Instruction::from_text("sort the words");
    auto predictor = [](const Instruction& ins, const std::string& probe) {
        return ins.text + ":" + probe;
    };
    auto r = instruction_similarity(v, v, {"a", "b", "c"}, predictor,
                                    SimilarityMetric::ExactMatch);
    CHECK(r.value == doctest::Approx(1.0));
    CHECK(r.skipped_probes == 0);
}

TEST_CASE("disagreeing predictions give similarity 0 under exact match") {
    auto vi = Instruction::from_text("one");
    auto vj = Instruction::from_text("two");
    auto predictor = [](const Instruction& ins, const std::string& probe) {
        return ins.text + " " + probe;
    };
    auto r = instruction_similarity(vi, vj, {"x", "y"}, predictor,
                                    SimilarityMetric::ExactMatch);
    CHECK(r.value == doctest::Approx(0.0));
}

TEST_CASE("token-F1 similarity on one probe") {
    auto vi = Instruction::from_text("one");
    auto vj = Instruction::from_text("two");
    auto predictor = [](const Instruction& ins, const std::string&) {
        return ins.text == "one" ? "a b c" : "a b d";
    };
    auto r = instruction_similarity(vi, vj, {"x"}, predictor, SimilarityMetric::F1);
    CHECK(r.value == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("failing probes are skipped and counted; all failing is an error") {
    auto vi = Instruction::from_text("one");
    auto vj = Instruction::from_text("two");
    int calls = 0;
    auto flaky = [&](const Instruction& ins, const std::string& probe) -> std::string {
        ++calls;
        if (probe == "bad") throw EvaluationError("probe failed");
        return ins.text;
    };
    auto r = instruction_similarity(vi, vj, {"bad", "good"}, flaky, SimilarityMetric::ExactMatch);
    CHECK(r.skipped_probes == 1);
    CHECK(r.value == doctest::Approx(0.0));

    auto broken = [](const Instruction&, const std::string&) -> std::string {
        throw EvaluationError("down");
    };
    CHECK_THROWS_AS(
        instruction_similarity(vi, vj, {"a", "b"}, broken, SimilarityMetric::ExactMatch),
        EvaluationError);
}

TEST_CASE("prediction_similarity matches instruction_similarity on cached outputs") {
    auto vi = Instruction::from_text("one");
    auto vj = Instruction::from_text("two");
    std::vector<std::string> probes = {"p0", "p1", "p2"};
    auto predictor = [](const Instruction& ins, const std::string& probe) {
        return ins.text + " answer " + probe;
    };
    PredictionSet a, b;
    for (const auto& probe : probes) {
        a.texts.push_back(predictor(vi, probe));
        a.ok.push_back(1);
        b.texts.push_back(predictor(vj, probe));
        b.ok.push_back(1);
    }
    for (auto metric : {SimilarityMetric::ExactMatch, SimilarityMetric::F1}) {
        auto live = instruction_similarity(vi, vj, probes, predictor, metric);
        CHECK(prediction_similarity(a, b, metric) == doctest::Approx(live.value));
    }
}

TEST_CASE("coupled kernel at m=1 reduces to the closed form") {
    Rng rng(5);
    auto prompts = random_prompts(1, 4, rng);
    LatentKernelSpec spec{KernelFamily::Matern52, 2.0, 1.5};
    Matrix s = Matrix::Ones(1, 1);
    auto state = KernelState::build(KernelMode::Coupled, spec, prompts, dummy_instructions(1), s);

    double a = latent_kernel(spec, prompts[0], prompts[0]);
    for (int trial = 0; trial < 10; ++trial) {
        SoftPrompt p = random_prompts(1, 4, rng)[0];
        SoftPrompt q = random_prompts(1, 4, rng)[0];
        double lp = latent_kernel(spec, p, prompts[0]);
        double lq = latent_kernel(spec, q, prompts[0]);
        CHECK(state.kernel_value(p, q) == doctest::Approx(lp * lq * 1.0 / (a * a)).epsilon(1e-10));
        CHECK(state.cross(p)(0) == doctest::Approx(lp / a).epsilon(1e-10));
        CHECK(state.self(p) == doctest::Approx(lp * lp / (a * a)).epsilon(1e-10));
    }
}

TEST_CASE("coupled kernel recovers S on the training prompts") {
    Rng rng(42);
    for (int m = 1; m <= 20; ++m) {
        auto prompts = random_prompts(m, 5, rng);
        Matrix s = random_psd_unit_diag(m, rng);
        auto state = KernelState::build(KernelMode::Coupled, LatentKernelSpec{}, prompts,
                                        dummy_instructions(m), s);
        CHECK((state.k() - s).cwiseAbs().maxCoeff() < 1e-8);
        for (int i = 0; i < m; ++i) {
            Vector row = state.cross(prompts[i]);
            CHECK((row - s.row(i).transpose()).cwiseAbs().maxCoeff() < 1e-8);
        }
    }
}

TEST_CASE("standard mode ignores S and uses the plain latent matrix") {
    Rng rng(7);
    auto prompts = random_prompts(2, 3, rng);
    LatentKernelSpec spec{KernelFamily::Matern52, 1.0, 1.0};
    auto state = KernelState::build(KernelMode::Standard, spec, prompts, {}, Matrix());
    Matrix expected(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            expected(i, j) = latent_kernel(spec, prompts[i], prompts[j]);
        }
    }
    CHECK((state.k() - expected).cwiseAbs().maxCoeff() == 0.0);
    SoftPrompt p = random_prompts(1, 3, rng)[0];
    for (int j = 0; j < 2; ++j) {
        CHECK(state.cross(p)(j) == doctest::Approx(latent_kernel(spec, p, prompts[j])));
    }
    CHECK(state.self(p) == doctest::Approx(spec.output_scale));
}

TEST_CASE("cross kernel vanishes far from the training prompts") {
    Rng rng(9);
    auto prompts = random_prompts(4, 3, rng);
    Matrix s = random_psd_unit_diag(4, rng);
    for (auto mode : {KernelMode::Coupled, KernelMode::Standard}) {
        auto state = KernelState::build(mode, LatentKernelSpec{}, prompts,
                                        dummy_instructions(4), s);
        SoftPrompt far = SoftPrompt::Constant(3, 150.0);
        CHECK(state.cross(far).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("m=2 coupled kernel equals a dense evaluation") {
    Rng rng(13);
    auto prompts = random_prompts(2, 4, rng);
    LatentKernelSpec spec{KernelFamily::SquaredExponential, 1.3, 0.8};
    Matrix s(2, 2);
    s << 1.0, 0.4, 0.4, 1.0;
    auto state = KernelState::build(KernelMode::Coupled, spec, prompts, dummy_instructions(2), s);

    Matrix latent(2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) latent(i, j) = latent_kernel(spec, prompts[i], prompts[j]);
    }
    Matrix warp = latent.inverse() * s * latent.inverse();
    for (int trial = 0; trial < 10; ++trial) {
        SoftPrompt p = random_prompts(1, 4, rng)[0];
        SoftPrompt q = random_prompts(1, 4, rng)[0];
        Vector lp(2), lq(2);
        for (int j = 0; j < 2; ++j) {
            lp(j) = latent_kernel(spec, p, prompts[j]);
            lq(j) = latent_kernel(spec, q, prompts[j]);
        }
        CHECK(state.kernel_value(p, q) == doctest::Approx(lp.dot(warp * lq)).epsilon(1e-10));
        Vector cross = state.cross(p);
        for (int j = 0; j < 2; ++j) {
            Vector lj = latent.col(j);
            CHECK(cross(j) == doctest::Approx(lp.dot(warp * lj)).epsilon(1e-10));
        }
    }
}

TEST_CASE("kernel_value is symmetric in both modes") {
    Rng rng(17);
    auto prompts = random_prompts(5, 3, rng);
    Matrix s = random_psd_unit_diag(5, rng);
    for (auto mode : {KernelMode::Coupled, KernelMode::Standard}) {
        auto state = KernelState::build(mode, LatentKernelSpec{}, prompts,
                                        dummy_instructions(5), s);
        for (int trial = 0; trial < 10; ++trial) {
            SoftPrompt p = random_prompts(1, 3, rng)[0];
            SoftPrompt q = random_prompts(1, 3, rng)[0];
            CHECK(state.kernel_value(p, q) ==
                  doctest::Approx(state.kernel_value(q, p)).epsilon(1e-12));
        }
    }
}

TEST_CASE("similarity input is symmetrized, unit-diagonal and eigenvalue-clipped") {
    Rng rng(23);
    auto prompts = random_prompts(3, 3, rng);
    Matrix s(3, 3);
    s << 0.7, 0.9, -0.8,
         0.1, 1.3, 0.5,
         -0.2, 0.3, 1.0;
    auto state = KernelState::build(KernelMode::Coupled, LatentKernelSpec{}, prompts,
                                    dummy_instructions(3), s);
    CHECK((state.s() - state.s().transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(state.s());
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    // a PSD unit-diagonal input passes through unchanged
    Matrix good = random_psd_unit_diag(3, rng);
    auto clean = KernelState::build(KernelMode::Coupled, LatentKernelSpec{}, prompts,
                                    dummy_instructions(3), good);
    CHECK((clean.s() - good).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(clean.s().diagonal().isApproxToConstant(1.0, 1e-12));
}

TEST_CASE("duplicate prompts engage the latent jitter ladder") {
    Rng rng(31);
    auto prompts = random_prompts(2, 3, rng);
    prompts.push_back(prompts[0]);  // exact duplicate makes L singular
    Matrix s = Matrix::Identity(3, 3);
    auto state = KernelState::build(KernelMode::Coupled, LatentKernelSpec{}, prompts,
                                    dummy_instructions(3), s);
    CHECK(state.latent_jitter() > 0.0);
}

TEST_CASE("build rejects bad shapes") {
    Rng rng(3);
    auto prompts = random_prompts(2, 3, rng);
    CHECK_THROWS_AS(KernelState::build(KernelMode::Coupled, LatentKernelSpec{}, prompts,
                                       dummy_instructions(2), Matrix::Identity(3, 3)),
                    ArgumentError);
    CHECK_THROWS_AS(KernelState::build(KernelMode::Coupled, LatentKernelSpec{}, {},
                                       {}, Matrix()),
                    ArgumentError);
    LatentKernelSpec bad;
    bad.lengthscale = 0.0;
    CHECK_THROWS_AS(KernelState::build(KernelMode::Standard, bad, prompts, {}, Matrix()),
                    ConfigError);
}
