"""Smoke tests for the python bindings: one pass over each exposed operation."""

import math

import numpy as np
import pytest

import instrbo


def test_projection_roundtrip_and_determinism():
    a = instrbo.sample_projection(4, 32, seed=7)
    b = instrbo.sample_projection(4, 32, seed=7)
    assert a.d == 4 and a.d_prime == 32
    assert np.array_equal(a.entries, b.entries)
    assert np.abs(a.entries).max() <= 1.0

    p = np.array([1.0, -0.5, 0.25, 0.0])
    lifted = instrbo.project(a, p)
    assert lifted.shape == (32,)
    assert np.allclose(lifted, a.entries.T @ p)

    with pytest.raises(instrbo.EngineError):
        instrbo.sample_projection(10, 5, seed=0)


def test_distortion_report():
    a = instrbo.sample_projection(6, 512, seed=3)
    points = [np.random.RandomState(i).uniform(-1, 1, 6) for i in range(12)]
    report = instrbo.jl_distortion_report(a, points)
    assert report.pair_count == 66
    assert report.mean_relative < 0.3


def test_metrics():
    assert instrbo.metric_exact_match("Paris", "paris") == 1
    assert instrbo.metric_exact_set("cat, dog", "dog, cat") == 1
    assert instrbo.metric_contain("the word is broke", "broke") == 1
    assert instrbo.metric_f1("a b c", "a b d") == pytest.approx(2 / 3)
    assert instrbo.normalize_answer("  The Answer!! ") == "the answer"


def test_kernel_state_recovery():
    rng = np.random.RandomState(0)
    prompts = [rng.uniform(-1, 1, 3) for _ in range(5)]
    g = rng.normal(size=(5, 7))
    s0 = g @ g.T
    d = np.diag(1.0 / np.sqrt(np.diag(s0)))
    s = d @ s0 @ d

    spec = instrbo.LatentKernelSpec("matern52", lengthscale=math.sqrt(3), output_scale=1.0)
    state = instrbo.build_kernel_state(
        "coupled", spec, prompts, [f"ins {i}" for i in range(5)], s
    )
    assert np.allclose(state.k, s, atol=1e-8)
    for i, p in enumerate(prompts):
        assert np.allclose(state.cross(p), s[i], atol=1e-8)


def test_gp_and_ei():
    rng = np.random.RandomState(1)
    prompts = [rng.uniform(-1, 1, 3) for _ in range(4)]
    scores = [0.2, 0.8, 0.5, 0.4]
    spec = instrbo.LatentKernelSpec("matern52", lengthscale=math.sqrt(3), output_scale=1.0)
    state = instrbo.build_kernel_state("standard", spec, prompts)
    gp = instrbo.fit_gp(state, scores, noise=0.0)
    assert gp.mean(prompts[1]) == pytest.approx(0.8, abs=1e-6)
    assert gp.variance(prompts[1]) <= 1e-6
    assert gp.incumbent == pytest.approx(0.8)

    assert instrbo.expected_improvement(0.0, 1.0, 0.0) == pytest.approx(
        1 / math.sqrt(2 * math.pi), abs=1e-12
    )
    assert instrbo.expected_improvement_at(gp, prompts[1]) <= 1e-6

    candidates = [rng.uniform(-1, 1, 3) for _ in range(20)]
    batch = instrbo.select_batch(gp, candidates, 5)
    assert len(batch) == 5
    eis = [instrbo.expected_improvement_at(gp, p) for p in batch]
    assert eis == sorted(eis, reverse=True)


def test_cmaes_sphere():
    cfg = instrbo.SearchConfig()
    cfg.dimension = 6
    cfg.lower, cfg.upper = -1.0, 1.0
    cfg.max_evaluations = 3000
    cfg.seed = 5

    center = np.full(6, 0.3)
    result = instrbo.maximize(lambda p: -float(np.sum((p - center) ** 2)), cfg)
    assert np.linalg.norm(result.best_point - center) < 1e-2

    points = instrbo.propose_candidates(lambda p: -float(np.sum(p**2)), cfg, 10)
    assert len(points) == 10
    for p in points:
        assert np.all(p >= -1.0) and np.all(p <= 1.0)


def test_synthetic_oracles():
    cfg = instrbo.CampaignConfig()
    cfg.d = 4
    cfg.soft_token_count = 3
    cfg.embedding_width = 6
    task = instrbo.plant_default_task(cfg)
    assert len(task.target_tokens) == 3

    gen = instrbo.SyntheticGenerator(task, 3, 6)
    lifted = gen.encode_tokens(task.target_tokens)
    text, fallback = gen.generate(lifted)
    assert text == " ".join(task.target_tokens)
    assert not fallback

    score, predictions = instrbo.score_synthetic(task.target_text, task, 10, 2)
    assert score == pytest.approx(1.0)
    assert len(predictions) == 10

    out = instrbo.synthetic_predict(task.target_text, "query-0", task)
    assert out == instrbo.synthetic_predict(task.target_text, "query-0", task)


def test_tiny_campaign_runs_and_replays():
    cfg = instrbo.CampaignConfig()
    cfg.d = 4
    cfg.soft_token_count = 3
    cfg.embedding_width = 6
    cfg.batch_size = 5
    cfg.max_iterations = 2
    cfg.validation_size = 6
    cfg.kappa = 2
    cfg.search_budget = 120
    cfg.search_population = 8
    cfg.convergence_epsilon = 0.0

    task = instrbo.plant_default_task(cfg)
    first = instrbo.run_synthetic_campaign(cfg, task)
    second = instrbo.run_synthetic_campaign(cfg, task)
    assert 5 <= len(first.records) <= 10
    assert first.best_score == second.best_score
    assert [r.instruction for r in first.records] == [r.instruction for r in second.records]
    assert first.best_score == max(r.score for r in first.records)
    best = [s.best_so_far for s in first.stats]
    assert best == sorted(best)

    baseline = instrbo.uniform_synthetic_baseline(cfg, task)
    assert len(baseline.records) == 10
    np.testing.assert_array_equal(baseline.records[0].prompt, first.records[0].prompt)
