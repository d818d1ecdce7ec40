import numpy as np
import pytest

from doclayout_tools.distill import (
    FeatureBatch,
    LinearProjection,
    distill_grad,
    distill_loss,
    fit_projection_closed_form,
    fit_projection_gd,
    lipschitz_constant,
    save_loss_trace,
)
from doclayout_tools.errors import Divergence, ShapeMismatch
from oracles import numeric_grad


def naive_loss(t, s, w, b):
    total = 0.0
    for i in range(t.shape[0]):
        for d in range(t.shape[1]):
            pred = b[d] + sum(w[d, p] * s[i, p] for p in range(s.shape[1]))
            total += (t[i, d] - pred) ** 2
    return total / t.shape[0]


def random_problem(rng, b=None, d=None, p=None):
    b = b or int(rng.integers(1, 33))
    d = d or int(rng.integers(1, 17))
    p = p or int(rng.integers(1, 17))
    proj = LinearProjection(rng.normal(size=(d, p)), rng.normal(size=d))
    return rng.normal(size=(b, d)), rng.normal(size=(b, p)), proj


class TestLoss:
    def test_identity_exact_match(self, rng):
        x = rng.normal(size=(5, 4))
        assert distill_loss(x, x, LinearProjection.identity(4)) == 0.0

    def test_scalar_case(self):
        assert distill_loss([[2.0]], [[1.0]], LinearProjection([[1.0]], [0.0])) == 1.0

    def test_matches_double_loop(self, rng):
        for _ in range(5):
            t, s, proj = random_problem(rng, b=2, d=2, p=3)
            assert distill_loss(t, s, proj) == pytest.approx(naive_loss(t, s, proj.weight, proj.bias), rel=1e-12)

    def test_shape_mismatch(self, rng):
        t, s, proj = random_problem(rng, b=4, d=3, p=2)
        with pytest.raises(ShapeMismatch):
            distill_loss(t[:3], s, proj)
        with pytest.raises(ShapeMismatch):
            distill_loss(t, s, LinearProjection(np.zeros((3, 5)), np.zeros(3)))

    def test_nonnegative_and_zero_iff_fit(self, rng):
        t, s, proj = random_problem(rng)
        assert distill_loss(t, s, proj) > 0
        assert distill_loss(proj(s), s, proj) == pytest.approx(0.0, abs=1e-24)

    def test_batch_permutation_invariance(self, rng):
        t, s, proj = random_problem(rng, b=12)
        perm = rng.permutation(12)
        assert distill_loss(t[perm], s[perm], proj) == pytest.approx(distill_loss(t, s, proj), rel=1e-13)
        for g1, g2 in zip(distill_grad(t[perm], s[perm], proj), distill_grad(t, s, proj)):
            np.testing.assert_allclose(g1, g2, rtol=1e-12, atol=1e-14)


class TestGradient:
    def test_scalar_case(self):
        gw, gb = distill_grad([[2.0]], [[1.0]], LinearProjection([[1.0]], [0.0]))
        assert gw.tolist() == [[-2.0]] and gb.tolist() == [-2.0]

    def test_zero_at_exact_fit(self, rng):
        t, s, proj = random_problem(rng)
        gw, gb = distill_grad(proj(s), s, proj)
        assert np.abs(gw).max() < 1e-12 and np.abs(gb).max() < 1e-12

    def test_finite_differences(self, rng):
        t, s, proj = random_problem(rng, b=7, d=3, p=4)
        gw, gb = distill_grad(t, s, proj)
        nw = numeric_grad(lambda w: distill_loss(t, s, LinearProjection(w, proj.bias)), proj.weight)
        nb = numeric_grad(lambda b: distill_loss(t, s, LinearProjection(proj.weight, b)), proj.bias)
        np.testing.assert_allclose(gw, nw, rtol=1e-6, atol=1e-8)
        np.testing.assert_allclose(gb, nb, rtol=1e-6, atol=1e-8)


class TestFitting:
    def test_realizable_gd(self, rng):
        s = rng.normal(size=(40, 5))
        true = LinearProjection(rng.normal(size=(3, 5)), rng.normal(size=3))
        t = true(s)
        proj, trace = fit_projection_gd(t, s, lr=1 / lipschitz_constant(s), epochs=3000)
        assert trace[-1] < 1e-8
        np.testing.assert_allclose(proj.weight, true.weight, atol=1e-4)

    def test_trace_non_increasing_at_safe_step(self, rng):
        t, s, _ = random_problem(rng, b=30, d=4, p=6)
        _, trace = fit_projection_gd(t, s, lr=1 / lipschitz_constant(s), epochs=300)
        assert np.all(np.diff(trace) <= 1e-12 * np.maximum(1.0, trace[:-1]))

    def test_divergence(self, rng):
        t, s, _ = random_problem(rng, b=20, d=3, p=3)
        with pytest.raises(Divergence):
            fit_projection_gd(t, s, lr=1e6, epochs=500)

    def test_bad_arguments(self, rng):
        t, s, _ = random_problem(rng, b=3)
        with pytest.raises(ValueError):
            fit_projection_gd(t, s, lr=0, epochs=5)
        with pytest.raises(ValueError):
            fit_projection_gd(t, s, lr=0.1, epochs=0)

    def test_seeded(self, rng):
        t, s, _ = random_problem(rng, b=10)
        a = fit_projection_gd(t, s, lr=0.01, epochs=5, seed=3)
        b = fit_projection_gd(t, s, lr=0.01, epochs=5, seed=3)
        np.testing.assert_array_equal(a[1], b[1])

    def test_no_bias_flag(self, rng):
        t, s, _ = random_problem(rng, b=25, d=2, p=3)
        proj, _ = fit_projection_gd(t, s, lr=1 / lipschitz_constant(s, use_bias=False), epochs=50, use_bias=False)
        assert np.all(proj.bias == 0)
        closed = fit_projection_closed_form(t, s, use_bias=False)
        assert np.all(closed.bias == 0)

    def test_closed_form_recovers_map(self, rng):
        s = rng.normal(size=(20, 4))
        true = LinearProjection(rng.normal(size=(6, 4)), rng.normal(size=6))
        proj = fit_projection_closed_form(true(s), s)
        assert distill_loss(true(s), s, proj) < 1e-10
        np.testing.assert_allclose(proj.weight, true.weight, atol=1e-6)

    def test_closed_form_single_row(self, rng):
        t, s = rng.normal(size=(1, 3)), rng.normal(size=(1, 5))
        assert distill_loss(t, s, fit_projection_closed_form(t, s)) < 1e-10

    def test_closed_form_beats_random_projections(self, rng):
        t, s, _ = random_problem(rng, b=30, d=3, p=4)
        best = distill_loss(t, s, fit_projection_closed_form(t, s))
        for _ in range(100):
            _, _, other = random_problem(rng, d=3, p=4)
            assert best <= distill_loss(t, s, other)


def test_feature_batch(tmp_path, rng):
    with pytest.raises(ShapeMismatch):
        FeatureBatch(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        FeatureBatch([[1.0, np.nan]])
    batch = FeatureBatch(rng.normal(size=(4, 3)))
    assert (batch.batch_size, batch.dim) == (4, 3)
    batch.to_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(FeatureBatch.from_csv(tmp_path / "f.csv").data, batch.data)
    with pytest.raises(ValueError):
        batch.data[0, 0] = 1.0


def test_loss_trace_csv(tmp_path):
    save_loss_trace(np.array([2.0, 1.0]), tmp_path / "trace.csv")
    assert (tmp_path / "trace.csv").read_text() == "epoch,loss\n1,2.0\n2,1.0\n"
