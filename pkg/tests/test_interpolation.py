"""Linear and spherical interpolation geometry."""

import numpy as np
import pytest

from lyrivid.audio.beats import BeatEnvelope
from lyrivid.backend import StubBackend
from lyrivid.errors import BackendError, ShapeError
from lyrivid.interpolation import build_plan, lerp_embeddings, noise_seed, slerp_noise
from lyrivid.prompts import Prompt


def unit(rng, dim):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


# -- lerp ----------------------------------------------------------------------


def test_lerp_endpoints_exact():
    e_i = np.array([1.0, -2.0, 3.0])
    e_j = np.array([4.0, 0.0, -1.0])
    assert np.array_equal(lerp_embeddings(e_i, e_j, 0.0), e_i)
    assert np.array_equal(lerp_embeddings(e_i, e_j, 1.0), e_j)


def test_lerp_midpoint():
    assert np.allclose(lerp_embeddings(np.zeros(2), np.array([2.0, 4.0]), 0.5), [1.0, 2.0],
                       atol=1e-15)


def test_lerp_quarter_point():
    assert lerp_embeddings(np.array([1.0]), np.array([5.0]), 0.25)[0] == pytest.approx(2.0, abs=1e-12)


def test_lerp_affine_identity():
    rng = np.random.RandomState(0)
    e_i, e_j = rng.standard_normal(64), rng.standard_normal(64)
    for w in np.linspace(0, 1, 11):
        lhs = lerp_embeddings(e_i, e_j, w) - e_i
        assert np.allclose(lhs, w * (e_j - e_i), atol=1e-12)


def test_lerp_dimension_mismatch():
    with pytest.raises(ShapeError):
        lerp_embeddings(np.zeros(3), np.zeros(4), 0.5)


# -- slerp -----------------------------------------------------------------------


def test_slerp_endpoints():
    rng = np.random.RandomState(1)
    n_i, n_j = rng.standard_normal((4, 8, 8)), rng.standard_normal((4, 8, 8))
    assert np.allclose(slerp_noise(n_i, n_j, 0.0), n_i, atol=1e-12)
    assert np.allclose(slerp_noise(n_i, n_j, 1.0), n_j, atol=1e-12)


def test_slerp_orthonormal_midpoint():
    n_i = np.array([1.0, 0.0])
    n_j = np.array([0.0, 1.0])
    mid = slerp_noise(n_i, n_j, 0.5)
    assert np.allclose(mid, (n_i + n_j) / np.sqrt(2), atol=1e-9)
    assert np.linalg.norm(mid) == pytest.approx(1.0, abs=1e-12)


def test_slerp_identical_inputs_fall_back():
    rng = np.random.RandomState(2)
    n = rng.standard_normal((4, 4))
    for w in (0.0, 0.3, 1.0):
        assert np.allclose(slerp_noise(n, n, w), n, atol=1e-12)


def test_slerp_antiparallel_fallback_stays_finite():
    n = np.array([2.0, 0.0])
    out = slerp_noise(n, -n, 0.5)
    assert np.all(np.isfinite(out))
    assert np.linalg.norm(out) == pytest.approx(2.0, rel=1e-6)  # lerped magnitude


def test_slerp_unit_norm_preserved():
    rng = np.random.RandomState(3)
    for dim in (2, 16, 256, 4096):
        for _ in range(20):
            n_i, n_j = unit(rng, dim), unit(rng, dim)
            for w in np.arange(0.0, 1.01, 0.1):
                out = slerp_noise(n_i, n_j, w)
                assert abs(np.linalg.norm(out) - 1.0) < 1e-6


def test_slerp_stays_in_span():
    rng = np.random.RandomState(4)
    n_i, n_j = rng.standard_normal(32), rng.standard_normal(32)
    basis = np.linalg.qr(np.stack([n_i, n_j], axis=1))[0]
    for w in np.linspace(0, 1, 7):
        out = slerp_noise(n_i, n_j, w)
        residual = out - basis @ (basis.T @ out)
        assert np.linalg.norm(residual) < 1e-9


def test_slerp_zero_magnitude_falls_back():
    out = slerp_noise(np.zeros(3), np.array([1.0, 0.0, 0.0]), 0.5)
    assert np.all(np.isfinite(out))


def test_slerp_shape_mismatch():
    with pytest.raises(ShapeError):
        slerp_noise(np.zeros((2, 2)), np.zeros((3, 3)), 0.5)


# -- plans -------------------------------------------------------------------------


def test_plan_single_step_hits_far_endpoint():
    backend = StubBackend()
    env = BeatEnvelope(weights=(1.0,))
    plan = build_plan(Prompt("a"), Prompt("b"), env, backend, (1, 2))
    assert plan.steps == 1
    assert np.allclose(plan.embeddings[0], backend.text_embed(Prompt("b")), atol=1e-12)
    assert np.allclose(plan.noises[0], backend.draw_noise(2), atol=1e-12)


def test_plan_threads_weights_through_both_interpolants():
    backend = StubBackend()
    env = BeatEnvelope(weights=(0.25, 0.5, 0.75, 1.0))
    plan = build_plan(Prompt("a"), Prompt("b"), env, backend, (7, 8))
    e_i = backend.text_embed(Prompt("a"))
    e_j = backend.text_embed(Prompt("b"))
    for k, w in enumerate(env.weights):
        assert np.allclose(plan.embeddings[k], lerp_embeddings(e_i, e_j, w), atol=1e-12)
        assert np.allclose(
            plan.noises[k], slerp_noise(backend.draw_noise(7), backend.draw_noise(8), w),
            atol=1e-12,
        )


def test_plan_identical_prompts_and_seeds_is_constant():
    backend = StubBackend()
    env = BeatEnvelope(weights=(0.5, 1.0))
    plan = build_plan(Prompt("same"), Prompt("same"), env, backend, (5, 5))
    assert np.allclose(plan.embeddings[0], plan.embeddings[1], atol=1e-12)
    assert np.allclose(plan.noises[0], plan.noises[1], atol=1e-12)


def test_plan_carries_backend_diagnostic():
    class FailingBackend:
        def text_embed(self, prompt):
            raise RuntimeError("service melted")

    with pytest.raises(BackendError, match="service melted"):
        build_plan(Prompt("a"), Prompt("b"), BeatEnvelope(weights=(1.0,)), FailingBackend(), (0, 1))


def test_plan_manifest_serializes():
    backend = StubBackend()
    plan = build_plan(Prompt("a"), Prompt("b"), BeatEnvelope(weights=(0.5, 1.0)), backend, (1, 2))
    manifest = plan.manifest()
    assert manifest["seeds"] == [1, 2]
    assert len(manifest["embedding_digests"]) == 2
    assert plan.manifest_json().startswith("{")


def test_noise_seed_stability():
    assert noise_seed(7, 3) == noise_seed(7, 3)
    assert noise_seed(7, 3) != noise_seed(7, 4)
    assert noise_seed(7, 3, variant=1) != noise_seed(7, 3)


def test_monotone_envelope_moves_monotonically_along_segment():
    backend = StubBackend()
    env = BeatEnvelope(weights=(0.1, 0.2, 0.6, 0.61, 1.0))
    plan = build_plan(Prompt("x"), Prompt("y"), env, backend, (3, 4))
    e_i = backend.text_embed(Prompt("x"))
    distances = [np.linalg.norm(e - e_i) for e in plan.embeddings]
    assert all(b >= a - 1e-12 for a, b in zip(distances, distances[1:]))
