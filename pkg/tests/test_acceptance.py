"""Acceptance gate: one test per criterion, at the stated tolerances.

Each criterion prints a visible PASS line (bypassing capture) when it
holds; a failure shows up as a normal pytest failure for that criterion.
Run as: pytest tests/test_acceptance.py
"""

import json
import math
import random
import socket
import time

import numpy as np
import pytest
import torch

from lyrivid import metrics
from lyrivid.audio import AudioBuffer, write_wav
from lyrivid.audio.beats import beat_weights
from lyrivid.audio.mel import MelSpectrogram, MelSpectrogramParams
from lyrivid.backend import StubBackend
from lyrivid.compositor import TimelineConfig, VideoSpec, build_timeline, synthesize_frames
from lyrivid.interpolation import lerp_embeddings, slerp_noise
from lyrivid.lyrics import (
    DecoderConfig,
    LyricVae,
    MusicEncoderConfig,
    SamplingConfig,
    TokenVocab,
    TrainConfig,
    batch_loss,
    beta_schedule,
    decode_line,
    filter_logits,
    greedy_config,
    kl_divergence,
    sample_latent,
    train,
)
from lyrivid.pipeline import ModelHandle, Project, run_pipeline

from conftest import SR, fixture_signal
from test_metrics import oracle_bleu, oracle_coherence, oracle_distinct, oracle_kappa, random_corpus
from test_model import monte_carlo_kl
from test_sampling import oracle_filter

STOPS = metrics.load_stopwords()


def announce(capsys, name: str, detail: str = "") -> None:
    with capsys.disabled():
        print(f"ACCEPTANCE PASS  {name}{'  [' + detail + ']' if detail else ''}")


def mel_of(matrix: np.ndarray) -> MelSpectrogram:
    return MelSpectrogram(matrix=matrix, params=MelSpectrogramParams(),
                          source_duration=matrix.shape[1] * 0.01)


# ---------------------------------------------------------------------------


def test_beat_weight_procedure(capsys):
    started = time.perf_counter()
    # constant amplitude at many scales: weights are exactly k/N
    for n in range(1, 65):
        for scale in (1e-7, 1.0, 3.14, 1e8):
            env = beat_weights(mel_of(np.full((6, 37), scale)), n)
            expected = np.arange(1, n + 1) / n
            assert np.max(np.abs(np.array(env.weights) - expected)) <= 1e-9

    rng = np.random.RandomState(2024)
    for _ in range(1000):
        rows = rng.randint(1, 12)
        cols = rng.randint(1, 64)
        steps = rng.randint(1, 33)
        matrix = rng.rand(rows, cols) * rng.uniform(0.1, 100)
        env = beat_weights(mel_of(matrix), steps)
        weights = np.array(env.weights)
        assert np.all(np.diff(weights) >= -1e-12)  # monotone
        assert abs(weights[-1] - 1.0) <= 1e-12  # terminal 1
        scaled = beat_weights(mel_of(matrix * 7.3), steps)
        assert np.max(np.abs(np.array(scaled.weights) - weights)) <= 1e-9  # scale-invariant
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    announce(capsys, "beat-weight procedure", f"{elapsed:.2f}s")


def test_interpolation_geometry(capsys):
    rng = np.random.RandomState(7)
    for _ in range(1000):
        dim = rng.randint(2, 65)
        n_i = rng.standard_normal(dim)
        n_i /= np.linalg.norm(n_i)
        n_j = rng.standard_normal(dim)
        n_j /= np.linalg.norm(n_j)
        assert np.max(np.abs(slerp_noise(n_i, n_j, 0.0) - n_i)) <= 1e-12
        assert np.max(np.abs(slerp_noise(n_i, n_j, 1.0) - n_j)) <= 1e-12
        w = rng.rand()
        assert abs(np.linalg.norm(slerp_noise(n_i, n_j, w)) - 1.0) <= 1e-6

    e1 = np.zeros(8); e1[0] = 1.0
    e2 = np.zeros(8); e2[1] = 1.0
    assert np.max(np.abs(slerp_noise(e1, e2, 0.5) - (e1 + e2) / np.sqrt(2))) <= 1e-9

    a, b = rng.standard_normal(32), rng.standard_normal(32)
    assert np.max(np.abs(lerp_embeddings(a, b, 0.5) - (a + b) / 2)) <= 1e-12
    for w in np.linspace(0, 1, 21):
        assert np.max(np.abs(lerp_embeddings(a, b, w) - a - w * (b - a))) <= 1e-12
    announce(capsys, "interpolation geometry")


def test_kl_and_reparameterization(capsys):
    assert float(kl_divergence(torch.zeros(6, dtype=torch.float64),
                               torch.ones(6, dtype=torch.float64))) == 0.0
    mu = torch.tensor([0.3, -1.0, 2.0], dtype=torch.float64)
    sigma = torch.tensor([0.5, 1.5, 2.0], dtype=torch.float64)
    assert torch.equal(sample_latent(mu, sigma, epsilon=torch.zeros(3, dtype=torch.float64)), mu)

    rng = np.random.RandomState(31)
    for trial in range(20):
        dim = rng.randint(2, 8)
        m = rng.uniform(0.5, 2.0, dim) * rng.choice([-1, 1], dim)
        s = rng.uniform(0.4, 2.5, dim)
        analytic = float(kl_divergence(torch.tensor(m), torch.tensor(s)))
        estimate = monte_carlo_kl(m, s, samples=1_000_000, seed=trial)
        assert abs(estimate - analytic) / analytic < 0.02
    announce(capsys, "KL + reparameterization", "MC 1e6 samples, 20 states")


def test_gradient_check(capsys):
    started = time.perf_counter()
    torch.manual_seed(5)
    vocab = TokenVocab.build(["sun low", "red sky", "cold wind end"], min_count=1)
    music = MusicEncoderConfig(layers=2, heads=2, embed_dim=8, latent_dim=4,
                               patch_height=4, patch_width=4, patch_stride=3, max_patches=16)
    decoder = DecoderConfig(layers=2, heads=2, embed_dim=8, max_sequence_length=16, mlp_ratio=4)
    model = LyricVae(music, decoder, vocab_size=len(vocab)).double()

    rng = np.random.RandomState(0)
    batch = [
        (rng.rand(8, 10), "<START>", "sun low"),
        (rng.rand(8, 10), "sun low", "red sky"),
    ]
    epsilons = torch.tensor(rng.standard_normal((2, 4)))  # pinned reparam noise
    beta = 0.7

    def loss_value() -> float:
        total, _, _ = batch_loss(model, batch, vocab, beta, epsilons=epsilons)
        return total

    model.zero_grad()
    loss_value().backward()
    analytic = {name: (p.grad.clone() if p.grad is not None else torch.zeros_like(p))
                for name, p in model.named_parameters()}

    step = 1e-4
    worst = 0.0
    checked = 0
    with torch.no_grad():
        for name, param in model.named_parameters():
            flat = param.view(-1)
            fd = torch.zeros_like(flat)
            for i in range(flat.numel()):
                original = flat[i].item()
                flat[i] = original + step
                up = float(loss_value())
                flat[i] = original - step
                down = float(loss_value())
                flat[i] = original
                fd[i] = (up - down) / (2 * step)
            fd = fd.view_as(param)
            g = analytic[name]
            scale = max(float(g.norm()), float(fd.norm()), 1e-12)
            rel = float((fd - g).norm()) / scale
            worst = max(worst, rel)
            checked += flat.numel()
            assert rel < 1e-3, f"{name}: relative error {rel:.2e}"
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    announce(capsys, "gradient check",
             f"{checked} params, worst rel err {worst:.1e}, {elapsed:.0f}s")


def test_overfit_oracle(capsys):
    started = time.perf_counter()
    words = ["sun", "moon", "gold", "rain", "echo", "fire", "slow", "cold"]
    lines = [f"{a} {b} falls" for a in words for b in words][:32]
    vocab = TokenVocab.build(lines, min_count=1)
    rng = np.random.RandomState(3)
    # chained previous-line contexts, mirroring the real pair protocol
    dataset = []
    previous = "<START>"
    for line in lines:
        dataset.append((np.abs(rng.standard_normal((64, 40))), previous, line))
        previous = line
    config = TrainConfig(epochs=200, batch_size=8, learning_rate=1e-3, seed=4)
    model, history = train(dataset, config, vocab)  # toy-scale default architecture
    assert history[-1].reconstruction < 0.10 * history[0].reconstruction
    elapsed = time.perf_counter() - started
    assert elapsed < 600.0

    # 1-pair memorization: greedy decode reproduces the line exactly
    pair_mel = np.abs(np.random.RandomState(9).standard_normal((64, 40)))
    vocab1 = TokenVocab.build(["hello world"], min_count=1)
    model1, _ = train(
        [(pair_mel, "<START>", "hello world")],
        TrainConfig(epochs=150, batch_size=1, learning_rate=2e-3, seed=1),
        vocab1,
        music_config=MusicEncoderConfig(layers=2, heads=4, embed_dim=64, latent_dim=32,
                                        max_patches=64),
        decoder_config=DecoderConfig(layers=2, heads=4, embed_dim=64, max_sequence_length=32),
    )
    state = model1.posterior(pair_mel, epsilon=torch.zeros(32))
    line = decode_line(model1, state.mu, vocab1.encode("<START>"), greedy_config(), vocab1)
    assert line.text == "hello world"
    announce(capsys, "overfit oracle",
             f"loss {history[0].reconstruction:.3f}->{history[-1].reconstruction:.3f}, "
             f"{elapsed:.0f}s")


def test_beta_schedule_values(capsys):
    cfg = TrainConfig()
    assert beta_schedule(0.25, cfg) == 1e-5
    assert beta_schedule(0.5, cfg) == 1e-5
    assert beta_schedule(0.75, cfg) == 1e-5 + 0.5 * (1 - 1e-5)
    assert beta_schedule(1.0, cfg) == 1.0
    announce(capsys, "beta schedule", "floor 1e-5, ramp to exactly 1.0")


def test_sampling_filter_oracle(capsys):
    rng = np.random.RandomState(606)
    for trial in range(200):
        size = rng.randint(2, 51)
        logits = rng.standard_normal(size) * rng.uniform(0.5, 3.0)
        if trial % 3 == 0:
            logits = np.round(logits * 2) / 2  # deliberate ties
        top_k = rng.randint(1, size + 1)
        top_p = float(rng.uniform(0.05, 1.0))
        temperature = float(rng.uniform(0.3, 2.0))
        cfg = SamplingConfig(top_k=top_k, top_p=top_p, temperature=temperature,
                             max_tokens=4, seed=0)
        mine = filter_logits(torch.tensor(logits, dtype=torch.float64), cfg).numpy()
        ref = oracle_filter(logits, top_k, top_p, temperature)
        assert np.array_equal(mine == 0.0, ref == 0.0)
        assert np.max(np.abs(mine - ref)) <= 1e-12
    announce(capsys, "sampling filter vs exhaustive oracle", "200 distributions")


def test_metrics_oracle_equivalence(capsys):
    assert metrics.distinct_n(["a b a b"], 2) == pytest.approx(2 / 3, abs=1e-12)
    a = ["p"] * 25 + ["n"] * 25
    b = ["p"] * 20 + ["n"] * 5 + ["p"] * 5 + ["n"] * 20
    assert metrics.cohens_kappa(a, b) == pytest.approx(0.6, abs=1e-12)
    stat, _ = metrics.chi_square_independence([[10, 20], [20, 10]])
    assert stat == pytest.approx(20 / 3, abs=1e-12)

    rng = random.Random(2025)
    for _ in range(20):
        cands = random_corpus(rng, rng.randint(1, 10))
        refs = random_corpus(rng, len(cands))
        for n in (2, 3):
            assert metrics.bleu_n(cands, refs, n) == pytest.approx(
                oracle_bleu(cands, refs, n), abs=1e-12)
            assert metrics.distinct_n(cands, n) == pytest.approx(
                oracle_distinct(cands, n), abs=1e-12)
        songs = [random_corpus(rng, rng.randint(1, 4)) for _ in range(rng.randint(1, 3))]
        assert metrics.coherence(songs, STOPS) == pytest.approx(oracle_coherence(songs), abs=1e-12)
        labels_a = [rng.choice("xyz") for _ in range(rng.randint(2, 25))]
        labels_b = [rng.choice("xyz") for _ in range(len(labels_a))]
        assert metrics.cohens_kappa(labels_a, labels_b) == pytest.approx(
            oracle_kappa(labels_a, labels_b), abs=1e-12)
        # novelty against a list built from the references
        freq = metrics.build_frequency_list(refs, 2, STOPS)
        grams = [g for line in cands for g in
                 metrics.ngrams(metrics.content_words(line, STOPS), 2)]
        if grams:
            expected = sum(1 for g in grams if g not in set(freq.phrases)) / len(grams)
            assert metrics.novelty_n(cands, freq, STOPS) == pytest.approx(expected, abs=1e-12)
    announce(capsys, "metrics vs brute-force oracles", "20 corpora + anchors")


def test_timeline_math(capsys):
    lines = [(i * 5.0, f"line {i}") for i in range(6)]
    timeline = build_timeline(lines, 30.0, TimelineConfig(fps=12))
    transitions = timeline.segments[:-1]
    assert len(transitions) == 5
    assert all(len(s.keyframes) == 5 for s in transitions)
    assert len(timeline.segments[-1].keyframes) == 1  # terminal hold
    assert abs(timeline.frame_count() - round(12 * 30.0)) <= 1

    rng = np.random.RandomState(0)
    rasters = {}
    for segment in timeline.segments:
        for keyframe in segment.keyframes:
            rasters.setdefault(
                keyframe.frame_id, rng.randint(0, 256, (32, 32, 3)).astype(np.uint8)
            )
    frames = synthesize_frames(
        timeline, rasters, VideoSpec(output_path="unused", fps=12, resolution=32)
    )
    assert abs(len(frames) - round(12 * 30.0)) <= 1
    announce(capsys, "timeline math", "6 lines / 30 s")


def test_end_to_end_determinism(capsys, tmp_path, toy_checkpoint, golden_manifest_path):
    if not golden_manifest_path.exists():
        pytest.fail("golden manifest missing; run scripts/make_golden.py and commit the output")
    golden = json.loads(golden_manifest_path.read_text())

    project_dir = tmp_path / "golden-run"
    project_dir.mkdir()
    write_wav(project_dir / "audio.wav",
              AudioBuffer(samples=fixture_signal(15.0), sample_rate=SR))
    project = Project.new(
        audio_path="audio.wav",
        keywords=[["Medium", "Painting"], ["Light", "Warm light"]],
        seed=11,
        fps=12,
    )
    handle = ModelHandle.from_checkpoint(toy_checkpoint)
    backend = StubBackend()

    started = time.perf_counter()
    run_pipeline(project, backend, handle, project_dir)
    elapsed = time.perf_counter() - started
    manifest = json.loads((project_dir / project.manifest_path).read_text())
    assert manifest["frame_count"] == golden["frame_count"]
    assert manifest["digests"] == golden["digests"], "frame digests diverged from golden"
    assert elapsed < 60.0
    assert (project_dir / project.video_path).exists()

    report = run_pipeline(project, backend, handle, project_dir)
    assert report.total_executions() == 0  # rerun is 100% cache hits
    announce(capsys, "end-to-end determinism",
             f"{manifest['frame_count']} frames, {elapsed:.1f}s, rerun all-hit")


def test_service_integration(capsys, tmp_path, toy_checkpoint, monkeypatch):
    from fastapi.testclient import TestClient

    from lyrivid.backend import BackendDescriptor
    from lyrivid.service import ServiceConfig, create_app

    # any real socket connection is an acceptance failure (zero network egress)
    def forbidden(*args, **kwargs):
        raise AssertionError("network egress attempted during service acceptance test")

    monkeypatch.setattr(socket.socket, "connect", forbidden)

    config = ServiceConfig(
        root=str(tmp_path / "svc"),
        checkpoint=str(toy_checkpoint),
        backend=BackendDescriptor(kind="stub"),
        fps=6,
    )

    import wave as wave_mod
    import io

    buf = io.BytesIO()
    with wave_mod.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(SR)
        wf.writeframes((np.clip(fixture_signal(11.0), -1, 1) * 32767).astype("<i2").tobytes())

    app = create_app(config)
    with TestClient(app) as client:
        project_id = client.post(
            "/projects", files={"file": ("song.wav", buf.getvalue(), "audio/wav")}
        ).json()["id"]
        assert client.put(
            f"/projects/{project_id}/keywords",
            json={"keywords": [["Medium", "Painting"]]},
        ).status_code == 200
        job_id = client.post(f"/projects/{project_id}/generate").json()["job"]
        app.state.jobs.wait_idle()
        assert client.get(f"/jobs/{job_id}").json()["state"] == "done"
        assert client.get(f"/projects/{project_id}/video").status_code == 200

        project = client.get(f"/projects/{project_id}").json()
        assert client.put(
            f"/projects/{project_id}/order", json={"ordering": [1, 0]}
        ).status_code == 200
        candidate = project["illustrations"][0]["candidate_ids"][1]
        assert client.put(
            f"/projects/{project_id}/segments/0/choice", json={"candidate_id": candidate}
        ).status_code == 200
        job2 = client.post(f"/projects/{project_id}/generate").json()["job"]
        app.state.jobs.wait_idle()
        assert client.get(f"/jobs/{job2}").json()["state"] == "done"

    # durability across a simulated crash-restart
    app2 = create_app(config)
    with TestClient(app2) as client:
        revived = client.get(f"/projects/{project_id}").json()
        assert revived["ordering"] == [1, 0]
        assert revived["illustrations"][0]["chosen_id"] == candidate
        assert client.get(f"/projects/{project_id}/video").status_code == 200
    announce(capsys, "service integration", "full editor flow, zero egress, crash-durable")
