"""Shared fixtures: synthetic audio, fixture corpus, toy model checkpoint."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from lyrivid.audio.io import AudioBuffer, write_wav

SR = 16_000
FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


def tone(freq: float, seconds: float, sr: int = SR, amp: float = 0.5) -> np.ndarray:
    t = np.arange(int(round(seconds * sr))) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def click_track(seconds: float, period: float, sr: int = SR, amp: float = 0.9) -> np.ndarray:
    out = np.zeros(int(round(seconds * sr)))
    step = int(round(period * sr))
    out[::step] = amp
    return out


def fixture_signal(seconds: float = 15.0, sr: int = SR) -> np.ndarray:
    """Deterministic music-like mix: chord pad plus percussive clicks."""
    pad = 0.3 * (tone(220, seconds, sr) + tone(277.18, seconds, sr) + tone(329.63, seconds, sr))
    clicks = click_track(seconds, period=0.5, sr=sr, amp=0.6)
    sweep_t = np.arange(int(round(seconds * sr))) / sr
    sweep = 0.1 * np.sin(2 * np.pi * (110 + 8 * sweep_t) * sweep_t)
    mix = pad + clicks + sweep
    peak = np.max(np.abs(mix))
    return (0.9 * mix / peak).astype(np.float64)


@pytest.fixture(scope="session")
def fixture_wav_15s(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("audio") / "fixture_15s.wav"
    write_wav(path, AudioBuffer(samples=fixture_signal(15.0), sample_rate=SR))
    return path


@pytest.fixture(scope="session")
def toy_checkpoint() -> Path:
    path = FIXTURES / "toy_checkpoint.pt"
    if not path.exists():
        pytest.skip("toy checkpoint missing; run scripts/make_golden.py")
    return path


@pytest.fixture(scope="session")
def golden_manifest_path() -> Path:
    return GOLDEN / "e2e_manifest.json"
