"""Beat-driven interpolation weight schedule.

Four steps: per-frame maximum of the (percussive) mel spectrogram,
normalization by the global maximum, linear resampling to the requested
number of steps, then a cumulative sum renormalized so the final weight
is exactly 1. Silence falls back to an all-ones amplitude sequence, which
yields the uniform ramp k/N.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lyrivid.audio.mel import MelSpectrogram


@dataclass(frozen=True)
class BeatEnvelope:
    """Monotone nondecreasing weights w_1..w_N with w_N = 1."""

    weights: tuple[float, ...]

    @property
    def steps(self) -> int:
        return len(self.weights)

    def __post_init__(self):
        w = self.weights
        if len(w) < 1:
            raise ValueError("envelope needs at least one step")
        if any(b < a - 1e-12 for a, b in zip(w, w[1:])):
            raise ValueError("weights must be nondecreasing")
        if abs(w[-1] - 1.0) > 1e-9:
            raise ValueError("final weight must be 1.0")


def resample_linear(values: np.ndarray, n: int) -> np.ndarray:
    """Resample a sequence to length n by linear interpolation."""
    t = len(values)
    if t == 1:
        return np.full(n, values[0], dtype=np.float64)
    positions = np.linspace(0.0, t - 1, n)
    return np.interp(positions, np.arange(t), values)


def beat_weights(percussive_mel: MelSpectrogram, steps: int) -> BeatEnvelope:
    if steps < 1:
        raise ValueError("steps must be >= 1")
    matrix = percussive_mel.matrix
    if matrix.size == 0:
        raise ValueError("mel spectrogram is empty")

    amplitude = matrix.max(axis=0)  # (1) per-frame column maximum
    peak = amplitude.max()
    if peak > 0:
        amplitude = amplitude / peak  # (2) global-maximum normalization
    else:
        amplitude = np.ones_like(amplitude)  # silence fallback -> uniform ramp
    amplitude = resample_linear(amplitude, steps)  # (3)
    accumulated = np.cumsum(amplitude)  # (4)
    weights = accumulated / accumulated[-1]
    return BeatEnvelope(weights=tuple(float(w) for w in weights))
