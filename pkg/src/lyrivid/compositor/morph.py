"""Transition-frame synthesis between keyframes.

The default morpher is a pixel cross-dissolve with round-half-up integer
arithmetic (stable across platforms); a warping hook can replace it.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from lyrivid import kernels

Morpher = Callable[[np.ndarray, np.ndarray, int], Sequence[np.ndarray]]


def cross_dissolve(a: np.ndarray, b: np.ndarray, steps: int) -> list[np.ndarray]:
    """`steps` in-between frames at t = i/(steps+1), endpoints excluded."""
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    den = steps + 1
    return [kernels.blend_frames_u8(a, b, i, den) for i in range(1, steps + 1)]


def morph_frames(
    a: np.ndarray, b: np.ndarray, steps: int, morpher: Morpher | None = None
) -> list[np.ndarray]:
    frames = (morpher or cross_dissolve)(a, b, steps)
    return list(frames)
