"""NumPy implementations of the hot kernels.

These are the reference semantics; the Cython module in ``_native.pyx``
must be bit-identical (the equivalence test suite enforces it). Both paths
zero-pad at the edges and use exact order-statistic medians, so results do
not depend on which backend was selected.
"""

import numpy as np


def sliding_median(x: np.ndarray, width: int, axis: int) -> np.ndarray:
    """Running median of a 2D float64 array along one axis.

    Windows are centered, zero-padded at the borders; `width` must be odd
    so the median is an exact order statistic.
    """
    if width % 2 == 0:
        raise ValueError("median width must be odd")
    if x.ndim != 2:
        raise ValueError("sliding_median expects a 2D array")
    x = np.ascontiguousarray(x, dtype=np.float64)
    half = width // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (half, half)
    padded = np.pad(x, pad, mode="constant")
    windows = np.lib.stride_tricks.sliding_window_view(padded, width, axis=axis)
    return np.median(windows, axis=-1)


def blend_frames_u8(a: np.ndarray, b: np.ndarray, num: int, den: int) -> np.ndarray:
    """Cross-dissolve two uint8 rasters at weight num/den, rounding half up.

    Computed entirely in integer arithmetic so the result is identical on
    every platform: value = round_half_up((a*(den-num) + b*num) / den).
    """
    if a.shape != b.shape:
        raise ValueError(f"frame shapes differ: {a.shape} vs {b.shape}")
    if not (0 <= num <= den) or den <= 0:
        raise ValueError("blend weight must satisfy 0 <= num <= den, den > 0")
    wa = np.int64(den - num)
    wb = np.int64(num)
    acc = a.astype(np.int64) * wa + b.astype(np.int64) * wb
    out = (2 * acc + den) // (2 * den)
    return out.astype(np.uint8)
