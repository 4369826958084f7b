"""Hot-loop kernels: compiled extension when available, NumPy otherwise.

``BACKEND`` reports which implementation was selected at import time.
Both expose the same functions with bit-identical results; the extension
exists purely for speed (see benchmarks/bench_kernels.py).
"""

from lyrivid.kernels import _fallback

try:
    from lyrivid.kernels import _native as _impl

    BACKEND = "native"
except ImportError:  # extension not built; pure path
    _impl = _fallback
    BACKEND = "fallback"

sliding_median = _impl.sliding_median
blend_frames_u8 = _impl.blend_frames_u8

__all__ = ["BACKEND", "sliding_median", "blend_frames_u8"]
