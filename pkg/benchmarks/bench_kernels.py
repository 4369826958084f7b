"""Benchmark: compiled kernels vs the NumPy fallback.

    python benchmarks/bench_kernels.py

Shapes mirror real workloads: the sliding median runs over STFT magnitude
matrices (percussive separation), the blend over full video frames
(cross-dissolve morphing). Results are checked for bit-identity while
timing, so the benchmark doubles as an equivalence smoke test.
"""

from __future__ import annotations

import time

import numpy as np

from lyrivid.kernels import _fallback

try:
    from lyrivid.kernels import _native
except ImportError:
    _native = None


def timed(fn, *args, repeats: int = 5) -> tuple[float, object]:
    best = float("inf")
    result = None
    for _ in range(repeats):
        started = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - started)
    return best, result


def bench_median() -> list[tuple[str, float, float]]:
    rows = []
    rng = np.random.RandomState(0)
    for label, shape in [
        ("5 s clip STFT (513x313)", (513, 313)),
        ("15 s track STFT (513x938)", (513, 938)),
        ("60 s track STFT (513x3751)", (513, 3751)),
    ]:
        mag = rng.rand(*shape)
        for axis in (0, 1):
            t_fallback, ref = timed(_fallback.sliding_median, mag, 17, axis)
            if _native is not None:
                t_native, out = timed(_native.sliding_median, mag, 17, axis)
                assert np.array_equal(out, ref), "kernel mismatch"
            else:
                t_native = float("nan")
            rows.append((f"median axis={axis}  {label}", t_fallback, t_native))
    return rows


def bench_blend() -> list[tuple[str, float, float]]:
    rows = []
    rng = np.random.RandomState(1)
    for label, size, count in [
        ("128px frame x60", 128, 60),
        ("512px frame x60", 512, 60),
    ]:
        a = rng.randint(0, 256, (size, size, 3)).astype(np.uint8)
        b = rng.randint(0, 256, (size, size, 3)).astype(np.uint8)

        def run(impl):
            def inner():
                out = None
                for i in range(1, count + 1):
                    out = impl(a, b, i, count + 1)
                return out
            return inner

        t_fallback, ref = timed(run(_fallback.blend_frames_u8))
        if _native is not None:
            t_native, out = timed(run(_native.blend_frames_u8))
            assert np.array_equal(out, ref), "kernel mismatch"
        else:
            t_native = float("nan")
        rows.append((f"blend  {label}", t_fallback, t_native))
    return rows


def main() -> None:
    if _native is None:
        print("native extension not built; showing fallback timings only\n")
    rows = bench_median() + bench_blend()
    width = max(len(r[0]) for r in rows)
    print(f"{'kernel / workload'.ljust(width)}  {'numpy':>10}  {'native':>10}  {'speedup':>8}")
    for label, t_fb, t_nat in rows:
        speedup = t_fb / t_nat if t_nat == t_nat and t_nat > 0 else float("nan")
        print(f"{label.ljust(width)}  {t_fb * 1e3:9.2f}ms  {t_nat * 1e3:9.2f}ms  {speedup:7.1f}x")


if __name__ == "__main__":
    main()
