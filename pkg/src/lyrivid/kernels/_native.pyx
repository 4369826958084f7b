# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementations of the hot kernels.

Semantics match ``_fallback`` exactly: zero-padded centered windows for the
median, integer round-half-up arithmetic for the blend. Keep the two files
in lockstep; the equivalence tests compare them element for element.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _lower_bound(double* buf, Py_ssize_t n, double value) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = n, mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if buf[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline void _window_replace(double* buf, Py_ssize_t n, double old, double new) noexcept nogil:
    # remove one instance of `old` and insert `new`, keeping buf sorted
    cdef Py_ssize_t i = _lower_bound(buf, n, old)
    cdef Py_ssize_t j
    if new > old:
        j = i
        while j + 1 < n and buf[j + 1] < new:
            buf[j] = buf[j + 1]
            j += 1
        buf[j] = new
    elif new < old:
        j = i
        while j > 0 and buf[j - 1] > new:
            buf[j] = buf[j - 1]
            j -= 1
        buf[j] = new


cdef inline void _sort_small(double* buf, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double key
    for i in range(1, n):
        key = buf[i]
        j = i - 1
        while j >= 0 and buf[j] > key:
            buf[j + 1] = buf[j]
            j -= 1
        buf[j + 1] = key


cdef void _median_line(double* line, Py_ssize_t n, Py_ssize_t stride, int width,
                       double* out_line, Py_ssize_t out_stride, double* buf) noexcept nogil:
    """Streaming median over one line: maintain a sorted window, swap one
    value per step. Positions outside [0, n) contribute zeros."""
    cdef Py_ssize_t half = width // 2
    cdef Py_ssize_t k, idx
    cdef double old, new
    for k in range(width):
        idx = k - half
        buf[k] = line[idx * stride] if 0 <= idx < n else 0.0
    _sort_small(buf, width)
    out_line[0] = buf[half]
    for idx in range(1, n):
        k = idx - half - 1  # leaving the window
        old = line[k * stride] if 0 <= k < n else 0.0
        k = idx + half  # entering
        new = line[k * stride] if 0 <= k < n else 0.0
        if old != new:
            _window_replace(buf, width, old, new)
        out_line[idx * out_stride] = buf[half]


def sliding_median(object x, int width, int axis):
    """Running median of a 2D float64 array along one axis (odd width)."""
    if width % 2 == 0:
        raise ValueError("median width must be odd")
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("sliding_median expects a 2D array")
    cdef Py_ssize_t rows = arr.shape[0]
    cdef Py_ssize_t cols = arr.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] out = np.empty((rows, cols), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] scratch = np.empty(width, dtype=np.float64)
    cdef double* buf = <double*> scratch.data
    cdef double* src = <double*> arr.data
    cdef double* dst = <double*> out.data
    cdef Py_ssize_t r, c

    if axis == 1:
        with nogil:
            for r in range(rows):
                _median_line(src + r * cols, cols, 1, width, dst + r * cols, 1, buf)
    elif axis == 0:
        with nogil:
            for c in range(cols):
                _median_line(src + c, rows, cols, width, dst + c, cols, buf)
    else:
        raise ValueError("axis must be 0 or 1")
    return out


def blend_frames_u8(object a, object b, int num, int den):
    """Cross-dissolve two uint8 rasters at weight num/den, rounding half up."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] fa
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] fb
    a_arr = np.asarray(a, dtype=np.uint8)
    b_arr = np.asarray(b, dtype=np.uint8)
    if a_arr.shape != b_arr.shape:
        raise ValueError(f"frame shapes differ: {a_arr.shape} vs {b_arr.shape}")
    if not (0 <= num <= den) or den <= 0:
        raise ValueError("blend weight must satisfy 0 <= num <= den, den > 0")
    shape = a_arr.shape
    fa = np.ascontiguousarray(a_arr).reshape(-1)
    fb = np.ascontiguousarray(b_arr).reshape(-1)
    cdef Py_ssize_t n = fa.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, mode="c"] out = np.empty(n, dtype=np.uint8)
    cdef long long wa = den - num
    cdef long long wb = num
    cdef long long d2 = 2 * <long long> den
    cdef long long acc
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            acc = fa[i] * wa + fb[i] * wb
            out[i] = <cnp.uint8_t> ((2 * acc + den) // d2)
    return out.reshape(shape)
