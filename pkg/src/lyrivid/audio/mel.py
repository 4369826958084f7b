"""Mel spectrograms.

Defaults follow common speech/audio-transformer settings: 16 kHz mono,
128 mel bands, 25 ms Hann window, 10 ms hop, 0..8 kHz. Frames are taken
without center padding, so T = floor((n - window) / hop) + 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lyrivid.audio.io import AudioBuffer
from lyrivid.errors import ShapeError


@dataclass(frozen=True)
class MelSpectrogramParams:
    n_mels: int = 128
    window_size: int = 400  # 25 ms at 16 kHz
    hop_size: int = 160  # 10 ms at 16 kHz
    f_min: float = 0.0
    f_max: float = 8000.0
    to_db: bool = False
    db_floor: float = -80.0

    def __post_init__(self):
        if self.hop_size > self.window_size:
            raise ValueError("hop_size must not exceed window_size")
        if not (self.f_min < self.f_max):
            raise ValueError("f_min must be below f_max")


@dataclass
class MelSpectrogram:
    matrix: np.ndarray  # (n_mels, T), nonnegative
    params: MelSpectrogramParams
    source_duration: float

    @property
    def num_frames(self) -> int:
        return self.matrix.shape[1]


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, n_fft: int, sample_rate: int, f_min: float, f_max: float) -> np.ndarray:
    """Triangular mel filters, shape (n_mels, n_fft // 2 + 1)."""
    if f_max > sample_rate / 2:
        raise ValueError("f_max exceeds Nyquist frequency")
    n_bins = n_fft // 2 + 1
    bin_freqs = np.arange(n_bins) * (sample_rate / n_fft)
    edges = mel_to_hz(np.linspace(hz_to_mel(f_min), hz_to_mel(f_max), n_mels + 2))
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = edges[m], edges[m + 1], edges[m + 2]
        rising = (bin_freqs - lo) / max(center - lo, 1e-12)
        falling = (hi - bin_freqs) / max(hi - center, 1e-12)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    return fb


def band_center_frequencies(params: MelSpectrogramParams) -> np.ndarray:
    """Center (peak-response) frequency of each mel band in Hz."""
    edges = mel_to_hz(
        np.linspace(hz_to_mel(params.f_min), hz_to_mel(params.f_max), params.n_mels + 2)
    )
    return edges[1:-1]


def _hann(n: int) -> np.ndarray:
    # periodic Hann, the STFT convention
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def frame_signal(samples: np.ndarray, window_size: int, hop_size: int) -> np.ndarray:
    """Strided (T, window_size) view of consecutive analysis frames."""
    n = len(samples)
    if n < window_size:
        raise ShapeError(
            f"audio of {n} samples is shorter than one window ({window_size}); "
            "pad the signal before computing a spectrogram"
        )
    t = (n - window_size) // hop_size + 1
    idx = np.arange(window_size)[None, :] + hop_size * np.arange(t)[:, None]
    return samples[idx]


def mel_spectrogram(audio: AudioBuffer, params: MelSpectrogramParams | None = None) -> MelSpectrogram:
    """Power mel spectrogram (optionally log-compressed to dB)."""
    params = params or MelSpectrogramParams()
    frames = frame_signal(audio.samples, params.window_size, params.hop_size)
    window = _hann(params.window_size)
    spectrum = np.fft.rfft(frames * window, axis=1)
    power = (spectrum.real**2 + spectrum.imag**2).T  # (bins, T)
    fb = mel_filterbank(
        params.n_mels, params.window_size, audio.sample_rate, params.f_min, params.f_max
    )
    mel = fb @ power
    if params.to_db:
        mel = 10.0 * np.log10(np.maximum(mel, 10.0 ** (params.db_floor / 10.0)))
        mel = mel - params.db_floor  # keep the matrix nonnegative
    return MelSpectrogram(matrix=mel, params=params, source_duration=audio.duration_seconds)
