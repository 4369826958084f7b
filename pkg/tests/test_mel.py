"""Mel spectrogram semantics."""

import numpy as np
import pytest

from lyrivid.audio.io import AudioBuffer
from lyrivid.audio.mel import (
    MelSpectrogramParams,
    band_center_frequencies,
    mel_filterbank,
    mel_spectrogram,
)
from lyrivid.errors import ShapeError

from conftest import SR, tone


def test_zero_audio_gives_zero_matrix():
    audio = AudioBuffer(samples=np.zeros(SR), sample_rate=SR)
    mel = mel_spectrogram(audio)
    assert np.all(mel.matrix == 0.0)


def test_frame_count_formula():
    params = MelSpectrogramParams()
    n = SR  # one second
    mel = mel_spectrogram(AudioBuffer(samples=np.zeros(n), sample_rate=SR), params)
    expected_t = (n - params.window_size) // params.hop_size + 1
    assert mel.matrix.shape == (params.n_mels, expected_t)


def test_determinism():
    audio = AudioBuffer(samples=tone(523.25, 0.5), sample_rate=SR)
    a = mel_spectrogram(audio).matrix
    b = mel_spectrogram(audio).matrix
    assert np.array_equal(a, b)


def test_tone_at_band_center_dominates_that_band():
    # wide triangles (40 bands over 0..8k) so each spans several DFT bins
    params = MelSpectrogramParams(n_mels=40)
    centers = band_center_frequencies(params)
    band = 25
    fb = mel_filterbank(params.n_mels, params.window_size, SR, params.f_min, params.f_max)
    bin_hz = SR / params.window_size
    tone_bin = int(round(centers[band] / bin_hz))
    # analytic oracle: the filterbank response to energy at that bin peaks here
    assert int(np.argmax(fb[:, tone_bin])) == band

    audio = AudioBuffer(samples=tone(tone_bin * bin_hz, 0.5), sample_rate=SR)
    mel = mel_spectrogram(audio, params)
    column_argmax = np.argmax(mel.matrix, axis=0)
    assert np.all(column_argmax == band)


def test_matrix_nonnegative_and_finite():
    rng = np.random.RandomState(5)
    audio = AudioBuffer(samples=rng.uniform(-1, 1, SR), sample_rate=SR)
    mel = mel_spectrogram(audio)
    assert np.all(np.isfinite(mel.matrix))
    assert np.all(mel.matrix >= 0.0)


def test_too_short_audio_instructs_padding():
    audio = AudioBuffer(samples=np.zeros(100), sample_rate=SR)
    with pytest.raises(ShapeError, match="pad"):
        mel_spectrogram(audio)


def test_param_validation():
    with pytest.raises(ValueError):
        MelSpectrogramParams(window_size=100, hop_size=200)
    with pytest.raises(ValueError):
        MelSpectrogramParams(f_min=500, f_max=400)
