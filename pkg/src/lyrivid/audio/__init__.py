"""Audio loading, mel spectrograms, percussive separation, beat weights."""

from lyrivid.audio.beats import BeatEnvelope, beat_weights, resample_linear
from lyrivid.audio.hpss import percussive_component
from lyrivid.audio.io import (
    DEFAULT_SAMPLE_RATE,
    AudioBuffer,
    clip_at,
    load_audio,
    pcm16_bytes,
    segment_clips,
    write_wav,
)
from lyrivid.audio.mel import (
    MelSpectrogram,
    MelSpectrogramParams,
    band_center_frequencies,
    mel_filterbank,
    mel_spectrogram,
)

__all__ = [
    "AudioBuffer",
    "BeatEnvelope",
    "DEFAULT_SAMPLE_RATE",
    "MelSpectrogram",
    "MelSpectrogramParams",
    "band_center_frequencies",
    "beat_weights",
    "clip_at",
    "load_audio",
    "mel_filterbank",
    "mel_spectrogram",
    "pcm16_bytes",
    "percussive_component",
    "resample_linear",
    "segment_clips",
    "write_wav",
]
