"""Audio decoding, normalization, and clip segmentation.

WAV (PCM 8/16/24/32-bit) is decoded natively. MP3 is handed to an external
decoder (ffmpeg or mpg123) when one is on PATH; without one, loading an MP3
raises `AudioDecodeError` naming the missing executable.
"""

from __future__ import annotations

import math
import shutil
import struct
import subprocess
import tempfile
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from lyrivid.errors import AudioDecodeError, AudioFormatError

DEFAULT_SAMPLE_RATE = 16_000


@dataclass
class AudioBuffer:
    """Mono audio with samples in [-1, 1]."""

    samples: np.ndarray  # float64, shape (n,)
    sample_rate: int

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate

    def energy(self) -> float:
        return float(np.sum(self.samples**2))


def _sniff_format(path: Path) -> str:
    with open(path, "rb") as fh:
        head = fh.read(12)
    if len(head) >= 12 and head[:4] == b"RIFF" and head[8:12] == b"WAVE":
        return "wav"
    if head[:3] == b"ID3":
        return "mp3"
    # bare MPEG frame sync: 11 set bits
    if len(head) >= 2 and head[0] == 0xFF and (head[1] & 0xE0) == 0xE0:
        return "mp3"
    return "unknown"


def _read_wav(path: Path) -> tuple[np.ndarray, int]:
    """Decode a PCM WAV file to float64 channels x samples."""
    try:
        with wave.open(str(path), "rb") as wf:
            channels = wf.getnchannels()
            width = wf.getsampwidth()
            rate = wf.getframerate()
            frames = wf.readframes(wf.getnframes())
    except (wave.Error, EOFError) as exc:
        raise AudioDecodeError(f"cannot decode WAV file {path}: {exc}") from exc

    if width == 1:  # unsigned 8-bit
        data = np.frombuffer(frames, dtype=np.uint8).astype(np.float64)
        data = (data - 128.0) / 128.0
    elif width == 2:
        data = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 3:
        raw = np.frombuffer(frames, dtype=np.uint8).reshape(-1, 3)
        ints = (
            raw[:, 0].astype(np.int32)
            | (raw[:, 1].astype(np.int32) << 8)
            | (raw[:, 2].astype(np.int32) << 16)
        )
        ints = np.where(ints >= 1 << 23, ints - (1 << 24), ints)
        data = ints.astype(np.float64) / float(1 << 23)
    elif width == 4:
        data = np.frombuffer(frames, dtype="<i4").astype(np.float64) / float(1 << 31)
    else:
        raise AudioDecodeError(f"unsupported WAV sample width {width * 8} bits in {path}")

    if channels > 1:
        data = data.reshape(-1, channels)
        return data.T.copy(), rate
    return data.reshape(1, -1), rate


def _decode_mp3_external(path: Path) -> tuple[np.ndarray, int]:
    """Decode MP3 by shelling out to ffmpeg or mpg123."""
    ffmpeg = shutil.which("ffmpeg")
    mpg123 = shutil.which("mpg123")
    if not ffmpeg and not mpg123:
        raise AudioDecodeError(
            f"cannot decode MP3 file {path}: no MP3 decoder found; "
            "install ffmpeg or mpg123 and ensure it is on PATH"
        )
    with tempfile.TemporaryDirectory() as tmp:
        out = Path(tmp) / "decoded.wav"
        if ffmpeg:
            cmd = [ffmpeg, "-y", "-v", "error", "-i", str(path), "-f", "wav", str(out)]
        else:
            cmd = [mpg123, "-q", "-w", str(out), str(path)]
        proc = subprocess.run(cmd, capture_output=True)
        if proc.returncode != 0 or not out.exists():
            detail = proc.stderr.decode(errors="replace").strip()
            raise AudioDecodeError(f"cannot decode MP3 file {path}: {detail or 'decoder failed'}")
        return _read_wav(out)


def load_audio(path: str | Path, target_rate: int = DEFAULT_SAMPLE_RATE) -> AudioBuffer:
    """Load a WAV or MP3 file as a mono, peak-limited buffer at target_rate.

    Channels are averaged to mono, the signal is resampled with a polyphase
    filter, and scaled down if any magnitude exceeds 1.0.
    """
    path = Path(path)
    if not path.exists():
        raise AudioDecodeError(f"audio file not found: {path}")
    kind = _sniff_format(path)
    if kind == "wav":
        channels, rate = _read_wav(path)
    elif kind == "mp3":
        channels, rate = _decode_mp3_external(path)
    else:
        raise AudioFormatError(
            f"unsupported audio container in {path}: expected WAV or MP3"
        )

    mono = channels.mean(axis=0)
    if rate != target_rate:
        g = math.gcd(rate, target_rate)
        mono = resample_poly(mono, target_rate // g, rate // g)
    peak = float(np.max(np.abs(mono))) if len(mono) else 0.0
    if peak > 1.0:
        mono = mono / peak
    return AudioBuffer(samples=np.asarray(mono, dtype=np.float64), sample_rate=target_rate)


def segment_clips(audio: AudioBuffer, clip_seconds: float) -> list[AudioBuffer]:
    """Split into consecutive non-overlapping clips, zero-padding the last.

    Returns ceil(duration / clip_seconds) clips, each exactly clip_seconds
    long; an empty buffer yields an empty list.
    """
    if clip_seconds <= 0:
        raise ValueError("clip_seconds must be positive")
    n = len(audio.samples)
    if n == 0:
        return []
    clip_len = int(round(clip_seconds * audio.sample_rate))
    count = math.ceil(n / clip_len)
    clips = []
    for i in range(count):
        chunk = audio.samples[i * clip_len : (i + 1) * clip_len]
        if len(chunk) < clip_len:
            chunk = np.concatenate([chunk, np.zeros(clip_len - len(chunk))])
        clips.append(AudioBuffer(samples=chunk.copy(), sample_rate=audio.sample_rate))
    return clips


def clip_at(audio: AudioBuffer, start_seconds: float, clip_seconds: float) -> AudioBuffer:
    """Extract a clip_seconds window starting at start_seconds, zero-padded."""
    clip_len = int(round(clip_seconds * audio.sample_rate))
    start = int(round(start_seconds * audio.sample_rate))
    chunk = audio.samples[max(start, 0) : start + clip_len]
    if len(chunk) < clip_len:
        chunk = np.concatenate([chunk, np.zeros(clip_len - len(chunk))])
    return AudioBuffer(samples=chunk.copy(), sample_rate=audio.sample_rate)


def write_wav(path: str | Path, audio: AudioBuffer) -> None:
    """Write a mono 16-bit PCM WAV (used by fixtures and the muxer)."""
    samples = np.clip(audio.samples, -1.0, 1.0)
    ints = np.round(samples * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(audio.sample_rate)
        wf.writeframes(ints.tobytes())


def pcm16_bytes(audio: AudioBuffer) -> bytes:
    """Samples as little-endian 16-bit PCM."""
    samples = np.clip(audio.samples, -1.0, 1.0)
    return np.round(samples * 32767.0).astype("<i2").tobytes()


def write_stereo_wav(path: str | Path, left: np.ndarray, right: np.ndarray, rate: int) -> None:
    """Write a stereo 16-bit PCM WAV (test fixtures)."""
    if len(left) != len(right):
        raise ValueError("channel lengths differ")
    inter = np.empty(2 * len(left))
    inter[0::2] = np.clip(left, -1, 1)
    inter[1::2] = np.clip(right, -1, 1)
    ints = np.round(inter * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(2)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(ints.tobytes())


def write_wav_24bit(path: str | Path, samples: np.ndarray, rate: int) -> None:
    """Write a mono 24-bit PCM WAV (test fixtures)."""
    ints = np.round(np.clip(samples, -1, 1) * ((1 << 23) - 1)).astype(np.int64)
    payload = bytearray()
    for v in ints:
        payload += struct.pack("<i", int(v))[:3]
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(3)
        wf.setframerate(rate)
        wf.writeframes(bytes(payload))
