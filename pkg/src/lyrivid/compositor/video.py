"""Video rendering: fps-grid frame synthesis and MP4 output.

Frames are synthesized on the fps grid by cross-dissolving between
keyframes. Muxing prefers an external ffmpeg (H.264 + AAC) when one is on
PATH; otherwise a built-in minimal ISO-BMFF muxer writes an MP4 with JPEG
video samples and 16-bit PCM audio, which keeps the pipeline functional on
hosts without codec tooling.
"""

from __future__ import annotations

import hashlib
import io
import json
import shutil
import struct
import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from lyrivid.audio.io import AudioBuffer, pcm16_bytes, write_wav
from lyrivid.compositor.morph import Morpher, morph_frames
from lyrivid.compositor.subtitles import burn_in
from lyrivid.compositor.timeline import Timeline
from lyrivid.errors import EncoderMissingError, LyrividError


@dataclass(frozen=True)
class VideoSpec:
    output_path: str
    fps: int = 12
    resolution: int = 128
    subtitle_burn_in: bool = False
    allow_scaling: bool = False
    require_external_encoder: bool = False

    def __post_init__(self):
        if self.fps < 1:
            raise ValueError("fps must be >= 1")


@dataclass
class RenderResult:
    video_path: Path
    manifest: dict

    def manifest_json(self) -> str:
        return json.dumps(self.manifest, indent=2)


def detect_encoder() -> str | None:
    """Path of the external encoder executable, if present."""
    return shutil.which("ffmpeg")


def _conform(raster: np.ndarray, spec: VideoSpec) -> np.ndarray:
    if raster.shape[0] == spec.resolution and raster.shape[1] == spec.resolution:
        return raster
    if not spec.allow_scaling:
        raise LyrividError(
            f"frame of size {raster.shape[1]}x{raster.shape[0]} does not match "
            f"resolution {spec.resolution}; set allow_scaling to resample"
        )
    img = Image.fromarray(raster, mode="RGB").resize(
        (spec.resolution, spec.resolution), Image.BILINEAR
    )
    return np.asarray(img, dtype=np.uint8)


def synthesize_frames(
    timeline: Timeline,
    frames_by_id: dict[str, np.ndarray],
    spec: VideoSpec,
    morpher: Morpher | None = None,
) -> list[np.ndarray]:
    """All video frames on the fps grid, in order.

    Exactly round(fps * duration) frames: keyframes land on their rounded
    grid index, gaps are cross-dissolved, and the final keyframe holds to
    the end.
    """
    if not timeline.segments:
        raise LyrividError("empty timeline")
    keyframes = timeline.all_keyframes()
    missing = [k.frame_id for k in keyframes if k.frame_id not in frames_by_id]
    if missing:
        raise LyrividError(f"unresolved keyframes: {', '.join(missing[:5])}")
    rasters = [_conform(frames_by_id[k.frame_id], spec) for k in keyframes]

    total = round(spec.fps * timeline.total_duration)
    indices = [min(round(k.time * spec.fps), total - 1) for k in keyframes]
    out: list[np.ndarray] = []
    for i, raster in enumerate(rasters):
        if indices[i] < len(out):  # keyframe collided with an already-emitted index
            continue
        out.append(raster)
        next_index = indices[i + 1] if i + 1 < len(rasters) else total
        gap = next_index - indices[i] - 1
        if gap > 0:
            target = rasters[i + 1] if i + 1 < len(rasters) else raster
            out.extend(morph_frames(raster, target, gap, morpher=morpher))
    while len(out) < total:
        out.append(out[-1].copy())
    del out[total:]

    if spec.subtitle_burn_in:
        bounds = [(s.start, s.end, s.lyric) for s in timeline.segments]
        for n in range(total):
            t = n / spec.fps
            for start, end, lyric in bounds:
                if start <= t < end or (end == timeline.total_duration and t >= start):
                    out[n] = burn_in(out[n], lyric)
                    break
    return out


def frame_digest_manifest(frames: list[np.ndarray], spec: VideoSpec) -> dict:
    return {
        "fps": spec.fps,
        "resolution": spec.resolution,
        "frame_count": len(frames),
        "digests": [
            hashlib.sha256(np.ascontiguousarray(f).tobytes()).hexdigest() for f in frames
        ],
    }


def render_video(
    timeline: Timeline,
    audio: AudioBuffer,
    spec: VideoSpec,
    frames_by_id: dict[str, np.ndarray],
    morpher: Morpher | None = None,
) -> RenderResult:
    """Synthesize frames, mux with the audio track, write the MP4."""
    frames = synthesize_frames(timeline, frames_by_id, spec, morpher=morpher)
    manifest = frame_digest_manifest(frames, spec)
    out_path = Path(spec.output_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)

    encoder = detect_encoder()
    if encoder:
        _encode_with_ffmpeg(encoder, frames, audio, spec, out_path)
    elif spec.require_external_encoder:
        raise EncoderMissingError(
            "external video encoder required but not found: install 'ffmpeg' on PATH"
        )
    else:
        out_path.write_bytes(_mux_mp4(frames, audio, spec.fps))
    return RenderResult(video_path=out_path, manifest=manifest)


def _encode_with_ffmpeg(
    encoder: str, frames: list[np.ndarray], audio: AudioBuffer, spec: VideoSpec, out_path: Path
) -> None:
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp)
        concat = ["ffconcat version 1.0"]
        for i, frame in enumerate(frames):
            name = f"frame{i:06d}.png"
            Image.fromarray(frame, mode="RGB").save(tmp_path / name)
            concat.append(f"file '{name}'")
            concat.append(f"duration {1.0 / spec.fps:.9f}")
        (tmp_path / "frames.ffconcat").write_text("\n".join(concat) + "\n")
        write_wav(tmp_path / "audio.wav", audio)
        cmd = [
            encoder, "-y", "-v", "error",
            "-f", "concat", "-safe", "0", "-i", str(tmp_path / "frames.ffconcat"),
            "-i", str(tmp_path / "audio.wav"),
            "-c:v", "libx264", "-pix_fmt", "yuv420p", "-r", str(spec.fps),
            "-c:a", "aac", "-shortest",
            str(out_path),
        ]
        proc = subprocess.run(cmd, capture_output=True)
        if proc.returncode != 0:
            raise LyrividError(f"ffmpeg failed: {proc.stderr.decode(errors='replace')[:500]}")


# ---------------------------------------------------------------------------
# Built-in minimal MP4 muxer: JPEG video samples + 16-bit PCM audio.
# All timestamps are zeroed so output bytes are deterministic.


def _box(kind: bytes, payload: bytes) -> bytes:
    return struct.pack(">I", 8 + len(payload)) + kind + payload


def _full_box(kind: bytes, version: int, flags: int, payload: bytes) -> bytes:
    return _box(kind, struct.pack(">B", version) + flags.to_bytes(3, "big") + payload)


_MATRIX = struct.pack(">9I", 0x10000, 0, 0, 0, 0x10000, 0, 0, 0, 0x40000000)


def _descriptor(tag: int, payload: bytes) -> bytes:
    size = len(payload)
    length = bytes([size]) if size < 128 else bytes([0x80 | (size >> 7), size & 0x7F])
    return bytes([tag]) + length + payload


def _esds_jpeg() -> bytes:
    decoder_config = _descriptor(
        0x04,
        bytes([0x6C, 0x11])  # objectTypeIndication JPEG, streamType visual
        + (0).to_bytes(3, "big")  # bufferSizeDB
        + struct.pack(">II", 0, 0),  # max/avg bitrate
    )
    sl_config = _descriptor(0x06, b"\x02")
    es = _descriptor(0x03, struct.pack(">HB", 1, 0) + decoder_config + sl_config)
    return _full_box(b"esds", 0, 0, es)


def _stsd_video(width: int, height: int) -> bytes:
    entry = (
        b"\x00" * 6 + struct.pack(">H", 1)  # SampleEntry: reserved + data_ref_index
        + struct.pack(">HH", 0, 0) + b"\x00" * 12  # predefined/reserved
        + struct.pack(">HH", width, height)
        + struct.pack(">II", 0x00480000, 0x00480000)  # 72 dpi
        + struct.pack(">I", 0) + struct.pack(">H", 1)  # reserved, frame_count
        + bytes([4]) + b"jpeg" + b"\x00" * 27  # compressor name (pascal, 32 bytes)
        + struct.pack(">Hh", 24, -1)  # depth, predefined
        + _esds_jpeg()
    )
    return _full_box(b"stsd", 0, 0, struct.pack(">I", 1) + _box(b"mp4v", entry))


def _stsd_audio(sample_rate: int) -> bytes:
    entry = (
        b"\x00" * 6 + struct.pack(">H", 1)
        + struct.pack(">HH", 0, 0) + struct.pack(">I", 0)  # version/revision/vendor
        + struct.pack(">HHHH", 1, 16, 0, 0)  # mono, 16-bit, compression, packet size
        + struct.pack(">I", sample_rate << 16)
    )
    return _full_box(b"stsd", 0, 0, struct.pack(">I", 1) + _box(b"sowt", entry))


def _stbl(stsd: bytes, sample_count: int, delta: int, sizes: list[int] | int, chunk_offset: int) -> bytes:
    stts = _full_box(b"stts", 0, 0, struct.pack(">III", 1, sample_count, delta))
    stsc = _full_box(b"stsc", 0, 0, struct.pack(">IIII", 1, 1, sample_count, 1))
    if isinstance(sizes, int):
        stsz = _full_box(b"stsz", 0, 0, struct.pack(">II", sizes, sample_count))
    else:
        stsz = _full_box(
            b"stsz",
            0,
            0,
            struct.pack(">II", 0, sample_count) + b"".join(struct.pack(">I", s) for s in sizes),
        )
    stco = _full_box(b"stco", 0, 0, struct.pack(">II", 1, chunk_offset))
    return _box(b"stbl", stsd + stts + stsc + stsz + stco)


def _minf(media_header: bytes, stbl: bytes) -> bytes:
    url = _full_box(b"url ", 0, 1, b"")
    dref = _full_box(b"dref", 0, 0, struct.pack(">I", 1) + url)
    return _box(b"minf", media_header + _box(b"dinf", dref) + stbl)


def _hdlr(handler: bytes, name: bytes) -> bytes:
    return _full_box(b"hdlr", 0, 0, struct.pack(">I", 0) + handler + b"\x00" * 12 + name + b"\x00")


def _tkhd(track_id: int, duration_ms: int, width: int, height: int, volume: int) -> bytes:
    payload = (
        struct.pack(">II", 0, 0)  # creation/modification
        + struct.pack(">I", track_id)
        + struct.pack(">I", 0)
        + struct.pack(">I", duration_ms)
        + b"\x00" * 8
        + struct.pack(">hhHH", 0, 0, volume, 0)
        + _MATRIX
        + struct.pack(">II", width << 16, height << 16)
    )
    return _full_box(b"tkhd", 0, 3, payload)


def _mdhd(timescale: int, duration: int) -> bytes:
    payload = (
        struct.pack(">II", 0, 0)
        + struct.pack(">II", timescale, duration)
        + struct.pack(">HH", 0x55C4, 0)  # language "und"
    )
    return _full_box(b"mdhd", 0, 0, payload)


def _mux_mp4(frames: list[np.ndarray], audio: AudioBuffer, fps: int) -> bytes:
    jpegs = []
    for frame in frames:
        buf = io.BytesIO()
        Image.fromarray(frame, mode="RGB").save(buf, format="JPEG", quality=90, subsampling=2)
        jpegs.append(buf.getvalue())
    pcm = pcm16_bytes(audio)

    ftyp = _box(b"ftyp", b"isom" + struct.pack(">I", 512) + b"isomiso2mp41")
    video_offset = len(ftyp) + 8  # mdat header
    audio_offset = video_offset + sum(len(j) for j in jpegs)
    mdat = _box(b"mdat", b"".join(jpegs) + pcm)

    width, height = frames[0].shape[1], frames[0].shape[0]
    n_samples = len(pcm) // 2
    video_ms = round(len(frames) / fps * 1000)
    audio_ms = round(n_samples / audio.sample_rate * 1000)

    video_stbl = _stbl(_stsd_video(width, height), len(jpegs), 1, [len(j) for j in jpegs], video_offset)
    video_minf = _minf(_full_box(b"vmhd", 0, 1, struct.pack(">HHHH", 0, 0, 0, 0)), video_stbl)
    video_mdia = _box(
        b"mdia", _mdhd(fps, len(jpegs)) + _hdlr(b"vide", b"VideoHandler") + video_minf
    )
    video_trak = _box(b"trak", _tkhd(1, video_ms, width, height, 0) + video_mdia)

    audio_stbl = _stbl(_stsd_audio(audio.sample_rate), n_samples, 1, 2, audio_offset)
    audio_minf = _minf(_full_box(b"smhd", 0, 0, struct.pack(">HH", 0, 0)), audio_stbl)
    audio_mdia = _box(
        b"mdia", _mdhd(audio.sample_rate, n_samples) + _hdlr(b"soun", b"SoundHandler") + audio_minf
    )
    audio_trak = _box(b"trak", _tkhd(2, audio_ms, 0, 0, 0x0100) + audio_mdia)

    duration_ms = max(video_ms, audio_ms)
    mvhd = _full_box(
        b"mvhd",
        0,
        0,
        struct.pack(">II", 0, 0)
        + struct.pack(">II", 1000, duration_ms)
        + struct.pack(">IHH", 0x00010000, 0x0100, 0)
        + b"\x00" * 8
        + _MATRIX
        + b"\x00" * 24
        + struct.pack(">I", 3),
    )
    moov = _box(b"moov", mvhd + video_trak + audio_trak)
    return ftyp + mdat + moov
