"""Subtitles: WebVTT sidecar generation and burned-in rendering."""

from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from lyrivid.compositor.timeline import Timeline

SUBTITLE_BAND_FRACTION = 0.2  # lower band of the frame reserved for text


def _timestamp(seconds: float) -> str:
    ms = round(seconds * 1000)
    h, rem = divmod(ms, 3_600_000)
    m, rem = divmod(rem, 60_000)
    s, ms = divmod(rem, 1000)
    return f"{h:02d}:{m:02d}:{s:02d}.{ms:03d}"


def webvtt(timeline: Timeline) -> str:
    """One cue per segment with a non-empty lyric."""
    cues = ["WEBVTT", ""]
    counter = 0
    for segment in timeline.segments:
        if not segment.lyric.strip():
            continue
        counter += 1
        cues.append(str(counter))
        cues.append(f"{_timestamp(segment.start)} --> {_timestamp(segment.end)}")
        cues.append(segment.lyric)
        cues.append("")
    return "\n".join(cues)


def subtitle_band_rows(height: int) -> tuple[int, int]:
    top = int(height * (1.0 - SUBTITLE_BAND_FRACTION))
    return top, height


def burn_in(frame: np.ndarray, text: str) -> np.ndarray:
    """Render the lyric centered in the lower band; returns a new raster."""
    if not text.strip():
        return frame.copy()
    height, width = frame.shape[:2]
    img = Image.fromarray(frame, mode="RGB")
    draw = ImageDraw.Draw(img)
    font = ImageFont.load_default()
    band_top, band_bottom = subtitle_band_rows(height)
    box = draw.textbbox((0, 0), text, font=font)
    text_w = box[2] - box[0]
    text_h = box[3] - box[1]
    x = max((width - text_w) // 2, 2)
    y = band_top + max((band_bottom - band_top - text_h) // 2, 0)
    # dark backing strip keeps the text readable on any field
    draw.rectangle([0, band_top, width, band_bottom], fill=(0, 0, 0))
    draw.text((x, y), text, fill=(255, 255, 255), font=font)
    return np.asarray(img, dtype=np.uint8)
