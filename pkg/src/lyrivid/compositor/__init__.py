"""Timeline planning, morphing, subtitles, and MP4 rendering."""

from lyrivid.compositor.morph import cross_dissolve, morph_frames
from lyrivid.compositor.subtitles import burn_in, subtitle_band_rows, webvtt
from lyrivid.compositor.timeline import (
    Keyframe,
    SegmentPlan,
    Timeline,
    TimelineConfig,
    build_timeline,
    endpoint_frame_id,
    interpolated_frame_id,
)
from lyrivid.compositor.video import (
    RenderResult,
    VideoSpec,
    detect_encoder,
    frame_digest_manifest,
    render_video,
    synthesize_frames,
)

__all__ = [
    "Keyframe",
    "RenderResult",
    "SegmentPlan",
    "Timeline",
    "TimelineConfig",
    "VideoSpec",
    "build_timeline",
    "burn_in",
    "cross_dissolve",
    "detect_encoder",
    "endpoint_frame_id",
    "frame_digest_manifest",
    "interpolated_frame_id",
    "morph_frames",
    "render_video",
    "subtitle_band_rows",
    "synthesize_frames",
    "webvtt",
]
