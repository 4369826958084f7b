"""Keyframe timeline planning.

L lyric lines yield L-1 transition segments (one per adjacent line pair)
plus a terminal segment that holds the final illustration until the end
of the audio. Each transition carries five keyframe slots: the two
endpoint illustrations and three interpolated ones, evenly spaced over
the segment. Zero or one line degenerates to a single static segment.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Keyframe:
    time: float
    frame_id: str


@dataclass
class SegmentPlan:
    index: int
    start: float
    end: float
    lyric: str
    keyframes: list[Keyframe]

    def duration(self) -> float:
        return self.end - self.start


@dataclass
class Timeline:
    segments: list[SegmentPlan]
    fps: int
    total_duration: float

    def __post_init__(self):
        edges = [(s.start, s.end) for s in self.segments]
        for (a0, a1), (b0, b1) in zip(edges, edges[1:]):
            if abs(a1 - b0) > 1e-9:
                raise ValueError("segments must tile the duration without gaps or overlap")
        if edges and (abs(edges[0][0]) > 1e-9 or abs(edges[-1][1] - self.total_duration) > 1e-9):
            raise ValueError("segments must span exactly [0, total_duration]")

    def all_keyframes(self) -> list[Keyframe]:
        flat = [k for s in self.segments for k in s.keyframes]
        for a, b in zip(flat, flat[1:]):
            if b.time <= a.time:
                raise ValueError("keyframe timestamps must be strictly increasing")
        return flat

    def frame_count(self) -> int:
        return round(self.fps * self.total_duration)


@dataclass(frozen=True)
class TimelineConfig:
    fps: int = 12
    keyframes_per_segment: int = 5  # 2 endpoints + 3 interpolated

    def __post_init__(self):
        if self.fps < 1:
            raise ValueError("fps must be >= 1")
        if self.keyframes_per_segment < 2:
            raise ValueError("a transition needs at least its two endpoints")


def endpoint_frame_id(illustration_index: int) -> str:
    return f"ill{illustration_index:04d}"


def interpolated_frame_id(segment_index: int, step: int) -> str:
    return f"seg{segment_index:04d}-k{step}"


def build_timeline(
    lyric_lines: list[tuple[float, str]],
    duration: float,
    config: TimelineConfig | None = None,
) -> Timeline:
    """Plan segments and keyframe slots from (start_seconds, text) lines."""
    config = config or TimelineConfig()
    lines = sorted(lyric_lines, key=lambda item: item[0])
    if lines and duration < lines[-1][0]:
        raise ValueError("duration must reach the last lyric line start")

    if len(lines) <= 1:
        text = lines[0][1] if lines else ""
        segment = SegmentPlan(
            index=0,
            start=0.0,
            end=duration,
            lyric=text,
            keyframes=[Keyframe(time=0.0, frame_id=endpoint_frame_id(0))],
        )
        return Timeline(segments=[segment], fps=config.fps, total_duration=duration)

    k = config.keyframes_per_segment
    boundaries = [0.0] + [start for start, _ in lines[1:]] + [duration]
    segments: list[SegmentPlan] = []
    for i in range(len(lines) - 1):
        start, end = boundaries[i], boundaries[i + 1]
        span = end - start
        keyframes = [Keyframe(time=start, frame_id=endpoint_frame_id(i))]
        for j in range(1, k):
            keyframes.append(
                Keyframe(time=start + span * j / k, frame_id=interpolated_frame_id(i, j))
            )
        segments.append(
            SegmentPlan(index=i, start=start, end=end, lyric=lines[i][1], keyframes=keyframes)
        )
    # terminal hold on the final illustration
    last = len(lines) - 1
    segments.append(
        SegmentPlan(
            index=last,
            start=boundaries[last],
            end=duration,
            lyric=lines[last][1],
            keyframes=[Keyframe(time=boundaries[last], frame_id=endpoint_frame_id(last))],
        )
    )
    return Timeline(segments=segments, fps=config.fps, total_duration=duration)
