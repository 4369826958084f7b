"""Training-pair ingestion and the genre-stratified song split.

Input is a directory of per-song JSON annotation files next to their
accompaniment audio. Each lyric line becomes one (clip, previous line,
target line) pair: the clip is the fixed-length window of accompaniment
starting at the line's start time, and previous lines chain through the
song starting from the <START> sentinel.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import asdict, dataclass
from pathlib import Path

from lyrivid.audio.io import AudioBuffer, clip_at, load_audio
from lyrivid.lyrics.vocab import START

DEFAULT_CLIP_SECONDS = 5.0


@dataclass(frozen=True)
class LineAnnotation:
    start: float
    end: float
    text: str


@dataclass
class SongRecord:
    song_id: str
    genre: str
    audio_path: str
    lines: list[LineAnnotation]

    @classmethod
    def from_json_file(cls, path: str | Path) -> "SongRecord":
        payload = json.loads(Path(path).read_text())
        lines = [
            LineAnnotation(start=float(l["start"]), end=float(l["end"]), text=l["text"])
            for l in payload.get("lines", [])
        ]
        lines.sort(key=lambda l: l.start)
        return cls(
            song_id=payload["song_id"],
            genre=payload.get("genre") or "unknown",
            audio_path=payload["audio"],
            lines=lines,
        )


@dataclass(frozen=True)
class MusicLyricPair:
    song_id: str
    genre: str
    audio_path: str
    clip_start: float
    clip_seconds: float
    previous_line: str
    target_line: str

    def load_clip(self, base_dir: str | Path = ".") -> AudioBuffer:
        audio = load_audio(Path(base_dir) / self.audio_path)
        return clip_at(audio, self.clip_start, self.clip_seconds)


def build_pairs(
    song: SongRecord,
    clip_seconds: float = DEFAULT_CLIP_SECONDS,
    audio_duration: float | None = None,
    base_dir: str | Path = ".",
) -> list[MusicLyricPair]:
    """One pair per lyric line; lines starting past the audio end are skipped.

    audio_duration avoids decoding the file when the caller already knows it.
    """
    if audio_duration is None:
        audio_duration = load_audio(Path(base_dir) / song.audio_path).duration_seconds
    pairs: list[MusicLyricPair] = []
    previous = START
    for line in song.lines:
        if line.start >= audio_duration:
            warnings.warn(
                f"song {song.song_id}: line at {line.start:.2f}s starts beyond "
                f"audio end ({audio_duration:.2f}s); skipped"
            )
            continue
        pairs.append(
            MusicLyricPair(
                song_id=song.song_id,
                genre=song.genre,
                audio_path=song.audio_path,
                clip_start=line.start,
                clip_seconds=clip_seconds,
                previous_line=previous,
                target_line=line.text,
            )
        )
        previous = line.text
    return pairs


def stratified_split(
    pairs_by_song: dict[str, list[MusicLyricPair]],
    train_fraction: float,
    seed: int = 0,
) -> tuple[list[MusicLyricPair], list[MusicLyricPair]]:
    """Split at song granularity, per-genre counts matching train_fraction.

    Assignment is a seeded shuffle within each genre, so identical inputs
    produce identical splits. A genre with a single song goes to train.
    """
    if not (0.0 < train_fraction <= 1.0):
        raise ValueError("train_fraction must lie in (0, 1]")
    by_genre: dict[str, list[str]] = {}
    for song_id in sorted(pairs_by_song):
        song_pairs = pairs_by_song[song_id]
        genre = song_pairs[0].genre if song_pairs else "unknown"
        by_genre.setdefault(genre, []).append(song_id)

    train_ids: set[str] = set()
    rng = random.Random(seed)
    for genre in sorted(by_genre):
        songs = by_genre[genre]
        if len(songs) == 1:
            warnings.warn(f"genre '{genre}' has a single song; assigned to train")
            train_ids.add(songs[0])
            continue
        shuffled = songs[:]
        rng.shuffle(shuffled)
        n_train = round(train_fraction * len(songs))
        train_ids.update(shuffled[:n_train])

    train, test = [], []
    for song_id in sorted(pairs_by_song):
        bucket = train if song_id in train_ids else test
        bucket.extend(pairs_by_song[song_id])
    return train, test


def ingest_directory(
    annotations_dir: str | Path, clip_seconds: float = DEFAULT_CLIP_SECONDS
) -> dict[str, list[MusicLyricPair]]:
    """Read every per-song JSON annotation under a directory tree."""
    annotations_dir = Path(annotations_dir)
    songs = sorted(annotations_dir.glob("*.json"))
    if not songs:
        raise ValueError(f"no song annotation files found under {annotations_dir}")
    pairs_by_song: dict[str, list[MusicLyricPair]] = {}
    for song_file in songs:
        song = SongRecord.from_json_file(song_file)
        pairs_by_song[song.song_id] = build_pairs(
            song, clip_seconds=clip_seconds, base_dir=annotations_dir
        )
    return pairs_by_song


def write_manifest(pairs: list[MusicLyricPair], path: str | Path) -> None:
    """Line-delimited JSON, one pair per line, sorted for stable byte output."""
    ordered = sorted(pairs, key=lambda p: (p.song_id, p.clip_start))
    with open(path, "w") as fh:
        for pair in ordered:
            fh.write(json.dumps(asdict(pair), sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> list[MusicLyricPair]:
    pairs = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                pairs.append(MusicLyricPair(**json.loads(line)))
    return pairs


def write_split_file(
    train: list[MusicLyricPair], test: list[MusicLyricPair], path: str | Path
) -> None:
    assignment: dict[str, str] = {}
    for pair in train:
        assignment[pair.song_id] = "train"
    for pair in test:
        assignment[pair.song_id] = "test"
    Path(path).write_text(json.dumps(assignment, sort_keys=True, indent=2) + "\n")
