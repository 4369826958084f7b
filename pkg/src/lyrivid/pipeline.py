"""End-to-end orchestration with per-stage content-addressed caching.

audio -> clips -> mel -> lyric lines (chained context) -> prompts ->
percussive beat weights -> interpolation plans -> keyframes (+ alternate
candidates per illustration) -> timeline -> morph -> video.

Every stage result is cached under a digest of its inputs, so editor
actions (reorder, substitute) leave lyric generation and frame generation
untouched and only the compositor re-runs.
"""

from __future__ import annotations

import hashlib
import json
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from lyrivid.audio import (
    AudioBuffer,
    beat_weights,
    load_audio,
    mel_spectrogram,
    MelSpectrogramParams,
    percussive_component,
    segment_clips,
)
from lyrivid.backend import FrameProvenance, GenerationRequest, prompt_digest
from lyrivid.compositor import (
    TimelineConfig,
    VideoSpec,
    build_timeline,
    endpoint_frame_id,
    interpolated_frame_id,
    render_video,
    webvtt,
)
from lyrivid.errors import StageError, ValidationError
from lyrivid.interpolation import build_plan, noise_seed
from lyrivid.lyrics import SamplingConfig, decode_line, load_checkpoint
from lyrivid.lyrics.vocab import START
from lyrivid.prompts import Prompt, PromptSpec, assemble_prompt, validate_keywords

SCHEMA_VERSION = 1


def canonical_digest(payload) -> str:
    """sha256 of a canonical-JSON rendering of the payload."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def derive_seed(base_seed: int, *scope) -> int:
    key = ":".join([str(base_seed)] + [str(s) for s in scope]).encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "big")


# ---------------------------------------------------------------------------
# Project state


@dataclass
class LyricLineState:
    index: int
    start: float
    text: str


@dataclass
class IllustrationState:
    """Per lyric line: the endpoint illustration and its alternates."""

    index: int
    candidate_ids: list[str]
    chosen_id: str


@dataclass
class Project:
    id: str
    audio_path: str
    keywords: list = field(default_factory=list)  # [category, keyword] pairs
    seed: int = 0
    clip_seconds: float = 5.0
    fps: int = 12
    alternatives: int = 3
    subtitle_burn_in: bool = False
    frame_budget_seconds: float | None = None  # caps keyframes per segment when set
    lyric_lines: list = field(default_factory=list)  # LyricLineState
    illustrations: list = field(default_factory=list)  # IllustrationState
    ordering: list = field(default_factory=list)  # permutation over transition segments
    video_path: str | None = None
    subtitles_path: str | None = None
    manifest_path: str | None = None
    duration_seconds: float | None = None
    needs_render: bool = False
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def new(cls, audio_path: str, **kwargs) -> "Project":
        return cls(id=uuid.uuid4().hex[:12], audio_path=audio_path, **kwargs)

    def to_payload(self) -> dict:
        payload = asdict(self)
        payload["lyric_lines"] = [asdict(l) if not isinstance(l, dict) else l for l in self.lyric_lines]
        payload["illustrations"] = [
            asdict(s) if not isinstance(s, dict) else s for s in self.illustrations
        ]
        return payload

    @classmethod
    def from_payload(cls, payload: dict) -> "Project":
        data = dict(payload)
        data["lyric_lines"] = [LyricLineState(**l) for l in payload.get("lyric_lines", [])]
        data["illustrations"] = [IllustrationState(**s) for s in payload.get("illustrations", [])]
        return cls(**data)

    def transition_count(self) -> int:
        return max(len(self.lyric_lines) - 1, 1) if self.lyric_lines else 1


# ---------------------------------------------------------------------------
# Stage cache


class StageCache:
    """Content-addressed map from (stage, input digest) to artifact files."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.hits: dict[str, int] = {}
        self.misses: dict[str, int] = {}

    def _path(self, stage: str, digest: str, ext: str) -> Path:
        stage_dir = self.root / stage
        stage_dir.mkdir(parents=True, exist_ok=True)
        return stage_dir / f"{digest}.{ext}"

    def get_or_compute(self, stage: str, key_payload, producer, ext: str = "json"):
        """Replay the cached artifact or run the producer and persist it."""
        digest = canonical_digest(key_payload)
        path = self._path(stage, digest, ext)
        if path.exists():
            self.hits[stage] = self.hits.get(stage, 0) + 1
            return self._load(path, ext)
        self.misses[stage] = self.misses.get(stage, 0) + 1
        try:
            value = producer()
        except Exception as exc:
            raise StageError(stage, digest, exc) from exc
        self._store(path, value, ext)
        return value

    @staticmethod
    def _store(path: Path, value, ext: str) -> None:
        tmp = path.with_suffix(path.suffix + ".tmp")
        if ext == "json":
            tmp.write_text(json.dumps(value, sort_keys=True))
        elif ext == "npz":
            with open(tmp, "wb") as fh:
                np.savez(fh, **value)
        elif ext == "npy":
            with open(tmp, "wb") as fh:
                np.save(fh, value)
        else:
            raise ValueError(f"unknown artifact kind {ext}")
        tmp.replace(path)

    @staticmethod
    def _load(path: Path, ext: str):
        if ext == "json":
            return json.loads(path.read_text())
        if ext == "npz":
            with np.load(path) as data:
                return {k: data[k] for k in data.files}
        if ext == "npy":
            return np.load(path)
        raise ValueError(f"unknown artifact kind {ext}")

    def counters(self) -> dict:
        return {"hits": dict(self.hits), "misses": dict(self.misses)}

    def reset_counters(self) -> None:
        self.hits.clear()
        self.misses.clear()


@dataclass
class RunReport:
    executions: dict
    cache_hits: dict

    def total_executions(self) -> int:
        return sum(self.executions.values())


# ---------------------------------------------------------------------------
# Model handle


@dataclass
class ModelHandle:
    model: object
    vocab: object
    digest: str

    @classmethod
    def from_checkpoint(cls, path: str | Path) -> "ModelHandle":
        model, vocab = load_checkpoint(path)
        digest = hashlib.sha256(Path(path).read_bytes()).hexdigest()
        return cls(model=model, vocab=vocab, digest=digest)


# ---------------------------------------------------------------------------
# Pipeline


def apply_edit(project: Project, edit: dict) -> Project:
    """Apply a reorder or substitution edit; compositor-only invalidation.

    edit = {"kind": "reorder", "ordering": [...]} or
    {"kind": "substitute", "segment": i, "candidate_id": "..."}.
    """
    kind = edit.get("kind")
    if kind == "reorder":
        ordering = list(edit["ordering"])
        expected = sorted(range(len(project.ordering)))
        if sorted(ordering) != expected:
            offenders = [i for i in ordering if i not in expected] + [
                i for i in expected if i not in ordering
            ]
            raise ValidationError(
                f"ordering must be a permutation of 0..{len(project.ordering) - 1}; "
                f"offending indices: {sorted(set(offenders))}"
            )
        if ordering != project.ordering:
            project.ordering = ordering
            project.needs_render = True
    elif kind == "substitute":
        index = edit["segment"]
        candidate = edit["candidate_id"]
        slots = {s.index: s for s in project.illustrations}
        if index not in slots:
            raise ValidationError(f"unknown segment index {index}")
        slot = slots[index]
        if candidate not in slot.candidate_ids:
            raise ValidationError(
                f"candidate '{candidate}' does not belong to segment {index}; "
                f"valid ids: {slot.candidate_ids}"
            )
        if slot.chosen_id != candidate:
            slot.chosen_id = candidate
            project.needs_render = True
    else:
        raise ValidationError(f"unknown edit kind '{kind}'")
    return project


class PipelineRunner:
    """Owns one project during execution; stages cached in the project dir."""

    STAGE_WEIGHTS = (
        ("audio", 0.05),
        ("clips", 0.05),
        ("mel", 0.10),
        ("lyrics", 0.20),
        ("beats", 0.15),
        ("plans", 0.05),
        ("frames", 0.20),
        ("compose", 0.10),
        ("render", 0.10),
    )

    def __init__(self, project: Project, backend, model_handle: ModelHandle, project_dir: str | Path, progress=None):
        self.project = project
        self.backend = backend
        self.handle = model_handle
        self.dir = Path(project_dir)
        self.cache = StageCache(self.dir / "cache")
        self.progress = progress or (lambda fraction, stage: None)
        self.mel_params = MelSpectrogramParams()

    def _tick(self, stage: str) -> None:
        done = 0.0
        for name, weight in self.STAGE_WEIGHTS:
            done += weight
            if name == stage:
                break
        self.progress(min(done, 1.0), stage)

    def keyframes_per_segment(self) -> int:
        """5 per the every-5-seconds design, capped by the generation budget."""
        default = 5
        budget = self.project.frame_budget_seconds
        if budget is None:
            return default
        per_frame = max(self.backend.descriptor.seconds_per_illustration, 1e-9)
        return max(2, min(default, int(budget // per_frame)))

    def run(self) -> RunReport:
        violations = validate_keywords(self.project.keywords)
        if violations:
            raise ValidationError("; ".join(v.describe() for v in violations))
        self.cache.reset_counters()
        project = self.project

        audio, audio_digest = self._stage_audio()
        project.duration_seconds = audio.duration_seconds
        self._tick("audio")
        clips, clips_digest = self._stage_clips(audio, audio_digest)
        self._tick("clips")
        mels, mel_digests = self._stage_mels(clips, clips_digest)
        self._tick("mel")
        lines = self._stage_lyrics(mel_digests, mels)
        self._tick("lyrics")
        project.lyric_lines = [
            LyricLineState(index=i, start=i * project.clip_seconds, text=text)
            for i, text in enumerate(lines)
        ]
        prompts = [self._prompt_for(text) for text in lines]
        envelopes = self._stage_beats(clips, clips_digest)
        self._tick("beats")
        plans = self._stage_plans(prompts, envelopes)
        self._tick("plans")
        frames_by_id = self._stage_frames(prompts, plans)
        self._tick("frames")

        if not project.ordering or len(project.ordering) != project.transition_count():
            project.ordering = list(range(project.transition_count()))
        if not project.illustrations:
            raise StageError("frames", "-", RuntimeError("no illustrations generated"))

        video_rel, subs_rel, manifest_rel = self._stage_compose(audio, audio_digest, frames_by_id)
        project.video_path = video_rel
        project.subtitles_path = subs_rel
        project.manifest_path = manifest_rel
        project.needs_render = False
        return RunReport(executions=dict(self.cache.misses), cache_hits=dict(self.cache.hits))

    # -- stages -------------------------------------------------------------

    def _stage_audio(self) -> tuple[AudioBuffer, str]:
        audio_file = self.dir / self.project.audio_path
        file_digest = hashlib.sha256(audio_file.read_bytes()).hexdigest()
        key = {"stage": "audio", "file": file_digest, "rate": 16000}

        def produce():
            buffer = load_audio(audio_file)
            return {"samples": buffer.samples, "rate": np.array(buffer.sample_rate)}

        data = self.cache.get_or_compute("audio", key, produce, ext="npz")
        buffer = AudioBuffer(samples=data["samples"], sample_rate=int(data["rate"]))
        return buffer, canonical_digest(key)

    def _stage_clips(self, audio: AudioBuffer, audio_digest: str) -> tuple[list[AudioBuffer], str]:
        key = {"stage": "clips", "audio": audio_digest, "clip_seconds": self.project.clip_seconds}

        def produce():
            clips = segment_clips(audio, self.project.clip_seconds)
            return {"stack": np.stack([c.samples for c in clips]), "rate": np.array(audio.sample_rate)}

        data = self.cache.get_or_compute("clips", key, produce, ext="npz")
        rate = int(data["rate"])
        clips = [AudioBuffer(samples=row, sample_rate=rate) for row in data["stack"]]
        return clips, canonical_digest(key)

    def _stage_mels(self, clips, clips_digest: str):
        mels, digests = [], []
        for i in range(len(clips)):
            key = {"stage": "mel", "clips": clips_digest, "index": i, "params": asdict(self.mel_params)}

            def produce(clip=clips[i]):
                return mel_spectrogram(clip, self.mel_params).matrix

            mels.append(self.cache.get_or_compute("mel", key, produce, ext="npy"))
            digests.append(canonical_digest(key))
        return mels, digests

    def _stage_lyrics(self, mel_digests, mels) -> list[str]:
        project = self.project
        lines: list[str] = []
        previous = START
        for i, (mel, mel_digest) in enumerate(zip(mels, mel_digests)):
            sampling = SamplingConfig(seed=derive_seed(project.seed, "lyric", i))
            key = {
                "stage": "lyric",
                "model": self.handle.digest,
                "mel": mel_digest,
                "previous": previous,
                "sampling": asdict(sampling),
                "latent_seed": derive_seed(project.seed, "latent", i),
            }

            def produce(mel=mel, previous=previous, sampling=sampling, i=i):
                state = self.handle.model.posterior(
                    mel, seed=derive_seed(project.seed, "latent", i)
                )
                context = self.handle.vocab.encode(previous) or [self.handle.vocab.unk_id]
                line = decode_line(
                    self.handle.model, state.z, context, sampling, self.handle.vocab
                )
                return {"text": line.text}

            result = self.cache.get_or_compute("lyric", key, produce, ext="json")
            lines.append(result["text"])
            previous = result["text"]  # chained context, even if empty
        return lines

    def _prompt_for(self, lyric: str) -> Prompt:
        text = lyric if lyric.strip() else "(instrumental)"  # empty decode still needs a prompt
        spec = PromptSpec(lyric=text, keywords=tuple(tuple(k) for k in self.project.keywords))
        return assemble_prompt(spec)

    def _stage_beats(self, clips, clips_digest: str):
        steps = self.keyframes_per_segment() - 1  # interpolated frames + far endpoint
        envelopes = []
        for i in range(len(clips)):
            key = {
                "stage": "beats",
                "clips": clips_digest,
                "index": i,
                "steps": steps,
                "params": asdict(self.mel_params),
            }

            def produce(clip=clips[i]):
                perc = percussive_component(clip)
                envelope = beat_weights(mel_spectrogram(perc, self.mel_params), steps)
                return {"weights": list(envelope.weights)}

            data = self.cache.get_or_compute("beats", key, produce, ext="json")
            from lyrivid.audio.beats import BeatEnvelope

            envelopes.append(BeatEnvelope(weights=tuple(data["weights"])))
        return envelopes

    def _stage_plans(self, prompts, envelopes):
        project = self.project
        plans = []
        for s in range(max(len(prompts) - 1, 0)):
            seeds = (noise_seed(project.seed, s), noise_seed(project.seed, s + 1))
            key = {
                "stage": "plan",
                "backend": asdict(self.backend.descriptor),
                "prompt_i": prompts[s].text,
                "prompt_j": prompts[s + 1].text,
                "weights": list(envelopes[s].weights),
                "seeds": list(seeds),
            }

            def produce(s=s, seeds=seeds):
                plan = build_plan(
                    prompts[s], prompts[s + 1], envelopes[s], self.backend, seeds, segment_index=s
                )
                return {"embeddings": plan.embeddings, "noises": plan.noises,
                        "weights": np.array(plan.weights)}

            plans.append(self.cache.get_or_compute("plan", key, produce, ext="npz"))
        return plans

    def _generate_frame(self, embedding, noise, provenance: FrameProvenance) -> np.ndarray:
        key = {
            "stage": "frame",
            "backend": asdict(self.backend.descriptor),
            "embedding": hashlib.sha256(np.ascontiguousarray(embedding).tobytes()).hexdigest(),
            "noise": hashlib.sha256(np.ascontiguousarray(noise).tobytes()).hexdigest(),
        }

        def produce():
            frame = self.backend.generate(
                GenerationRequest(embedding=embedding, noise=noise, provenance=provenance)
            )
            return {"pixels": frame.pixels, "nsfw": np.array(int(frame.nsfw_flag))}

        data = self.cache.get_or_compute("frame", key, produce, ext="npz")
        nsfw = bool(int(data["nsfw"]))
        return data["pixels"], nsfw

    def _stage_frames(self, prompts, plans) -> dict[str, np.ndarray]:
        project = self.project
        frames: dict[str, np.ndarray] = {}
        illustrations: list[IllustrationState] = []
        chosen_by_index = {s.index: s.chosen_id for s in project.illustrations}

        for i, prompt in enumerate(prompts):
            embedding = self.backend.text_embed(prompt)
            digest = prompt_digest(prompt)
            candidate_ids = []
            last_good = None
            for variant in range(project.alternatives + 1):
                seed = noise_seed(project.seed, i, variant)
                noise = self.backend.draw_noise(seed)
                provenance = FrameProvenance(prompt_digest=digest, seed=seed, weight=0.0)
                pixels, nsfw = self._generate_frame(embedding, noise, provenance)
                candidate_id = f"line{i:04d}-cand{variant}"
                if nsfw and last_good is not None:
                    pixels = last_good  # exclusion practice: substitute the flagged frame
                frames[candidate_id] = pixels
                candidate_ids.append(candidate_id)
                if not nsfw:
                    last_good = pixels
            chosen = chosen_by_index.get(i, candidate_ids[0])
            if chosen not in candidate_ids:
                chosen = candidate_ids[0]
            illustrations.append(
                IllustrationState(index=i, candidate_ids=candidate_ids, chosen_id=chosen)
            )

        for s, plan in enumerate(plans):
            digest_i = prompt_digest(prompts[s])
            weights = plan["weights"]
            last_good = frames[illustrations[s].candidate_ids[0]]
            for step in range(len(weights)):
                provenance = FrameProvenance(
                    prompt_digest=digest_i,
                    seed=noise_seed(project.seed, s),
                    weight=float(weights[step]),
                )
                pixels, nsfw = self._generate_frame(
                    plan["embeddings"][step], plan["noises"][step], provenance
                )
                if nsfw:
                    pixels = last_good
                else:
                    last_good = pixels
                frames[f"plan{s:04d}-step{step + 1}"] = pixels

        project.illustrations = illustrations
        self._export_frame_images(frames)
        return frames

    def _export_frame_images(self, frames: dict[str, np.ndarray]) -> None:
        """PNG copies of every generated frame, addressable by id (editor views)."""
        from PIL import Image

        frames_dir = self.dir / "frames"
        frames_dir.mkdir(parents=True, exist_ok=True)
        for frame_id, pixels in frames.items():
            path = frames_dir / f"{frame_id}.png"
            if not path.exists():
                Image.fromarray(pixels, mode="RGB").save(path)

    def _resolve_display_frames(self, frames: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Map timeline frame ids to rasters, honoring ordering and choices."""
        project = self.project
        chosen = {s.index: s.chosen_id for s in project.illustrations}
        resolved: dict[str, np.ndarray] = {}
        n_lines = len(project.lyric_lines)
        if n_lines <= 1:
            resolved[endpoint_frame_id(0)] = frames[chosen[0]]
            return resolved
        keyframes = self.keyframes_per_segment()
        for display_pos, source in enumerate(project.ordering):
            resolved[endpoint_frame_id(display_pos)] = frames[chosen[source]]
            for step in range(1, keyframes):
                resolved[interpolated_frame_id(display_pos, step)] = frames[
                    f"plan{source:04d}-step{step}"
                ]
        # terminal hold shows the end of the last displayed transition
        last_source = project.ordering[-1]
        resolved[endpoint_frame_id(n_lines - 1)] = frames[
            f"plan{last_source:04d}-step{keyframes - 1}"
        ]
        return resolved

    def _stage_compose(self, audio: AudioBuffer, audio_digest: str, frames: dict[str, np.ndarray]):
        project = self.project
        duration = audio.duration_seconds
        lines = [(l.start, l.text) for l in project.lyric_lines] or [(0.0, "")]
        timeline = build_timeline(
            lines,
            duration,
            TimelineConfig(fps=project.fps, keyframes_per_segment=self.keyframes_per_segment()),
        )
        self._tick("compose")

        display = self._resolve_display_frames(frames)
        frame_ids = {
            k.frame_id: hashlib.sha256(np.ascontiguousarray(display[k.frame_id]).tobytes()).hexdigest()
            for k in timeline.all_keyframes()
        }
        key = {
            "stage": "render",
            "audio": audio_digest,
            "fps": project.fps,
            "burn_in": project.subtitle_burn_in,
            "ordering": project.ordering,
            "frames": frame_ids,
            "lines": [[l.start, l.text] for l in project.lyric_lines],
        }
        video_path = self.dir / "video.mp4"
        subs_path = self.dir / "subtitles.vtt"
        manifest_path = self.dir / "manifest.json"

        def produce():
            spec = VideoSpec(
                output_path=str(video_path),
                fps=project.fps,
                resolution=self.backend.descriptor.image_size,
                subtitle_burn_in=project.subtitle_burn_in,
            )
            result = render_video(timeline, audio, spec, display)
            subs_path.write_text(webvtt(timeline))
            manifest_path.write_text(result.manifest_json())
            return {"manifest": result.manifest}

        if not video_path.exists():  # cache entry without its artifact is stale
            stale = self.cache._path("render", canonical_digest(key), "json")
            stale.unlink(missing_ok=True)
        self.cache.get_or_compute("render", key, produce, ext="json")
        self._tick("render")
        return video_path.name, subs_path.name, manifest_path.name


def run_pipeline(
    project: Project,
    backend,
    model_handle: ModelHandle,
    project_dir: str | Path,
    progress=None,
) -> RunReport:
    return PipelineRunner(project, backend, model_handle, project_dir, progress=progress).run()
