"""Interpolation between adjacent prompts.

Text embeddings move linearly; latent noises move along the great circle
(slerp), with the angle computed on unit-normalized flattened copies and
clamped before arccos. Weights come from the beat envelope, so the walk
through latent space accelerates on percussive hits.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from lyrivid.audio.beats import BeatEnvelope
from lyrivid.errors import BackendError, ShapeError
from lyrivid.prompts import Prompt

PARALLEL_SIN_THRESHOLD = 1e-6


def lerp_embeddings(e_i: np.ndarray, e_j: np.ndarray, w: float) -> np.ndarray:
    """e_i + w * (e_j - e_i), the exact affine combination."""
    e_i = np.asarray(e_i, dtype=np.float64)
    e_j = np.asarray(e_j, dtype=np.float64)
    if e_i.shape != e_j.shape:
        raise ShapeError(f"embedding dimensions differ: {e_i.shape} vs {e_j.shape}")
    if not (0.0 <= w <= 1.0):
        raise ValueError("weight must lie in [0, 1]")
    return e_i + w * (e_j - e_i)


def _lerp_rescaled(n_i: np.ndarray, n_j: np.ndarray, w: float) -> np.ndarray:
    """Fallback for (anti)parallel noises: lerp, rescaled to the lerped magnitude."""
    mixed = (1.0 - w) * n_i + w * n_j
    target = (1.0 - w) * np.linalg.norm(n_i) + w * np.linalg.norm(n_j)
    norm = np.linalg.norm(mixed)
    if norm < 1e-12:
        # antiparallel midpoint: direction degenerates, hold the first endpoint's
        direction = n_i / max(np.linalg.norm(n_i), 1e-12)
        return direction * target
    return mixed * (target / norm)


def slerp_noise(n_i: np.ndarray, n_j: np.ndarray, w: float) -> np.ndarray:
    """Spherical linear interpolation between two noise tensors."""
    n_i = np.asarray(n_i, dtype=np.float64)
    n_j = np.asarray(n_j, dtype=np.float64)
    if n_i.shape != n_j.shape:
        raise ShapeError(f"noise shapes differ: {n_i.shape} vs {n_j.shape}")
    if not (0.0 <= w <= 1.0):
        raise ValueError("weight must lie in [0, 1]")
    flat_i = n_i.reshape(-1)
    flat_j = n_j.reshape(-1)
    norm_i = np.linalg.norm(flat_i)
    norm_j = np.linalg.norm(flat_j)
    if norm_i == 0.0 or norm_j == 0.0:
        return _lerp_rescaled(n_i, n_j, w)
    cos_omega = float(np.clip(flat_i @ flat_j / (norm_i * norm_j), -1.0, 1.0))
    omega = np.arccos(cos_omega)
    sin_omega = np.sin(omega)
    if sin_omega < PARALLEL_SIN_THRESHOLD:
        return _lerp_rescaled(n_i, n_j, w)
    return (np.sin((1.0 - w) * omega) / sin_omega) * n_i + (np.sin(w * omega) / sin_omega) * n_j


@dataclass(frozen=True)
class InterpolationPlan:
    """Per-step (embedding, noise) pairs between two adjacent prompts."""

    segment_index: int
    prompt_i: str
    prompt_j: str
    weights: tuple[float, ...]
    embeddings: np.ndarray  # (N, dim)
    noises: np.ndarray  # (N, *latent_shape)
    seed_i: int
    seed_j: int

    @property
    def steps(self) -> int:
        return len(self.weights)

    def manifest(self) -> dict:
        """JSON-serializable summary for the regenerate-one-segment flow."""
        return {
            "segment_index": self.segment_index,
            "weights": list(self.weights),
            "seeds": [self.seed_i, self.seed_j],
            "embedding_digests": [
                hashlib.sha256(np.ascontiguousarray(e).tobytes()).hexdigest()
                for e in self.embeddings
            ],
        }

    def manifest_json(self) -> str:
        return json.dumps(self.manifest(), indent=2)


def noise_seed(project_seed: int, prompt_index: int, variant: int = 0) -> int:
    """Stable per-prompt seed so any single segment regenerates identically."""
    key = f"{project_seed}:{prompt_index}:{variant}".encode()
    return int.from_bytes(hashlib.sha256(key).digest()[:4], "big")


def build_plan(
    prompt_i: Prompt,
    prompt_j: Prompt,
    envelope: BeatEnvelope,
    backend,
    seeds: tuple[int, int],
    segment_index: int = 0,
) -> InterpolationPlan:
    """Embed both endpoints once and lay out N interpolated pairs."""
    try:
        e_i = backend.text_embed(prompt_i)
        e_j = backend.text_embed(prompt_j)
    except Exception as exc:
        raise BackendError(f"prompt embedding failed: {exc}") from exc
    n_i = backend.draw_noise(seeds[0])
    n_j = backend.draw_noise(seeds[1])
    embeddings = np.stack([lerp_embeddings(e_i, e_j, w) for w in envelope.weights])
    noises = np.stack([slerp_noise(n_i, n_j, w) for w in envelope.weights])
    return InterpolationPlan(
        segment_index=segment_index,
        prompt_i=prompt_i.text,
        prompt_j=prompt_j.text,
        weights=envelope.weights,
        embeddings=embeddings,
        noises=noises,
        seed_i=seeds[0],
        seed_j=seeds[1],
    )
