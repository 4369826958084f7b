"""Illustration backends: a deterministic procedural stub and a remote client.

Both expose the same contract: text_embed / draw_noise / generate /
image_embed. The stub renders a smooth cosine color field that is *linear*
in the text embedding over an orthonormal basis, so nearby inputs give
nearby images and image_embed can approximately invert the renderer,
making compatibility scoring exercisable end to end without a diffusion
service.
"""

from __future__ import annotations

import base64
import hashlib
import io
import os
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from lyrivid.errors import BackendError, ShapeError
from lyrivid.prompts import Prompt

ENV_ENDPOINT = "LYRIVID_BACKEND_URL"
ENV_API_KEY = "LYRIVID_BACKEND_API_KEY"

EMB_CONTRAST = 0.20  # per-channel pixel std contributed by the embedding
NOISE_CONTRAST = 0.08  # ditto for the latent noise
NOISE_FEATURES = 16


@dataclass(frozen=True)
class BackendDescriptor:
    kind: str = "stub"  # "stub" | "remote"
    embedding_dim: int = 64
    latent_shape: tuple[int, ...] = (4, 16, 16)
    image_size: int = 128
    endpoint: str = ""
    timeout: float = 30.0
    max_in_flight: int = 2
    seconds_per_illustration: float = 8.0  # planner budget input, not a constant

    def __post_init__(self):
        if self.embedding_dim <= 0 or self.image_size <= 0:
            raise ValueError("dimensions must be positive")
        if self.kind not in ("stub", "remote"):
            raise ValueError(f"unknown backend kind '{self.kind}'")


@dataclass(frozen=True)
class FrameProvenance:
    prompt_digest: str
    seed: int
    weight: float


@dataclass
class GenerationRequest:
    embedding: np.ndarray
    noise: np.ndarray
    guidance: dict = field(default_factory=dict)
    provenance: FrameProvenance | None = None


@dataclass
class IllustrationFrame:
    pixels: np.ndarray  # (H, W, 3) uint8
    provenance: FrameProvenance
    nsfw_flag: bool = False

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.pixels).tobytes()).hexdigest()

    def to_png_bytes(self) -> bytes:
        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGB").save(buf, format="PNG")
        return buf.getvalue()


def frame_from_png_bytes(data: bytes, provenance: FrameProvenance, nsfw: bool = False) -> IllustrationFrame:
    img = Image.open(io.BytesIO(data)).convert("RGB")
    return IllustrationFrame(pixels=np.asarray(img, dtype=np.uint8), provenance=provenance, nsfw_flag=nsfw)


def prompt_digest(prompt: Prompt) -> str:
    return hashlib.sha256(prompt.text.encode("utf-8")).hexdigest()


def _dct_rows(count: int, length: int) -> np.ndarray:
    """First `count` rows of the orthonormal DCT-II basis on `length` points."""
    grid = (2.0 * np.arange(length) + 1.0) / (2.0 * length)
    rows = np.cos(np.pi * np.outer(np.arange(count), grid))
    rows[0] *= np.sqrt(1.0 / length)
    rows[1:] *= np.sqrt(2.0 / length)
    return rows


def _frequency_pairs(count: int) -> list[tuple[int, int]]:
    """Lowest-frequency (p, q) pairs, DC excluded, ordered by (p+q, p)."""
    pairs = []
    s = 0
    while len(pairs) < count:
        s += 1
        for p in range(s + 1):
            pairs.append((p, s - p))
            if len(pairs) == count:
                break
    return pairs


class StubBackend:
    """Deterministic, network-free backend used by tests and stub runs."""

    PLACEHOLDER_NORM_FLOOR = 1e-6

    def __init__(self, descriptor: BackendDescriptor | None = None):
        self.descriptor = descriptor or BackendDescriptor(kind="stub")
        d = self.descriptor
        pairs = _frequency_pairs(d.embedding_dim + NOISE_FEATURES)
        self._emb_pairs = pairs[: d.embedding_dim]
        self._noise_pairs = pairs[d.embedding_dim :]
        max_p = max(p for p, _ in pairs) + 1
        max_q = max(q for _, q in pairs) + 1
        self._rows_y = _dct_rows(max_p, d.image_size)
        self._rows_x = _dct_rows(max_q, d.image_size)
        mixer_rng = np.random.RandomState(0xC0FFEE)
        mix = mixer_rng.standard_normal((len(pairs), 3))
        self._channel_mix = mix / np.linalg.norm(mix, axis=1, keepdims=True)
        self._emb_scale = EMB_CONTRAST * np.sqrt(3.0 * d.image_size * d.image_size)
        self._noise_scale = NOISE_CONTRAST * np.sqrt(3.0 * d.image_size * d.image_size)
        self.placeholder_embedding = np.full(d.embedding_dim, 1.0 / np.sqrt(d.embedding_dim))
        self.generate_latencies: list[float] = []

    # -- embeddings ---------------------------------------------------------

    def text_embed(self, prompt: Prompt) -> np.ndarray:
        """Seeded hash of the prompt text expanded to a unit vector."""
        if not prompt.text:
            raise ValueError("empty prompt")
        seed = int.from_bytes(hashlib.sha256(prompt.text.encode("utf-8")).digest()[:4], "big")
        vec = np.random.RandomState(seed).standard_normal(self.descriptor.embedding_dim)
        return vec / np.linalg.norm(vec)

    def draw_noise(self, seed: int) -> np.ndarray:
        return np.random.RandomState(seed % (2**32)).standard_normal(self.descriptor.latent_shape)

    # -- rendering ----------------------------------------------------------

    def _field(self, embedding: np.ndarray, noise: np.ndarray) -> np.ndarray:
        """Per-channel smooth field, shape (3, H, W), roughly in [-1, 1]."""
        d = self.descriptor
        nu = noise.reshape(-1)[:NOISE_FEATURES].astype(np.float64)
        nu_norm = np.linalg.norm(nu)
        if nu_norm > 0:
            nu = nu / nu_norm
        coeff_rows = np.concatenate([self._emb_scale * embedding, self._noise_scale * nu])
        fields = np.zeros((3, d.image_size, d.image_size))
        coeffs = np.zeros((3, self._rows_y.shape[0], self._rows_x.shape[0]))
        all_pairs = self._emb_pairs + self._noise_pairs
        for j, (p, q) in enumerate(all_pairs):
            coeffs[:, p, q] += coeff_rows[j] * self._channel_mix[j]
        for c in range(3):
            fields[c] = self._rows_y.T @ coeffs[c] @ self._rows_x
        return fields

    def generate(self, request: GenerationRequest) -> IllustrationFrame:
        d = self.descriptor
        embedding = np.asarray(request.embedding, dtype=np.float64)
        noise = np.asarray(request.noise, dtype=np.float64)
        if embedding.shape != (d.embedding_dim,):
            raise ShapeError(
                f"embedding shape {embedding.shape} does not match descriptor ({d.embedding_dim},)"
            )
        if noise.shape != d.latent_shape:
            raise ShapeError(f"noise shape {noise.shape} does not match descriptor {d.latent_shape}")
        started = time.perf_counter()
        provenance = request.provenance or FrameProvenance(
            prompt_digest=hashlib.sha256(embedding.tobytes()).hexdigest(), seed=0, weight=0.0
        )
        if request.guidance.get("stub_nsfw"):
            pixels = np.zeros((d.image_size, d.image_size, 3), dtype=np.uint8)
            self.generate_latencies.append(time.perf_counter() - started)
            return IllustrationFrame(pixels=pixels, provenance=provenance, nsfw_flag=True)
        fields = self._field(embedding, noise)
        pixels = np.clip(np.round((0.5 + fields) * 255.0), 0, 255).astype(np.uint8)
        pixels = np.moveaxis(pixels, 0, 2)
        self.generate_latencies.append(time.perf_counter() - started)
        return IllustrationFrame(pixels=pixels, provenance=provenance, nsfw_flag=False)

    def image_embed(self, frame: IllustrationFrame) -> np.ndarray:
        """Project the raster back onto the embedding basis (renderer inverse)."""
        d = self.descriptor
        f = frame.pixels.astype(np.float64) / 255.0 - 0.5
        recovered = np.empty(d.embedding_dim)
        # per-channel DCT coefficients, then undo the channel mixing
        coeffs = np.stack([self._rows_y @ f[:, :, c] @ self._rows_x.T for c in range(3)])
        for j, (p, q) in enumerate(self._emb_pairs):
            recovered[j] = float(self._channel_mix[j] @ coeffs[:, p, q])
        recovered /= self._emb_scale
        norm = np.linalg.norm(recovered)
        if norm < self.PLACEHOLDER_NORM_FLOOR:
            return self.placeholder_embedding.copy()
        return recovered / norm


class RemoteBackend:
    """JSON-over-HTTP client for a diffusion service.

    Retries transient failures (timeouts, 5xx) up to three times with
    exponential backoff; a concurrency cap protects single-GPU services.
    An NSFW rejection comes back as a flagged placeholder frame rather
    than an error, so the pipeline can substitute it.
    """

    MAX_ATTEMPTS = 3
    BACKOFF_BASE = 0.5

    def __init__(self, descriptor: BackendDescriptor, client=None):
        import httpx

        if descriptor.kind != "remote":
            raise ValueError("RemoteBackend needs a remote descriptor")
        endpoint = descriptor.endpoint or os.environ.get(ENV_ENDPOINT, "")
        if not endpoint:
            raise BackendError(f"no endpoint configured; set {ENV_ENDPOINT}")
        headers = {}
        api_key = os.environ.get(ENV_API_KEY)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self.descriptor = descriptor
        self._client = client or httpx.Client(
            base_url=endpoint, timeout=descriptor.timeout, headers=headers
        )
        self._gate = threading.Semaphore(descriptor.max_in_flight)
        self.generate_latencies: list[float] = []

    def _post(self, path: str, payload: dict) -> dict:
        import httpx

        last_error: Exception | None = None
        for attempt in range(self.MAX_ATTEMPTS):
            try:
                with self._gate:
                    response = self._client.post(path, json=payload)
                if response.status_code >= 500:
                    last_error = BackendError(f"{path} returned {response.status_code}")
                elif response.status_code >= 400:
                    raise BackendError(f"{path} rejected request: {response.text[:200]}")
                else:
                    return response.json()
            except (httpx.TimeoutException, httpx.TransportError) as exc:
                last_error = exc
            if attempt < self.MAX_ATTEMPTS - 1:
                time.sleep(self.BACKOFF_BASE * (2**attempt))
        raise BackendError(f"{path} failed after {self.MAX_ATTEMPTS} attempts: {last_error}")

    def text_embed(self, prompt: Prompt) -> np.ndarray:
        if not prompt.text:
            raise ValueError("empty prompt")
        payload = self._post("/embed_text", {"prompt": prompt.text})
        vec = np.asarray(payload["embedding"], dtype=np.float64)
        if vec.shape != (self.descriptor.embedding_dim,):
            raise ShapeError(f"service returned embedding of shape {vec.shape}")
        return vec

    def draw_noise(self, seed: int) -> np.ndarray:
        # noise is drawn locally so plans stay reproducible from seeds alone
        return np.random.RandomState(seed % (2**32)).standard_normal(self.descriptor.latent_shape)

    def generate(self, request: GenerationRequest) -> IllustrationFrame:
        d = self.descriptor
        started = time.perf_counter()
        payload = {
            "embedding": np.asarray(request.embedding, dtype=np.float64).tolist(),
            "noise": np.asarray(request.noise, dtype=np.float64).reshape(-1).tolist(),
            "width": d.image_size,
            "height": d.image_size,
            **request.guidance,
        }
        provenance = request.provenance or FrameProvenance(prompt_digest="", seed=0, weight=0.0)
        result = self._post("/generate", payload)
        self.generate_latencies.append(time.perf_counter() - started)
        if result.get("nsfw"):
            pixels = np.zeros((d.image_size, d.image_size, 3), dtype=np.uint8)
            return IllustrationFrame(pixels=pixels, provenance=provenance, nsfw_flag=True)
        png = base64.b64decode(result["image"])
        return frame_from_png_bytes(png, provenance, nsfw=False)

    def image_embed(self, frame: IllustrationFrame) -> np.ndarray:
        payload = {"image": base64.b64encode(frame.to_png_bytes()).decode("ascii")}
        result = self._post("/embed_image", payload)
        return np.asarray(result["embedding"], dtype=np.float64)


def make_backend(descriptor: BackendDescriptor):
    if descriptor.kind == "stub":
        return StubBackend(descriptor)
    return RemoteBackend(descriptor)
