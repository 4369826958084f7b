"""Service configuration: JSON file with environment overrides."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from lyrivid.backend import BackendDescriptor

MAX_UPLOAD_BYTES = 50 * 1024 * 1024
MAX_AUDIO_SECONDS = 600.0


@dataclass
class ServiceConfig:
    root: str = "./lyrivid-data"
    host: str = "127.0.0.1"
    port: int = 8765
    checkpoint: str | None = None
    workers: int = 1
    backend: BackendDescriptor = field(default_factory=BackendDescriptor)
    max_upload_bytes: int = MAX_UPLOAD_BYTES
    max_audio_seconds: float = MAX_AUDIO_SECONDS
    ui_dir: str | None = None
    fps: int = 12
    alternatives: int = 3

    @classmethod
    def load(cls, path: str | Path | None = None) -> "ServiceConfig":
        payload: dict = {}
        if path is not None:
            payload = json.loads(Path(path).read_text())
        backend_payload = payload.pop("backend", {})
        config = cls(**payload)
        if backend_payload:
            if "latent_shape" in backend_payload:
                backend_payload["latent_shape"] = tuple(backend_payload["latent_shape"])
            config.backend = BackendDescriptor(**backend_payload)

        env = os.environ
        if env.get("LYRIVID_ROOT"):
            config.root = env["LYRIVID_ROOT"]
        if env.get("LYRIVID_PORT"):
            config.port = int(env["LYRIVID_PORT"])
        if env.get("LYRIVID_HOST"):
            config.host = env["LYRIVID_HOST"]
        if env.get("LYRIVID_CHECKPOINT"):
            config.checkpoint = env["LYRIVID_CHECKPOINT"]
        if env.get("LYRIVID_BACKEND_URL"):
            config.backend = BackendDescriptor(
                kind="remote",
                embedding_dim=config.backend.embedding_dim,
                latent_shape=config.backend.latent_shape,
                image_size=config.backend.image_size,
                endpoint=env["LYRIVID_BACKEND_URL"],
                timeout=config.backend.timeout,
            )
        return config
