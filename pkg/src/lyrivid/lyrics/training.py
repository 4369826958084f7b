"""Training loop, KL-weight schedule, and checkpoint IO."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import torch

from lyrivid.errors import CheckpointError
from lyrivid.lyrics.model import (
    DecoderConfig,
    LyricVae,
    MusicEncoderConfig,
    kl_divergence,
    sample_latent,
)
from lyrivid.lyrics.vocab import TokenVocab


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 40
    batch_size: int = 32
    learning_rate: float = 5e-5
    beta_floor: float = 1e-5
    beta_warm_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.beta_warm_fraction < 1.0):
            raise ValueError("beta_warm_fraction must lie in (0, 1)")
        if self.beta_floor <= 0:
            raise ValueError("beta_floor must be positive")


def beta_schedule(progress: float, config: TrainConfig) -> float:
    """KL weight: held at the floor for the warm fraction, then linear to 1.

    beta(1.0) is exactly 1.0.
    """
    if not (0.0 <= progress <= 1.0):
        raise ValueError("progress must lie in [0, 1]")
    if progress <= config.beta_warm_fraction:
        return config.beta_floor
    ramp = (progress - config.beta_warm_fraction) / (1.0 - config.beta_warm_fraction)
    return config.beta_floor + ramp * (1.0 - config.beta_floor)


@dataclass
class EpochStats:
    epoch: int
    reconstruction: float
    kl: float
    beta: float
    total: float

    def as_json_line(self) -> str:
        return json.dumps(asdict(self))


def _encode_example(vocab: TokenVocab, previous_line: str, target_line: str) -> tuple[list[int], int]:
    """Token sequence [prev..., <END>, target..., <END>] and the target offset."""
    prev_ids = vocab.encode(previous_line) + [vocab.end_id]
    target_ids = vocab.encode(target_line) + [vocab.end_id]
    return prev_ids + target_ids, len(prev_ids)


def _as_mel_tensor(mel, dtype) -> torch.Tensor:
    matrix = getattr(mel, "matrix", mel)
    return torch.as_tensor(np.asarray(matrix), dtype=dtype)


def batch_loss(
    model: LyricVae,
    batch: list[tuple],
    vocab: TokenVocab,
    beta: float,
    epsilons: torch.Tensor | None = None,
):
    """Masked token cross-entropy plus beta-weighted KL for one batch.

    epsilons pins the reparameterization noise (used by the gradient
    check); otherwise fresh standard normal draws are used.
    """
    dtype = next(model.parameters()).dtype
    mels = [_as_mel_tensor(mel, dtype) for mel, _, _ in batch]
    if all(m.shape == mels[0].shape for m in mels):
        h = model.encoder(torch.stack(mels))
    else:
        h = torch.stack([model.encoder(m) for m in mels])
    mu, sigma = model.latent_head(h)
    if epsilons is None:
        epsilons = torch.randn(mu.shape, dtype=dtype)
    z = sample_latent(mu, sigma, epsilon=epsilons)

    encoded = [_encode_example(vocab, prev, target) for _, prev, target in batch]
    max_len = max(len(seq) for seq, _ in encoded)
    tokens = torch.full((len(batch), max_len), vocab.pad_id, dtype=torch.long)
    loss_mask = torch.zeros((len(batch), max_len), dtype=torch.bool)
    for i, (seq, offset) in enumerate(encoded):
        tokens[i, : len(seq)] = torch.tensor(seq, dtype=torch.long)
        loss_mask[i, offset : len(seq)] = True  # predict target positions only

    logits = model.decoder(tokens[:, :-1], z)
    log_probs = torch.log_softmax(logits, dim=-1)
    targets = tokens[:, 1:]
    picked = log_probs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
    mask = loss_mask[:, 1:]
    reconstruction = -(picked * mask).sum() / mask.sum()
    kl = kl_divergence(mu, sigma).mean()
    total = reconstruction + beta * kl.to(dtype)
    return total, reconstruction, kl


def train(
    dataset: list[tuple],
    config: TrainConfig,
    vocab: TokenVocab,
    music_config: MusicEncoderConfig | None = None,
    decoder_config: DecoderConfig | None = None,
    model: LyricVae | None = None,
    log_path: str | Path | None = None,
    progress_callback=None,
) -> tuple[LyricVae, list[EpochStats]]:
    """Minimize reconstruction + beta * KL over (mel, previous, target) triples.

    Seeded and single-threaded, so runs are reproducible. Appends one JSON
    record per epoch to log_path when given.
    """
    if not dataset:
        raise ValueError("empty training dataset")
    torch.manual_seed(config.seed)
    if model is None:
        model = LyricVae(
            music_config or MusicEncoderConfig(),
            decoder_config or DecoderConfig(),
            vocab_size=len(vocab),
        )
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    shuffler = torch.Generator().manual_seed(config.seed)
    history: list[EpochStats] = []
    log_handle = open(log_path, "a") if log_path else None
    try:
        for epoch in range(config.epochs):
            progress = epoch / (config.epochs - 1) if config.epochs > 1 else 1.0
            beta = beta_schedule(progress, config)
            order = torch.randperm(len(dataset), generator=shuffler).tolist()
            model.train()
            epoch_recon, epoch_kl, batches = 0.0, 0.0, 0
            for start in range(0, len(dataset), config.batch_size):
                batch = [dataset[i] for i in order[start : start + config.batch_size]]
                total, reconstruction, kl = batch_loss(model, batch, vocab, beta)
                if not torch.isfinite(total):
                    raise RuntimeError(
                        f"non-finite loss in epoch {epoch}, batch {batches} "
                        f"(reconstruction={reconstruction.item()}, kl={kl.item()})"
                    )
                optimizer.zero_grad()
                total.backward()
                optimizer.step()
                epoch_recon += reconstruction.detach().item()
                epoch_kl += kl.detach().item()
                batches += 1
            stats = EpochStats(
                epoch=epoch,
                reconstruction=epoch_recon / batches,
                kl=epoch_kl / batches,
                beta=beta,
                total=epoch_recon / batches + beta * (epoch_kl / batches),
            )
            history.append(stats)
            if log_handle:
                log_handle.write(stats.as_json_line() + "\n")
                log_handle.flush()
            if progress_callback:
                progress_callback(epoch + 1, config.epochs, stats)
    finally:
        if log_handle:
            log_handle.close()
    return model, history


def save_checkpoint(path: str | Path, model: LyricVae, vocab: TokenVocab) -> None:
    """Single archive: configs, vocabulary, and named parameter tensors."""
    torch.save(
        {
            "format": "lyrivid-checkpoint-v1",
            "config": model.config_payload(),
            "vocab": vocab.to_payload(),
            "state": model.state_dict(),
        },
        str(path),
    )


def load_checkpoint(
    path: str | Path,
    expected_music: MusicEncoderConfig | None = None,
    expected_decoder: DecoderConfig | None = None,
) -> tuple[LyricVae, TokenVocab]:
    """Load a checkpoint; a config mismatch is an error, never a reshape."""
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    try:
        payload = torch.load(str(path), map_location="cpu", weights_only=False)
    except Exception as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("format") != "lyrivid-checkpoint-v1":
        raise CheckpointError(f"{path} is not a lyrivid checkpoint")
    music = MusicEncoderConfig(**payload["config"]["music"])
    decoder = DecoderConfig(**payload["config"]["decoder"])
    if expected_music is not None and music != expected_music:
        raise CheckpointError(
            f"checkpoint music-encoder config {music} does not match expected {expected_music}"
        )
    if expected_decoder is not None and decoder != expected_decoder:
        raise CheckpointError(
            f"checkpoint decoder config {decoder} does not match expected {expected_decoder}"
        )
    vocab = TokenVocab.from_payload(payload["vocab"])
    model = LyricVae(music, decoder, vocab_size=payload["config"]["vocab_size"])
    model.load_state_dict(payload["state"])
    model.eval()
    return model, vocab
