"""Token sampling: temperature, top-k, nucleus filtering, line decoding."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from lyrivid.errors import ShapeError
from lyrivid.lyrics.model import LyricVae
from lyrivid.lyrics.vocab import TokenVocab


@dataclass(frozen=True)
class SamplingConfig:
    top_k: int = 100
    top_p: float = 0.95
    temperature: float = 0.95
    max_tokens: int = 24
    seed: int = 0

    def __post_init__(self):
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not (0.0 < self.top_p <= 1.0):
            raise ValueError("top_p must lie in (0, 1]")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class LyricLine:
    token_ids: tuple[int, ...]
    text: str


def filter_logits(logits: torch.Tensor, sampling: SamplingConfig) -> torch.Tensor:
    """Temperature, top-k, then nucleus filtering; returns a probability vector.

    Top-k keeps every token whose probability ties the k-th highest; within
    the survivors (probability-descending), the smallest prefix whose raw
    softmax mass reaches top_p is kept, again with boundary ties included.
    Survivors are renormalized; everything else is exactly zero.
    """
    if logits.dim() != 1:
        raise ShapeError("filter_logits expects a 1D logits vector")
    if not torch.isfinite(logits).all():
        raise ValueError("non-finite logits")
    probs = torch.softmax(logits.to(torch.float64) / sampling.temperature, dim=0)
    sorted_probs, _ = torch.sort(probs, descending=True)

    k = min(sampling.top_k, len(probs))
    kth_value = sorted_probs[k - 1]
    keep = probs >= kth_value

    survivor_sorted = sorted_probs[sorted_probs >= kth_value]
    cumulative = torch.cumsum(survivor_sorted, dim=0)
    target = min(sampling.top_p, float(cumulative[-1]))
    boundary_idx = int(torch.searchsorted(cumulative, target))  # first cum >= target
    boundary_value = survivor_sorted[min(boundary_idx, len(survivor_sorted) - 1)]
    keep &= probs >= boundary_value

    filtered = torch.where(keep, probs, torch.zeros_like(probs))
    return filtered / filtered.sum()


def decode_line(
    model: LyricVae,
    z: torch.Tensor,
    previous_line: list[int],
    sampling: SamplingConfig,
    vocab: TokenVocab,
    generator: torch.Generator | None = None,
) -> LyricLine:
    """Autoregressively generate one lyric line conditioned on z.

    The context is the previous line's tokens followed by <END>; generation
    stops at <END> or max_tokens. A fixed seed makes the output
    bit-reproducible.
    """
    if not previous_line:
        raise ValueError("previous_line must be non-empty; use the <START> id for the first line")
    if len(vocab) == 0:
        raise ValueError("empty vocabulary")
    latent_dim = model.music_config.latent_dim
    if z.shape[-1] != latent_dim:
        raise ShapeError(f"latent of dim {z.shape[-1]} does not match model latent_dim {latent_dim}")
    if generator is None:
        generator = torch.Generator().manual_seed(sampling.seed)

    device_z = z.reshape(1, -1)
    context = list(previous_line) + [vocab.end_id]
    generated: list[int] = []
    model.eval()
    with torch.no_grad():
        for _ in range(sampling.max_tokens):
            window = (context + generated)[-model.decoder_config.max_sequence_length :]
            tokens = torch.tensor([window], dtype=torch.long)
            logits = model.decoder(tokens, device_z)[0, -1]
            probs = filter_logits(logits, sampling)
            next_id = int(torch.multinomial(probs, 1, generator=generator))
            if next_id == vocab.end_id:
                break
            generated.append(next_id)
    return LyricLine(token_ids=tuple(generated), text=vocab.decode(generated))


def greedy_config(max_tokens: int = 24) -> SamplingConfig:
    """Argmax decoding expressed as a degenerate sampling configuration."""
    return SamplingConfig(top_k=1, top_p=1.0, temperature=1.0, max_tokens=max_tokens, seed=0)
