"""Music-conditioned variational autoencoder for lyric lines.

A patch-based transformer encodes the mel spectrogram into the hidden
state of a prepended [CLS] token; two bias-free projections turn that
state into the posterior mean and (exponentiated half-)log-variance; the
sampled latent conditions an autoregressive transformer decoder through
cross-attention whose keys and values are latent-derived memory slots.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
import torch
from torch import nn

from lyrivid.errors import ShapeError


@dataclass(frozen=True)
class MusicEncoderConfig:
    layers: int = 2
    heads: int = 4
    embed_dim: int = 64
    patch_height: int = 16
    patch_width: int = 16
    patch_stride: int = 10
    latent_dim: int = 32
    max_patches: int = 1024
    mlp_ratio: int = 4

    def __post_init__(self):
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")
        if self.patch_stride > min(self.patch_height, self.patch_width):
            raise ValueError("patch_stride must not exceed the patch dimensions")


@dataclass(frozen=True)
class DecoderConfig:
    layers: int = 2
    heads: int = 4
    embed_dim: int = 64
    max_sequence_length: int = 64
    memory_slots: int = 1
    mlp_ratio: int = 4

    def __post_init__(self):
        if self.memory_slots < 1:
            raise ValueError("memory_slots must be >= 1")
        if self.embed_dim % self.heads != 0:
            raise ValueError("embed_dim must be divisible by heads")


@dataclass
class LatentState:
    mu: torch.Tensor
    sigma: torch.Tensor
    z: torch.Tensor


class _Mlp(nn.Module):
    def __init__(self, dim: int, ratio: int):
        super().__init__()
        self.fc1 = nn.Linear(dim, dim * ratio)
        self.fc2 = nn.Linear(dim * ratio, dim)
        self.act = nn.GELU()

    def forward(self, x):
        return self.fc2(self.act(self.fc1(x)))


class _Attention(nn.Module):
    """Multi-head attention; self-attention when memory is None."""

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.scale = 1.0 / math.sqrt(dim // heads)
        self.to_q = nn.Linear(dim, dim)
        self.to_k = nn.Linear(dim, dim)
        self.to_v = nn.Linear(dim, dim)
        self.proj = nn.Linear(dim, dim)

    def forward(self, x, memory=None, causal=False):
        b, t, d = x.shape
        source = x if memory is None else memory
        s = source.shape[1]
        h = self.heads
        q = self.to_q(x).view(b, t, h, d // h).transpose(1, 2)
        k = self.to_k(source).view(b, s, h, d // h).transpose(1, 2)
        v = self.to_v(source).view(b, s, h, d // h).transpose(1, 2)
        scores = (q @ k.transpose(-2, -1)) * self.scale
        if causal:
            mask = torch.triu(torch.ones(t, s, dtype=torch.bool, device=x.device), diagonal=1)
            scores = scores.masked_fill(mask, float("-inf"))
        attn = torch.softmax(scores, dim=-1)
        out = (attn @ v).transpose(1, 2).reshape(b, t, d)
        return self.proj(out)


class _EncoderBlock(nn.Module):
    def __init__(self, dim: int, heads: int, ratio: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.attn = _Attention(dim, heads)
        self.norm2 = nn.LayerNorm(dim)
        self.mlp = _Mlp(dim, ratio)

    def forward(self, x):
        x = x + self.attn(self.norm1(x))
        return x + self.mlp(self.norm2(x))


class _DecoderBlock(nn.Module):
    def __init__(self, dim: int, heads: int, ratio: int):
        super().__init__()
        self.norm1 = nn.LayerNorm(dim)
        self.self_attn = _Attention(dim, heads)
        self.norm2 = nn.LayerNorm(dim)
        self.cross_attn = _Attention(dim, heads)
        self.norm3 = nn.LayerNorm(dim)
        self.mlp = _Mlp(dim, ratio)

    def forward(self, x, memory):
        x = x + self.self_attn(self.norm1(x), causal=True)
        x = x + self.cross_attn(self.norm2(x), memory=memory)
        return x + self.mlp(self.norm3(x))


def patch_grid(n_mels: int, frames: int, config: MusicEncoderConfig) -> tuple[int, int]:
    """Patch counts along (frequency, time): floor((dim - patch)/stride) + 1."""
    if n_mels < config.patch_height or frames < config.patch_width:
        raise ShapeError(
            f"spectrogram {n_mels}x{frames} too small: need at least "
            f"{config.patch_height}x{config.patch_width} for one patch"
        )
    rows = (n_mels - config.patch_height) // config.patch_stride + 1
    cols = (frames - config.patch_width) // config.patch_stride + 1
    return rows, cols


class MusicEncoder(nn.Module):
    def __init__(self, config: MusicEncoderConfig):
        super().__init__()
        self.config = config
        patch_dim = config.patch_height * config.patch_width
        self.patch_proj = nn.Linear(patch_dim, config.embed_dim)
        self.pos_embed = nn.Parameter(torch.zeros(config.max_patches + 1, config.embed_dim))
        self.cls_token = nn.Parameter(torch.zeros(config.embed_dim))
        self.blocks = nn.ModuleList(
            _EncoderBlock(config.embed_dim, config.heads, config.mlp_ratio)
            for _ in range(config.layers)
        )
        self.norm = nn.LayerNorm(config.embed_dim)
        nn.init.normal_(self.pos_embed, std=0.02)
        nn.init.normal_(self.cls_token, std=0.02)

    def patchify(self, mel: torch.Tensor) -> torch.Tensor:
        """(n_mels, T) -> (num_patches, patch_dim), overlapping, row-major."""
        c = self.config
        patch_grid(mel.shape[0], mel.shape[1], c)  # shape validation
        patches = mel.unfold(0, c.patch_height, c.patch_stride)
        patches = patches.unfold(1, c.patch_width, c.patch_stride)
        rows, cols = patches.shape[0], patches.shape[1]
        return patches.reshape(rows * cols, c.patch_height * c.patch_width)

    def forward(self, mel: torch.Tensor) -> torch.Tensor:
        """Hidden state of the [CLS] position; mel is (n_mels, T) or a batch list."""
        single = mel.dim() == 2
        mels = mel.unsqueeze(0) if single else mel
        tokens = torch.stack([self.patch_proj(self.patchify(m)) for m in mels])
        b, n, d = tokens.shape
        if n + 1 > self.pos_embed.shape[0]:
            raise ShapeError(
                f"{n} patches exceed max_patches={self.config.max_patches}; "
                "increase max_patches in the encoder config"
            )
        cls = self.cls_token.expand(b, 1, d)
        x = torch.cat([cls, tokens], dim=1) + self.pos_embed[: n + 1]
        for block in self.blocks:
            x = block(x)
        h = self.norm(x)[:, 0]
        return h[0] if single else h


class LatentHead(nn.Module):
    """mu = W_mu h; sigma = exp(W_sigma h / 2)."""

    def __init__(self, hidden_dim: int, latent_dim: int):
        super().__init__()
        self.w_mu = nn.Linear(hidden_dim, latent_dim, bias=False)
        self.w_sigma = nn.Linear(hidden_dim, latent_dim, bias=False)

    def forward(self, h: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        if not torch.isfinite(h).all():
            raise ValueError("non-finite encoder state")
        return self.w_mu(h), torch.exp(self.w_sigma(h) / 2.0)


def sample_latent(mu: torch.Tensor, sigma: torch.Tensor, epsilon=None, seed: int | None = None):
    """Reparameterized sample z = mu + sigma * eps, eps ~ N(0, I)."""
    if mu.shape != sigma.shape:
        raise ShapeError(f"mu/sigma shapes differ: {mu.shape} vs {sigma.shape}")
    if epsilon is None:
        generator = None
        if seed is not None:
            generator = torch.Generator().manual_seed(seed)
        epsilon = torch.randn(mu.shape, generator=generator, dtype=mu.dtype)
    else:
        epsilon = torch.as_tensor(epsilon, dtype=mu.dtype)
        if epsilon.shape != mu.shape:
            raise ShapeError(f"epsilon shape {epsilon.shape} does not match {mu.shape}")
    return mu + sigma * epsilon


def kl_divergence(mu, sigma):
    """Diagonal-Gaussian KL against N(0, I), summed over latent dimensions.

    0.5 * sum(mu^2 + sigma^2 - 1 - 2 ln sigma); batched input gives one
    value per row.
    """
    mu = torch.as_tensor(mu, dtype=torch.float64) if not torch.is_tensor(mu) else mu
    sigma = torch.as_tensor(sigma, dtype=torch.float64) if not torch.is_tensor(sigma) else sigma
    if (sigma <= 0).any():
        raise ValueError("sigma must be strictly positive")
    per_dim = 0.5 * (mu**2 + sigma**2 - 1.0 - 2.0 * torch.log(sigma))
    return per_dim.sum(dim=-1)


class LyricDecoder(nn.Module):
    def __init__(self, config: DecoderConfig, vocab_size: int, latent_dim: int):
        super().__init__()
        self.config = config
        self.token_embed = nn.Embedding(vocab_size, config.embed_dim)
        self.pos_embed = nn.Parameter(torch.zeros(config.max_sequence_length, config.embed_dim))
        self.memory_proj = nn.Linear(latent_dim, config.memory_slots * config.embed_dim)
        self.blocks = nn.ModuleList(
            _DecoderBlock(config.embed_dim, config.heads, config.mlp_ratio)
            for _ in range(config.layers)
        )
        self.norm = nn.LayerNorm(config.embed_dim)
        self.head = nn.Linear(config.embed_dim, vocab_size)
        nn.init.normal_(self.pos_embed, std=0.02)

    def forward(self, tokens: torch.Tensor, z: torch.Tensor) -> torch.Tensor:
        """Next-token logits; tokens (b, t) int64, z (b, latent_dim)."""
        b, t = tokens.shape
        if t > self.config.max_sequence_length:
            raise ShapeError(
                f"sequence of {t} tokens exceeds max_sequence_length="
                f"{self.config.max_sequence_length}"
            )
        memory = self.memory_proj(z).view(b, self.config.memory_slots, self.config.embed_dim)
        x = self.token_embed(tokens) + self.pos_embed[:t]
        for block in self.blocks:
            x = block(x, memory)
        return self.head(self.norm(x))


class LyricVae(nn.Module):
    """Encoder, latent head, and decoder bundled with their configs."""

    def __init__(self, music_config: MusicEncoderConfig, decoder_config: DecoderConfig, vocab_size: int):
        super().__init__()
        self.music_config = music_config
        self.decoder_config = decoder_config
        self.vocab_size = vocab_size
        self.encoder = MusicEncoder(music_config)
        self.latent_head = LatentHead(music_config.embed_dim, music_config.latent_dim)
        self.decoder = LyricDecoder(decoder_config, vocab_size, music_config.latent_dim)

    def encode_music(self, mel) -> torch.Tensor:
        if isinstance(mel, np.ndarray):
            mel = torch.as_tensor(mel, dtype=next(self.parameters()).dtype)
        return self.encoder(mel)

    def latent_params(self, h_music: torch.Tensor):
        return self.latent_head(h_music)

    def posterior(self, mel, epsilon=None, seed: int | None = None) -> LatentState:
        h = self.encode_music(mel)
        mu, sigma = self.latent_head(h)
        z = sample_latent(mu, sigma, epsilon=epsilon, seed=seed)
        return LatentState(mu=mu, sigma=sigma, z=z)

    def config_payload(self) -> dict:
        return {
            "music": asdict(self.music_config),
            "decoder": asdict(self.decoder_config),
            "vocab_size": self.vocab_size,
        }
