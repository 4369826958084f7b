"""Lyric-quality metrics and annotation-agreement statistics.

Everything here is a pure function designed to be checked against
brute-force oracles: corpus BLEU with brevity penalty, distinct-n,
novelty-n against a frequency list, repeated-word coherence, scaled
clamped cosine similarity for image/text compatibility, Cohen's kappa,
and the 2x2 Pearson chi-square test.
"""

from __future__ import annotations

import json
import math
import re
import warnings
from collections import Counter
from dataclasses import asdict, dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

BLEU_EPSILON = 1e-9
STOPWORDS_VERSION = "1"

_TOKEN_RE = re.compile(r"[a-z0-9']+")


def load_stopwords() -> frozenset[str]:
    text = resources.files("lyrivid.data").joinpath("stopwords.txt").read_text()
    return frozenset(w.strip() for w in text.splitlines() if w.strip() and not w.startswith("#"))


def tokenize(line: str) -> list[str]:
    """Lowercased word tokens with punctuation stripped."""
    return _TOKEN_RE.findall(line.lower())


def content_words(line: str, stopwords: frozenset[str]) -> list[str]:
    return [t for t in tokenize(line) if t not in stopwords]


def ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


# ---------------------------------------------------------------------------
# BLEU


def bleu_n(candidates: Sequence[str], references: Sequence[str], n: int) -> float:
    """Corpus BLEU with brevity penalty, uniform weights over orders 1..n.

    Clipped counts carry an additive 1e-9 smoothing so fully disjoint
    corpora score near zero instead of exactly zero.
    """
    if len(candidates) != len(references):
        raise ValueError("candidates and references must have equal length")
    if not candidates:
        raise ValueError("empty corpus")
    matched = [0] * n
    total = [0] * n
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_tokens = tokenize(cand)
        ref_tokens = tokenize(ref)
        cand_len += len(cand_tokens)
        ref_len += len(ref_tokens)
        for order in range(1, n + 1):
            cand_counts = Counter(ngrams(cand_tokens, order))
            ref_counts = Counter(ngrams(ref_tokens, order))
            matched[order - 1] += sum(
                min(c, ref_counts[g]) for g, c in cand_counts.items()
            )
            total[order - 1] += max(len(cand_tokens) - order + 1, 0)
    log_precision = 0.0
    for order in range(n):
        p = (matched[order] + BLEU_EPSILON) / (total[order] + BLEU_EPSILON)
        log_precision += math.log(p) / n
    if cand_len == 0:
        return 0.0
    brevity = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return brevity * math.exp(log_precision)


# ---------------------------------------------------------------------------
# Distinct / novelty / coherence


def distinct_n(candidates: Sequence[str], n: int) -> float:
    """|unique n-grams| / |total n-grams| pooled over the corpus."""
    if not candidates:
        raise ValueError("empty corpus")
    pooled: list[tuple[str, ...]] = []
    for line in candidates:
        pooled.extend(ngrams(tokenize(line), n))
    if not pooled:
        warnings.warn(f"no {n}-grams in corpus (all lines shorter than {n} tokens)")
        return 0.0
    return len(set(pooled)) / len(pooled)


@dataclass(frozen=True)
class FrequencyList:
    """Top content n-grams of a training corpus, most frequent first."""

    n: int
    phrases: tuple[tuple[str, ...], ...]
    stopwords_version: str = STOPWORDS_VERSION

    def __contains__(self, phrase: tuple[str, ...]) -> bool:
        return phrase in self._index

    @property
    def _index(self) -> frozenset:
        # cached lazily on the instance despite frozen dataclass
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = frozenset(self.phrases)
            object.__setattr__(self, "_index_cache", cached)
        return cached

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "stopwords_version": self.stopwords_version,
                "phrases": [" ".join(p) for p in self.phrases],
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "FrequencyList":
        payload = json.loads(text)
        return cls(
            n=payload["n"],
            phrases=tuple(tuple(p.split(" ")) for p in payload["phrases"]),
            stopwords_version=payload.get("stopwords_version", STOPWORDS_VERSION),
        )


def build_frequency_list(
    corpus: Iterable[str],
    n: int,
    stopwords: frozenset[str] | None = None,
    top: int = 2000,
) -> FrequencyList:
    """Most frequent content n-grams, count descending, ties lexicographic."""
    stopwords = stopwords if stopwords is not None else load_stopwords()
    counts: Counter = Counter()
    for line in corpus:
        counts.update(ngrams(content_words(line, stopwords), n))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return FrequencyList(n=n, phrases=tuple(g for g, _ in ranked[:top]))


def novelty_n(
    candidates: Sequence[str],
    frequency_list: FrequencyList,
    stopwords: frozenset[str] | None = None,
    n: int | None = None,
) -> float:
    """Share of candidate content n-grams absent from the frequency list."""
    if not frequency_list.phrases and not candidates:
        raise ValueError("frequency list must be built before computing novelty")
    n = n if n is not None else frequency_list.n
    if n != frequency_list.n:
        raise ValueError(f"frequency list is for n={frequency_list.n}, requested n={n}")
    stopwords = stopwords if stopwords is not None else load_stopwords()
    total = 0
    infrequent = 0
    for line in candidates:
        for gram in ngrams(content_words(line, stopwords), n):
            total += 1
            if gram not in frequency_list:
                infrequent += 1
    if total == 0:
        warnings.warn("no content n-grams in candidates")
        return 0.0
    return infrequent / total


def coherence(
    per_song_lines: Sequence[Sequence[str]],
    stopwords: frozenset[str] | None = None,
    normalized: bool = True,
) -> float:
    """Average repeated-word score over songs.

    Per song: (content tokens - distinct content types) / content tokens,
    which is length-invariant; pass normalized=False for the raw repeated
    count the length-sensitive reading would produce.
    """
    if not per_song_lines:
        raise ValueError("need at least one song")
    stopwords = stopwords if stopwords is not None else load_stopwords()
    scores = []
    for lines in per_song_lines:
        tokens: list[str] = []
        for line in lines:
            tokens.extend(content_words(line, stopwords))
        if not tokens:
            scores.append(0.0)
            continue
        repeated = len(tokens) - len(set(tokens))
        scores.append(repeated / len(tokens) if normalized else float(repeated))
    return sum(scores) / len(scores)


# ---------------------------------------------------------------------------
# CLIPScore-style compatibility


def clip_score(image_embedding, text_embedding, scale: float = 2.5) -> float:
    """scale * max(cosine(image, text), 0)."""
    img = np.asarray(image_embedding, dtype=np.float64)
    txt = np.asarray(text_embedding, dtype=np.float64)
    if img.shape != txt.shape:
        raise ValueError("embedding dimensions differ")
    if scale <= 0:
        raise ValueError("scale must be positive")
    ni = float(np.linalg.norm(img))
    nt = float(np.linalg.norm(txt))
    if ni == 0.0 or nt == 0.0:
        raise ValueError("zero-magnitude embedding")
    return scale * max(float(img @ txt) / (ni * nt), 0.0)


# ---------------------------------------------------------------------------
# Agreement statistics


def cohens_kappa(labels_a: Sequence, labels_b: Sequence) -> float:
    """Chance-corrected agreement between two categorical raters."""
    if len(labels_a) != len(labels_b):
        raise ValueError("label sequences must have equal length")
    n = len(labels_a)
    if n == 0:
        raise ValueError("empty label sequences")
    categories = sorted(set(labels_a) | set(labels_b), key=repr)
    index = {c: i for i, c in enumerate(categories)}
    table = np.zeros((len(categories), len(categories)))
    for a, b in zip(labels_a, labels_b):
        table[index[a], index[b]] += 1
    p_observed = np.trace(table) / n
    p_expected = float(np.sum(table.sum(axis=1) * table.sum(axis=0))) / (n * n)
    if p_expected == 1.0:
        return 1.0
    return (p_observed - p_expected) / (1.0 - p_expected)


def chi_square_independence(contingency) -> tuple[float, float]:
    """Pearson chi-square on a 2x2 table; p from the df=1 survival function."""
    table = np.asarray(contingency, dtype=np.float64)
    if table.shape != (2, 2):
        raise ValueError("expected a 2x2 contingency table")
    row = table.sum(axis=1)
    col = table.sum(axis=0)
    total = table.sum()
    if np.any(row == 0) or np.any(col == 0):
        raise ValueError("zero marginal in contingency table")
    expected = np.outer(row, col) / total
    stat = float(np.sum((table - expected) ** 2 / expected))
    p_value = math.erfc(math.sqrt(stat / 2.0))
    return stat, p_value


# ---------------------------------------------------------------------------
# Report


@dataclass
class MetricReport:
    bleu_2: float
    bleu_3: float
    distinct_2: float
    distinct_3: float
    novelty_2: float
    novelty_3: float
    coherence: float
    clip_score: float
    coherence_raw: float = 0.0  # unnormalized repeated-word count, for comparability

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n")
