"""Style-keyword taxonomy and prompt assembly.

The taxonomy ships as a data file with six categories; each keyword is
tagged with its provenance (experiment-selected vs prompt-book). Keyword
order was shown not to matter for generation quality, so prompts join the
lyric with keywords in a fixed canonical category order for
reproducibility.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from lyrivid.errors import ValidationError

CATEGORY_ORDER = ("Medium", "Technique", "Spatial Composition", "Shot", "Color", "Light")


@dataclass(frozen=True)
class KeywordEntry:
    keyword: str
    provenance: str  # "selected" or "prompt-book"


@dataclass(frozen=True)
class KeywordTaxonomy:
    categories: dict[str, tuple[KeywordEntry, ...]]

    def category_names(self) -> tuple[str, ...]:
        return tuple(self.categories.keys())

    def keywords(self, category: str) -> tuple[str, ...]:
        return tuple(e.keyword for e in self.categories[category])

    def selected_count(self) -> int:
        return sum(
            1 for entries in self.categories.values() for e in entries if e.provenance == "selected"
        )

    def has(self, category: str, keyword: str) -> bool:
        entries = self.categories.get(category)
        return entries is not None and any(e.keyword == keyword for e in entries)

    def to_payload(self) -> dict:
        return {
            "categories": [
                {
                    "name": name,
                    "keywords": [
                        {"keyword": e.keyword, "provenance": e.provenance} for e in entries
                    ],
                }
                for name, entries in self.categories.items()
            ]
        }


@dataclass(frozen=True)
class PromptSpec:
    lyric: str
    keywords: tuple[tuple[str, str], ...] = field(default_factory=tuple)  # (category, keyword)


@dataclass(frozen=True)
class Prompt:
    text: str


@dataclass(frozen=True)
class KeywordViolation:
    kind: str  # unknown-category | unknown-keyword | duplicate-category
    category: str
    keyword: str | None = None

    def describe(self) -> str:
        if self.kind == "unknown-category":
            return f"unknown category '{self.category}' (expected one of {', '.join(CATEGORY_ORDER)})"
        if self.kind == "unknown-keyword":
            return f"unknown keyword '{self.keyword}' in category '{self.category}'"
        return f"category '{self.category}' selected more than once"


@lru_cache(maxsize=1)
def keyword_catalog() -> KeywordTaxonomy:
    """The full six-category keyword taxonomy."""
    payload = json.loads(resources.files("lyrivid.data").joinpath("keywords.json").read_text())
    categories: dict[str, tuple[KeywordEntry, ...]] = {}
    for cat in payload["categories"]:
        categories[cat["name"]] = tuple(
            KeywordEntry(keyword=k["keyword"], provenance=k["provenance"])
            for k in cat["keywords"]
        )
    return KeywordTaxonomy(categories=categories)


def validate_keywords(selection, allow_stacking: bool = False) -> list[KeywordViolation]:
    """Check (category, keyword) pairs against the taxonomy.

    Returns violations; an empty list means the selection is valid. The
    one-keyword-per-category editor constraint can be relaxed with
    allow_stacking.
    """
    taxonomy = keyword_catalog()
    violations: list[KeywordViolation] = []
    seen: set[str] = set()
    for category, keyword in selection:
        if category not in taxonomy.categories:
            violations.append(KeywordViolation("unknown-category", category, keyword))
            continue
        if category in seen and not allow_stacking:
            violations.append(KeywordViolation("duplicate-category", category, keyword))
        seen.add(category)
        if not taxonomy.has(category, keyword):
            violations.append(KeywordViolation("unknown-keyword", category, keyword))
    return violations


def assemble_prompt(spec: PromptSpec) -> Prompt:
    """Lyric followed by keywords in canonical category order, ", "-joined."""
    violations = validate_keywords(spec.keywords)
    if violations:
        raise ValidationError("; ".join(v.describe() for v in violations))
    by_category = {category: keyword for category, keyword in spec.keywords}
    parts = [spec.lyric]
    for category in CATEGORY_ORDER:
        if category in by_category:
            parts.append(by_category[category])
    return Prompt(text=", ".join(parts))


def parse_keyword_flag(value: str) -> tuple[tuple[str, str], ...]:
    """Parse the CLI syntax "Medium=Painting,Light=Warm light"."""
    if not value.strip():
        return ()
    pairs = []
    for chunk in value.split(","):
        if "=" not in chunk:
            raise ValidationError(
                f"bad keyword selector '{chunk.strip()}': expected Category=Keyword "
                f"with categories {', '.join(CATEGORY_ORDER)}"
            )
        category, keyword = chunk.split("=", 1)
        pairs.append((category.strip(), keyword.strip()))
    return tuple(pairs)
