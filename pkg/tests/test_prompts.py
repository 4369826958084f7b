"""Keyword taxonomy and prompt assembly."""

import itertools

import pytest

from lyrivid.errors import ValidationError
from lyrivid.prompts import (
    CATEGORY_ORDER,
    PromptSpec,
    assemble_prompt,
    keyword_catalog,
    parse_keyword_flag,
    validate_keywords,
)


def test_category_names():
    catalog = keyword_catalog()
    assert catalog.category_names() == CATEGORY_ORDER


def test_medium_contents():
    assert set(keyword_catalog().keywords("Medium")) == {
        "Painting", "Drawing", "Graphic art", "Photograph", "Illustration",
    }


def test_spatial_composition_contents():
    assert set(keyword_catalog().keywords("Spatial Composition")) == {"Steelyard", "The tunnel"}


def test_selected_keyword_count_is_23():
    assert keyword_catalog().selected_count() == 23


def test_no_duplicate_keywords_within_category():
    for name in CATEGORY_ORDER:
        kws = keyword_catalog().keywords(name)
        assert len(kws) == len(set(kws))


def test_every_catalog_keyword_validates():
    catalog = keyword_catalog()
    for name in CATEGORY_ORDER:
        for kw in catalog.keywords(name):
            assert validate_keywords([(name, kw)]) == []


def test_assemble_plain_lyric():
    prompt = assemble_prompt(PromptSpec(lyric="somewhere beyond the sea"))
    assert prompt.text == "somewhere beyond the sea"


def test_assemble_with_keywords():
    spec = PromptSpec(
        lyric="somewhere beyond the sea",
        keywords=(("Light", "Warm light"), ("Medium", "Painting")),
    )
    assert assemble_prompt(spec).text == "somewhere beyond the sea, Painting, Warm light"


def test_assemble_order_independent():
    keywords = [
        ("Medium", "Painting"),
        ("Shot", "Eye-level shot"),
        ("Color", "Intense color"),
        ("Light", "Warm light"),
    ]
    texts = {
        assemble_prompt(PromptSpec(lyric="l", keywords=tuple(perm))).text
        for perm in itertools.permutations(keywords)
    }
    assert len(texts) == 1


def test_assemble_rejects_unknown_keyword():
    with pytest.raises(ValidationError, match="Ultraviolet"):
        assemble_prompt(PromptSpec(lyric="l", keywords=(("Color", "Ultraviolet"),)))


def test_validate_empty_selection_ok():
    assert validate_keywords([]) == []


def test_validate_duplicate_category():
    violations = validate_keywords([("Medium", "Painting"), ("Medium", "Drawing")])
    assert any(v.kind == "duplicate-category" for v in violations)


def test_validate_unknown_keyword_names_both():
    violations = validate_keywords([("Color", "Ultraviolet")])
    assert len(violations) == 1
    assert violations[0].kind == "unknown-keyword"
    assert "Ultraviolet" in violations[0].describe()
    assert "Color" in violations[0].describe()


def test_validate_unknown_category():
    violations = validate_keywords([("Mood", "Happy")])
    assert violations[0].kind == "unknown-category"


def test_validate_stacking_flag():
    pairs = [("Medium", "Painting"), ("Medium", "Drawing")]
    assert validate_keywords(pairs, allow_stacking=True) == []


def test_parse_keyword_flag():
    pairs = parse_keyword_flag("Medium=Painting,Light=Warm light")
    assert pairs == (("Medium", "Painting"), ("Light", "Warm light"))
    assert parse_keyword_flag("") == ()
    with pytest.raises(ValidationError):
        parse_keyword_flag("PaintingOnly")
