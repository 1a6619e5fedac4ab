"""Sentence-context dataset ingestion: parsing, word maps, round-trips."""

from __future__ import annotations

import io
from pathlib import Path

import pytest

from symtree.errors import ParseError, UnmappedName
from symtree.proofwriter import (
    build_record_map,
    depersonalize,
    filter_unknowns,
    ingest,
    parse_records,
    repersonalize,
)
from symtree.transforms import SymbolMap

FIXTURE = Path(__file__).parent / "fixtures" / "proofwriter_sample.jsonl"

# word assignments for the first fixture record used by the reference listing
REFERENCE_MAP = SymbolMap(
    mode="entity-ids",
    seed=0,
    relation_map={},
    entity_map={
        "bear": "e4",
        "dog": "e5",
        "cow": "e14",
        "squirrel": "e26",
        "round": "e2",
        "cold": "e1",
    },
)

REFERENCE_SENTENCES = (
    "The e4 likes the e5.",
    "The e14 is e2.",
    "The e14 likes the e4.",
    "The e14 needs the e4.",
    "The e5 needs the e26.",
    "The e5 sees the e14.",
    "The e26 needs the e5.",
    "If someone is e2 then they like the e26.",
    "If the e4 is e2 and the e4 likes the e26 then the e26 needs the e4.",
    "If the e14 needs the e5 then the e14 is e1.",
)


def load_records():
    with FIXTURE.open(encoding="utf-8") as handle:
        return parse_records(handle)


def test_parse_fixture_records():
    records = load_records()
    assert len(records) == 3
    first = records[0]
    assert first.id == "AttPosBirdsVar-D1-1"
    assert len(first.sentences) == 10
    assert first.sentences[0] == "The bear likes the dog."
    assert first.sentences[7].startswith("If someone is round")
    assert [q.id for q in first.questions] == ["Q1", "Q2", "Q3"]
    assert [q.answer for q in first.questions] == ["True", "False", "Unknown"]
    assert first.questions[0].text == "The cow likes the squirrel."
    assert "does not like" in first.questions[1].text


def test_lexicon_is_first_appearance_order():
    first = load_records()[0]
    assert first.lexicon == ("bear", "dog", "cow", "round", "squirrel", "cold")
    # pronouns and variable words never enter the lexicon
    assert "someone" not in first.lexicon
    assert "they" not in first.lexicon


def test_filter_unknowns_drops_questions_and_empty_records():
    records = load_records()
    kept = filter_unknowns(records)
    assert [r.id for r in kept] == [records[0].id, records[1].id]
    assert [q.answer for q in kept[0].questions] == ["True", "False"]
    # the all-Unknown record disappears
    assert all(q.answer != "Unknown" for r in kept for q in r.questions)


def test_build_record_map_numbers_words_in_order():
    first = load_records()[0]
    smap = build_record_map(first)
    assert smap.entity_map == {
        "bear": "e1",
        "dog": "e2",
        "cow": "e3",
        "round": "e4",
        "squirrel": "e5",
        "cold": "e6",
    }


def test_depersonalize_with_reference_assignment():
    first = filter_unknowns(load_records())[0]
    masked = depersonalize(first, REFERENCE_MAP)
    assert masked.sentences == REFERENCE_SENTENCES
    assert masked.questions[0].text == "The e14 likes the e26."
    assert masked.questions[1].text == "The e14 does not like the e26."
    assert masked.lexicon == ("e4", "e5", "e14", "e2", "e26", "e1")


def test_depersonalize_round_trip():
    first = load_records()[0]
    smap = build_record_map(first)
    masked = depersonalize(first, smap)
    back = repersonalize(masked, smap)
    assert back.to_dict() == first.to_dict()


def test_depersonalize_requires_complete_map():
    first = load_records()[0]
    incomplete = SymbolMap(
        mode="entity-ids", seed=0, relation_map={}, entity_map={"bear": "e1"}
    )
    with pytest.raises(UnmappedName):
        depersonalize(first, incomplete)


def test_ingest_masks_words_and_keeps_labels():
    with FIXTURE.open(encoding="utf-8") as handle:
        doc = ingest(handle)
    assert doc["version"] == 1
    assert doc["source"] == "proofwriter"
    ids = [q["id"] for q in doc["questions"]]
    assert ids == [
        "AttPosBirdsVar-D1-1/Q1",
        "AttPosBirdsVar-D1-1/Q2",
        "AttPosBirdsVar-D1-2/Q1",
    ]
    first = doc["questions"][0]
    assert first["context"][0] == "The e1 likes the e2."
    assert first["statement"] == "The e3 likes the e5."
    assert first["label"] is True
    assert doc["questions"][1]["label"] is False


def test_ingest_can_keep_original_names():
    with FIXTURE.open(encoding="utf-8") as handle:
        doc = ingest(handle, depersonalized=False)
    assert doc["questions"][0]["context"][0] == "The bear likes the dog."
    assert doc["questions"][0]["statement"] == "The cow likes the squirrel."


def test_parse_error_carries_line_number():
    bad = io.StringIO('{"id": "x"}\nnot json at all\n')
    with pytest.raises(ParseError) as err:
        parse_records(bad)
    assert "2" in str(err.value)


def test_parse_error_on_missing_fields():
    with pytest.raises(ParseError):
        parse_records(io.StringIO('{"no_id": true}\n'))
