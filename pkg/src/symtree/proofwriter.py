"""Ingest OWA depth-1 rulebases shipped as line-delimited JSON records.

Each record carries English theory sentences plus structured triple/rule
representations.  The structured fields drive a per-record lexicon of
entity and attribute words; depersonalization swaps those words for
opaque ids while leaving verbs and connectives alone.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from typing import Iterable, TextIO

from .errors import ParseError, UnmappedName
from .transforms import SymbolMap

# placeholder subjects in quantified rule sentences; never part of the lexicon
VARIABLE_WORDS = frozenset({"someone", "something", "they", "it", "thing", "person"})

_QUOTED = re.compile(r'"([^"]*)"')
_GROUP = re.compile(r'\(((?:\s*"[^"]*")+)\s*\)')


@dataclass(frozen=True)
class PWQuestion:
    id: str
    text: str
    answer: str

    def to_dict(self) -> dict:
        return {"id": self.id, "text": self.text, "answer": self.answer}


@dataclass(frozen=True)
class PWRecord:
    id: str
    sentences: tuple[str, ...]
    questions: tuple[PWQuestion, ...]
    lexicon: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "sentences": list(self.sentences),
            "questions": [q.to_dict() for q in self.questions],
            "lexicon": list(self.lexicon),
        }


def _label_order(label: str) -> tuple[int, str]:
    digits = re.sub(r"\D", "", label)
    return (int(digits) if digits else 0, label)


def _atom_names(representation: str) -> list[str]:
    """Subject and object words of every atom in a representation string."""
    names = []
    for grp in _GROUP.findall(representation):
        tokens = _QUOTED.findall(grp)
        if len(tokens) < 3:
            continue
        for word in (tokens[0], tokens[2]):
            for piece in word.split():
                if piece.lower() not in VARIABLE_WORDS:
                    names.append(piece)
    return names


def _normalize_answer(value) -> str:
    if value is True or value == "true" or value == "True":
        return "True"
    if value is False or value == "false" or value == "False":
        return "False"
    return "Unknown"


def parse_records(stream: Iterable[str] | TextIO) -> list[PWRecord]:
    """Parse line-delimited records, preserving order.

    Raises ParseError naming the offending line on malformed input.
    """
    records = []
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
        try:
            records.append(_parse_record(doc))
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(f"line {lineno}: malformed record ({exc!r})") from exc
    return records


def _parse_record(doc: dict) -> PWRecord:
    sentences: list[str] = []
    seen: dict[str, None] = {}
    for field in ("triples", "rules"):
        entries = doc.get(field) or {}
        for label in sorted(entries, key=_label_order):
            entry = entries[label]
            sentences.append(entry["text"])
            for name in _atom_names(entry.get("representation", "")):
                seen.setdefault(name)
    questions = []
    entries = doc.get("questions") or {}
    for label in sorted(entries, key=_label_order):
        entry = entries[label]
        questions.append(
            PWQuestion(
                id=label,
                text=entry["question"],
                answer=_normalize_answer(entry["answer"]),
            )
        )
        for name in _atom_names(entry.get("representation", "")):
            seen.setdefault(name)
    return PWRecord(
        id=str(doc["id"]),
        sentences=tuple(sentences),
        questions=tuple(questions),
        lexicon=tuple(seen),
    )


def filter_unknowns(records: Iterable[PWRecord]) -> list[PWRecord]:
    """Drop Unknown-labeled questions; drop records left with none."""
    kept = []
    for record in records:
        questions = tuple(q for q in record.questions if q.answer != "Unknown")
        if questions:
            kept.append(replace(record, questions=questions))
    return kept


def build_record_map(record: PWRecord) -> SymbolMap:
    """Per-record bijective word map, e1.. in first-appearance order."""
    entity_map = {name: f"e{i}" for i, name in enumerate(record.lexicon, start=1)}
    return SymbolMap(mode="entity-ids", seed=0, relation_map={}, entity_map=entity_map)


def _substitute(text: str, mapping: dict[str, str]) -> str:
    if not mapping:
        return text
    names = sorted(mapping, key=len, reverse=True)
    pattern = re.compile(r"\b(" + "|".join(re.escape(n) for n in names) + r")\b")
    return pattern.sub(lambda m: mapping[m.group(1)], text)


def depersonalize(record: PWRecord, smap: SymbolMap) -> PWRecord:
    """Replace every lexicon word via the map; verbs stay untouched."""
    missing = [name for name in record.lexicon if name not in smap.entity_map]
    if missing:
        raise UnmappedName(f"record {record.id}: unmapped names {missing}")
    mapping = {name: smap.entity_map[name] for name in record.lexicon}
    sentences = tuple(_substitute(s, mapping) for s in record.sentences)
    questions = tuple(
        replace(q, text=_substitute(q.text, mapping)) for q in record.questions
    )
    lexicon = tuple(mapping[name] for name in record.lexicon)
    return PWRecord(record.id, sentences, questions, lexicon)


def repersonalize(record: PWRecord, smap: SymbolMap) -> PWRecord:
    """Invert a depersonalization performed with the same map."""
    return depersonalize(record, smap.inverse())


def ingest(stream: Iterable[str] | TextIO, *, depersonalized: bool = True) -> dict:
    """Full pipeline to the dataset document the evaluation harness runs on."""
    records = filter_unknowns(parse_records(stream))
    out = []
    for record in records:
        if depersonalized:
            record = depersonalize(record, build_record_map(record))
        for q in record.questions:
            out.append(
                {
                    "id": f"{record.id}/{q.id}",
                    "context": list(record.sentences),
                    "statement": q.text,
                    "label": q.answer == "True",
                }
            )
    return {"version": 1, "source": "proofwriter", "questions": out}
