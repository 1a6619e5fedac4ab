"""Experiment orchestration: configs, answer backends, metric reports."""

from __future__ import annotations

import csv
import io
import json
import random
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InfeasibleConfig, NoRuleFound, NoSelectionFound
from .gateway import (
    CACHE_POLICIES, REPLAY, ChatGateway, GenerationSettings, TranscriptStore,
)
from .kb import KIND_DERIVED, Atom, Theory, canonicalize_rule
from .metrics import (
    ABDUCE, DEDUCE, FALSE, INDUCE, TRUE, ProofAnswer, deduction_accuracy,
    induction_precision, parse_boolean_answer, parse_proof_answer,
    parse_rule_answer, proof_accuracy,
)
from .proofwriter import filter_unknowns, parse_records
from .reasoner import (
    Closure, abduce_proofs, chain_normalize, classify_hypothesis,
    forward_closure, induce_rule, make_template,
)
from .rendering import (
    Demo, DemoBank, FEW_SHOT_COT, REGIMES, STYLES, TASKS, ZERO_PLUS_FEW_SHOT_COT,
    ZERO_SHOT, ZERO_SHOT_COT, LOGIC, build_context_prompt, build_prompt,
    load_demo_bank, render_statement,
)
from .schema import TASK_PRESETS
from .transforms import MODES, apply_map, build_symbol_map
from .treegen import TreeConfig, assemble_dataset
from . import proofwriter as pw

SOLVER = "solver"
RANDOM = "random"
GATEWAY = "gateway"
BACKENDS = (SOLVER, RANDOM, GATEWAY)

SOURCE_TREEGEN = "treegen"
SOURCE_PROOFWRITER = "proofwriter"
SOURCES = (SOURCE_TREEGEN, SOURCE_PROOFWRITER)

CONFIG_VERSION = 1
REPORT_VERSION = 1

# table row labels for the renaming settings
_SETTING_LABELS = {
    "identity": "Semantics",
    "counter-commonsense": "Counter-CS",
}


def setting_label(config: "ExperimentConfig") -> str:
    if config.remove_rules:
        return "Remove-R/F"
    if config.after_selection:
        return "after-selection"
    return _SETTING_LABELS.get(config.transform, "Symbols")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run depends on, serializable as JSON."""

    task: str = DEDUCE
    source: str = SOURCE_TREEGEN
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
    tree: dict = field(default_factory=dict)  # TreeConfig overrides, minus seed
    proofwriter_path: str = ""
    transform: str = "identity"
    rename_entities: bool = False
    regime: str = ZERO_SHOT
    style: str = LOGIC
    backend: str = SOLVER
    settings: GenerationSettings = field(default_factory=GenerationSettings)
    cache_policy: str = REPLAY
    transcript_dir: str = ""
    demo_bank_path: str = ""
    parallelism: int = 4
    variant: int = 1
    remove_rules: bool = False
    after_selection: bool = False
    max_questions: int | None = None

    def validate(self) -> None:
        if self.task not in TASKS:
            raise InfeasibleConfig(f"unknown task: {self.task!r}")
        if self.source not in SOURCES:
            raise InfeasibleConfig(f"unknown source: {self.source!r}")
        if self.transform not in MODES:
            raise InfeasibleConfig(f"unknown transform: {self.transform!r}")
        if self.regime not in REGIMES:
            raise InfeasibleConfig(f"unknown regime: {self.regime!r}")
        if self.style not in STYLES:
            raise InfeasibleConfig(f"unknown style: {self.style!r}")
        if self.backend not in BACKENDS:
            raise InfeasibleConfig(f"unknown backend: {self.backend!r}")
        if self.cache_policy not in CACHE_POLICIES:
            raise InfeasibleConfig(f"unknown cache policy: {self.cache_policy!r}")
        if self.source == SOURCE_TREEGEN and not self.seeds:
            raise InfeasibleConfig("treegen source needs at least one seed")
        if self.source == SOURCE_PROOFWRITER:
            if not self.proofwriter_path:
                raise InfeasibleConfig("proofwriter source needs proofwriter_path")
            if self.task != DEDUCE:
                raise InfeasibleConfig("ingested text supports the deduce task only")
            if self.backend == SOLVER:
                raise InfeasibleConfig("no symbolic solver for ingested text")
        if self.backend == RANDOM and self.task != DEDUCE:
            raise InfeasibleConfig("the random baseline answers boolean questions only")
        if self.max_questions is not None and self.max_questions < 1:
            raise InfeasibleConfig("max_questions must be positive")
        if self.parallelism < 1:
            raise InfeasibleConfig("parallelism must be >= 1")
        self.settings.validate()

    def to_dict(self) -> dict:
        return {
            "version": CONFIG_VERSION,
            "task": self.task,
            "source": self.source,
            "seeds": list(self.seeds),
            "tree": dict(self.tree),
            "proofwriter_path": self.proofwriter_path,
            "transform": self.transform,
            "rename_entities": self.rename_entities,
            "regime": self.regime,
            "style": self.style,
            "backend": self.backend,
            "settings": self.settings.to_dict(),
            "cache_policy": self.cache_policy,
            "transcript_dir": self.transcript_dir,
            "demo_bank_path": self.demo_bank_path,
            "parallelism": self.parallelism,
            "variant": self.variant,
            "remove_rules": self.remove_rules,
            "after_selection": self.after_selection,
            "max_questions": self.max_questions,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if doc.get("version") != CONFIG_VERSION:
            raise InfeasibleConfig(f"unsupported config version: {doc.get('version')!r}")
        config = cls(
            task=doc.get("task", DEDUCE),
            source=doc.get("source", SOURCE_TREEGEN),
            seeds=tuple(doc.get("seeds", (1, 2, 3, 4, 5, 6, 7, 8, 9, 10))),
            tree=dict(doc.get("tree", {})),
            proofwriter_path=doc.get("proofwriter_path", ""),
            transform=doc.get("transform", "identity"),
            rename_entities=doc.get("rename_entities", False),
            regime=doc.get("regime", ZERO_SHOT),
            style=doc.get("style", LOGIC),
            backend=doc.get("backend", SOLVER),
            settings=GenerationSettings.from_dict(doc.get("settings", {})),
            cache_policy=doc.get("cache_policy", REPLAY),
            transcript_dir=doc.get("transcript_dir", ""),
            demo_bank_path=doc.get("demo_bank_path", ""),
            parallelism=doc.get("parallelism", 4),
            variant=doc.get("variant", 1),
            remove_rules=doc.get("remove_rules", False),
            after_selection=doc.get("after_selection", False),
            max_questions=doc.get("max_questions"),
        )
        config.validate()
        return config


@dataclass(frozen=True)
class ReportRow:
    label: str  # "S{seed}" per segment, "Avg" for the mean row
    task: str
    setting: str
    regime: str
    style: str
    metric: str
    value: float  # percent, already rounded
    n: int
    seeds: tuple[int, ...]

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "task": self.task,
            "setting": self.setting,
            "regime": self.regime,
            "style": self.style,
            "metric": self.metric,
            "value": self.value,
            "n": self.n,
            "seeds": list(self.seeds),
        }


_COLUMNS = ("label", "task", "setting", "regime", "style", "metric", "value", "n", "seeds")


@dataclass
class MetricReport:
    rows: list[ReportRow]

    def to_dict(self) -> dict:
        return {"version": REPORT_VERSION, "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(_COLUMNS)
        for row in self.rows:
            doc = row.to_dict()
            doc["seeds"] = " ".join(str(s) for s in row.seeds)
            writer.writerow([doc[c] for c in _COLUMNS])
        return buf.getvalue()

    def to_markdown(self) -> str:
        lines = [
            "| Label | Task | Setting | Regime | Style | Metric | Value (%) | n |",
            "| --- | --- | --- | --- | --- | --- | --- | --- |",
        ]
        for r in self.rows:
            lines.append(
                f"| {r.label} | {r.task} | {r.setting} | {r.regime} | {r.style} "
                f"| {r.metric} | {r.value} | {r.n} |"
            )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_dict(cls, doc: dict) -> "MetricReport":
        if doc.get("version") != REPORT_VERSION:
            raise InfeasibleConfig(f"unsupported report version: {doc.get('version')!r}")
        rows = [
            ReportRow(
                label=r["label"],
                task=r["task"],
                setting=r["setting"],
                regime=r["regime"],
                style=r["style"],
                metric=r["metric"],
                value=r["value"],
                n=r["n"],
                seeds=tuple(r["seeds"]),
            )
            for r in doc["rows"]
        ]
        return cls(rows=rows)


_METRIC_NAMES = {DEDUCE: "accuracy", INDUCE: "precision", ABDUCE: "proof-accuracy"}


def _derived_relations(theory: Theory) -> list[str]:
    return sorted(name for name, rel in theory.relations.items() if rel.kind == KIND_DERIVED)


def _defining_rule(theory: Theory, relation: str):
    for rule in theory.rules:
        if rule.head.rel == relation:
            return rule
    raise InfeasibleConfig(f"no rule defines relation {relation!r}")


def _cap(items: list, limit: int | None, seed: int) -> list:
    """Deterministic subsample: shuffle with a seed-derived RNG, take a prefix."""
    if limit is None or len(items) <= limit:
        return items
    rng = random.Random(1_000_003 * seed + 77_377)
    picked = list(items)
    rng.shuffle(picked)
    return picked[:limit]


def _load_bank(config: ExperimentConfig) -> DemoBank | None:
    if config.regime not in (FEW_SHOT_COT, ZERO_PLUS_FEW_SHOT_COT):
        return None
    if config.demo_bank_path:
        with open(config.demo_bank_path, encoding="utf-8") as fh:
            return DemoBank.from_dict(json.load(fh))
    return load_demo_bank(config.task)


class _RandomAnswers:
    """Seeded coin flips, the paper's calibration baseline."""

    def __init__(self, seed: int) -> None:
        self._rng = random.Random(1_000_003 * seed + 424_243)

    def answer(self) -> str:
        return TRUE if self._rng.random() < 0.5 else FALSE


@dataclass
class _Segment:
    """One seed's worth of scored questions."""

    seed: int
    value: float
    n: int


def _segment_treegen(
    config: ExperimentConfig, seed: int, gateway: ChatGateway | None,
    bank: DemoBank | None,
) -> _Segment:
    tree_config = TreeConfig(seed=seed, **config.tree)
    dataset = assemble_dataset(tree_config)
    theory = dataset.tree.theory
    smap = build_symbol_map(
        theory,
        config.transform,
        seed=seed,
        preset=TASK_PRESETS[config.task],
        rename_entities=config.rename_entities,
    )
    applied = apply_map(theory, smap)
    closure = forward_closure(applied, tree_config.distinctness)

    if config.task == DEDUCE:
        questions = [
            (Atom(smap.rename_relation(q.atom.rel), q.atom.args), q.label)
            for q in dataset.questions
        ]
        questions = _cap(questions, config.max_questions, seed)
        labels = [label for _, label in questions]
        if config.backend == SOLVER:
            parsed = [
                TRUE if classify_hypothesis(applied, atom, closure) else FALSE
                for atom, _ in questions
            ]
        elif config.backend == RANDOM:
            coin = _RandomAnswers(seed)
            parsed = [coin.answer() for _ in questions]
        else:
            prompts = [
                build_prompt(
                    DEDUCE, applied, atom, config.regime, config.style, bank,
                    closure=closure, variant=config.variant,
                    after_selection=config.after_selection,
                    remove_rules=config.remove_rules,
                )
                for atom, _ in questions
            ]
            texts = gateway.complete_many(
                prompts, config.settings, config.cache_policy, config.parallelism
            )
            parsed = [parse_boolean_answer(t) for t in texts]
        return _Segment(seed, deduction_accuracy(parsed, labels), len(labels))

    if config.task == INDUCE:
        relations = [
            rel for rel in _derived_relations(applied) if closure.atoms_of(rel)
        ]
        gold = [
            canonicalize_rule(chain_normalize(applied, _defining_rule(applied, rel)))
            for rel in relations
        ]
        if config.backend == SOLVER:
            parsed = [
                induce_rule(
                    applied, closure.atoms_of(rel), make_template(applied, rel),
                    tree_config.distinctness,
                ).rule
                for rel in relations
            ]
        else:
            templates = [make_template(applied, rel) for rel in relations]
            prompts = [
                build_prompt(
                    INDUCE, applied, (rel, tmpl), config.regime, config.style, bank,
                    closure=closure, after_selection=config.after_selection,
                )
                for rel, tmpl in zip(relations, templates)
            ]
            texts = gateway.complete_many(
                prompts, config.settings, config.cache_policy, config.parallelism
            )
            parsed = []
            for text, tmpl in zip(texts, templates):
                try:
                    parsed.append(parse_rule_answer(text, tmpl, theory=applied))
                except NoRuleFound:
                    parsed.append(None)
        return _Segment(seed, induction_precision(parsed, gold), len(gold))

    observations = _cap(closure.ordered_atoms(), config.max_questions, seed)
    gold = [
        [p.selection() for p in closure.proofs_for(atom)] for atom in observations
    ]
    if config.backend == SOLVER:
        parsed = []
        for atom in observations:
            proof = abduce_proofs(applied, atom, closure)[0]
            rule, facts = proof.selection()
            parsed.append(ProofAnswer(rule, facts))
    else:
        prompts = [
            build_prompt(
                ABDUCE, applied, atom, config.regime, config.style, bank,
                closure=closure, after_selection=config.after_selection,
            )
            for atom in observations
        ]
        texts = gateway.complete_many(
            prompts, config.settings, config.cache_policy, config.parallelism
        )
        parsed = []
        for text in texts:
            try:
                parsed.append(parse_proof_answer(text))
            except NoSelectionFound:
                parsed.append(None)
    return _Segment(seed, proof_accuracy(parsed, gold), len(gold))


def _segment_proofwriter(
    config: ExperimentConfig, gateway: ChatGateway | None
) -> _Segment:
    with open(config.proofwriter_path, encoding="utf-8") as fh:
        records = filter_unknowns(parse_records(fh))
    items = []
    for record in records:
        smap = pw.build_record_map(record)
        shown = pw.depersonalize(record, smap) if config.transform == "entity-ids" else record
        for question in shown.questions:
            items.append((tuple(shown.sentences), question.text, question.answer == "True"))
    items = _cap(items, config.max_questions, 0)
    labels = [label for _, _, label in items]
    if not items:
        raise InfeasibleConfig("no scorable questions in the shard")
    if config.backend == RANDOM:
        coin = _RandomAnswers(0)
        parsed = [coin.answer() for _ in items]
    else:
        prompts = [
            build_context_prompt(list(context), statement, config.regime)
            for context, statement, _ in items
        ]
        texts = gateway.complete_many(
            prompts, config.settings, config.cache_policy, config.parallelism
        )
        parsed = [parse_boolean_answer(t) for t in texts]
    return _Segment(0, deduction_accuracy(parsed, labels), len(labels))


def _resolve(config: ExperimentConfig, gateway: ChatGateway | None) -> tuple[
    ChatGateway | None, DemoBank | None
]:
    """Fail before any request is sent if a referenced artifact is missing."""
    config.validate()
    if config.source == SOURCE_PROOFWRITER and not Path(config.proofwriter_path).exists():
        raise InfeasibleConfig(f"proofwriter shard not found: {config.proofwriter_path}")
    if config.demo_bank_path and not Path(config.demo_bank_path).exists():
        raise InfeasibleConfig(f"demo bank not found: {config.demo_bank_path}")
    bank = _load_bank(config)
    if config.backend == GATEWAY and gateway is None:
        store = TranscriptStore(config.transcript_dir) if config.transcript_dir else None
        if store is None and config.cache_policy != "live":
            raise InfeasibleConfig(
                f"cache policy {config.cache_policy!r} needs transcript_dir"
            )
        gateway = ChatGateway(store=store)
    return gateway, bank


def run_experiment(
    config: ExperimentConfig,
    run_dir: str | Path | None = None,
    gateway: ChatGateway | None = None,
) -> MetricReport:
    """Execute one experiment and return (optionally persist) its report.

    Per-seed rows come first, then an Avg row; with a run_dir the config,
    report renderings, and a manifest are written under it.
    """
    gateway, bank = _resolve(config, gateway)

    segments: list[_Segment] = []
    if config.source == SOURCE_TREEGEN:
        for seed in config.seeds:
            segments.append(_segment_treegen(config, seed, gateway, bank))
    else:
        segments.append(_segment_proofwriter(config, gateway))

    setting = setting_label(config)
    metric = _METRIC_NAMES[config.task]
    rows = [
        ReportRow(
            label=f"S{seg.seed}",
            task=config.task,
            setting=setting,
            regime=config.regime,
            style=config.style,
            metric=metric,
            value=round(seg.value, 4),
            n=seg.n,
            seeds=(seg.seed,),
        )
        for seg in segments
    ]
    mean = sum(seg.value for seg in segments) / len(segments)
    rows.append(
        ReportRow(
            label="Avg",
            task=config.task,
            setting=setting,
            regime=config.regime,
            style=config.style,
            metric=metric,
            value=round(mean, 4),
            n=sum(seg.n for seg in segments),
            seeds=tuple(seg.seed for seg in segments),
        )
    )
    report = MetricReport(rows=rows)

    if run_dir is not None:
        _write_run(Path(run_dir), config, report)
    return report


def _write_run(run_dir: Path, config: ExperimentConfig, report: MetricReport) -> None:
    run_dir.mkdir(parents=True, exist_ok=True)
    artifacts = {
        "config.json": json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n",
        "report.json": report.to_json(),
        "report.csv": report.to_csv(),
        "report.md": report.to_markdown(),
    }
    for name, payload in artifacts.items():
        (run_dir / name).write_text(payload, encoding="utf-8")
    manifest = {
        "version": 1,
        "created": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        "artifacts": sorted(artifacts),
    }
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def build_demo_bank(
    config: ExperimentConfig,
    gateway: ChatGateway,
    count: int = 6,
    bank_seed: int = 0,
) -> DemoBank:
    """Generate few-shot demonstrations by asking the endpoint itself:
    zero-shot-CoT completions on randomly drawn questions become the
    demo answers."""
    if config.source != SOURCE_TREEGEN or config.task != DEDUCE:
        raise InfeasibleConfig("demo generation is defined for treegen deduce runs")
    seed = config.seeds[0]
    tree_config = TreeConfig(seed=seed, **config.tree)
    dataset = assemble_dataset(tree_config)
    theory = dataset.tree.theory
    smap = build_symbol_map(
        theory,
        config.transform,
        seed=seed,
        preset=TASK_PRESETS[config.task],
        rename_entities=config.rename_entities,
    )
    applied = apply_map(theory, smap)
    closure = forward_closure(applied, tree_config.distinctness)
    rng = random.Random(1_000_003 * bank_seed + 860_893)
    picked = rng.sample(list(dataset.questions), min(count, len(dataset.questions)))
    demos = []
    for question in picked:
        atom = Atom(smap.rename_relation(question.atom.rel), question.atom.args)
        prompt = build_prompt(
            DEDUCE, applied, atom, ZERO_SHOT_COT, config.style, None, closure=closure
        )
        answer = gateway.complete(prompt, config.settings, config.cache_policy)
        demos.append(Demo(statement=render_statement(atom, config.style, applied), answer=answer))
    return DemoBank(
        task=DEDUCE, style=config.style, naming=config.transform, demos=tuple(demos)
    )
