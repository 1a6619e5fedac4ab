"""Command line client, run end to end against the in-process service."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from symtree.cli import main

FIXTURE = Path(__file__).parent / "fixtures" / "proofwriter_sample.jsonl"

SMALL_TREE = [
    "--entity-count",
    "12",
    "--no-closure-band",
    "--no-require-all-relations",
]


def run_cli(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def dataset_path(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen") / "tree.json"
    code = run_cli("gen", "--seeds", "3", *SMALL_TREE, "-o", out)
    assert code == 0
    return out


def test_gen_single_seed(dataset_path):
    doc = json.loads(dataset_path.read_text())
    assert doc["seed"] == 3
    assert doc["source"] == "treegen"
    assert doc["questions"]


def test_gen_multiple_seeds(tmp_path):
    out_dir = tmp_path / "trees"
    code = run_cli("gen", "--seeds", "1,2", *SMALL_TREE, "-o", f"{out_dir}/")
    assert code == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["tree_s1.json", "tree_s2.json"]
    for name, seed in zip(names, (1, 2)):
        assert json.loads((out_dir / name).read_text())["seed"] == seed


def test_transform_rewrites_dataset(dataset_path, tmp_path, capsys):
    out = tmp_path / "sym.json"
    code = run_cli(
        "transform",
        "--input",
        dataset_path,
        "--mode",
        "id-symbols",
        "--preset",
        "deduction",
        "-o",
        out,
    )
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["transform"]["mode"] == "id-symbols"
    rels = {q["rel"] for q in doc["questions"]}
    assert rels and all(rel.startswith("r") for rel in rels)
    assert "parentOf" not in json.dumps(doc["theory"])


def test_render_blocks(dataset_path, capsys):
    code = run_cli("render", "--input", dataset_path, "--style", "natural")
    assert code == 0
    out = capsys.readouterr().out
    assert "L1: If " in out
    assert "F1: " in out


def test_render_prompt(dataset_path, capsys):
    doc = json.loads(dataset_path.read_text())
    question = next(q for q in doc["questions"] if q["label"])
    code = run_cli(
        "render",
        "--input",
        dataset_path,
        "--style",
        "logic",
        "--task",
        "deduce",
        "--regime",
        "zero-shot-cot",
        "--atom",
        question["rel"],
        *question["args"],
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "Let's think step by step." in out


def test_solve_experiment_report(capsys):
    code = run_cli(
        "solve",
        "--task",
        "deduce",
        "--seeds",
        "1",
        *SMALL_TREE,
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "| Label |" in out
    assert "100.0" in out


def test_solve_single_atom(dataset_path, capsys):
    doc = json.loads(dataset_path.read_text())
    question = next(q for q in doc["questions"] if q["label"])
    code = run_cli(
        "solve",
        "--task",
        "abduce",
        "--input",
        dataset_path,
        "--atom",
        question["rel"],
        *question["args"],
    )
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("True")
    assert "L" in out and "F" in out


def test_solve_single_relation(dataset_path, capsys):
    doc = json.loads(dataset_path.read_text())
    rel = next(q for q in doc["questions"] if q["label"])["rel"]
    code = run_cli(
        "solve", "--task", "induce", "--input", dataset_path, "--relation", rel
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "→" in out or "->" in out


def test_ingest_proofwriter(tmp_path):
    out = tmp_path / "pw.json"
    code = run_cli("ingest-proofwriter", "--input", FIXTURE, "-o", out)
    assert code == 0
    doc = json.loads(out.read_text())
    assert doc["source"] == "proofwriter"
    assert doc["questions"][0]["context"][0] == "The e1 likes the e2."

    kept = tmp_path / "pw_names.json"
    code = run_cli(
        "ingest-proofwriter", "--input", FIXTURE, "--keep-names", "-o", kept
    )
    assert code == 0
    doc = json.loads(kept.read_text())
    assert doc["questions"][0]["context"][0] == "The bear likes the dog."


def test_run_and_report(tmp_path, capsys):
    config = {
        "version": 1,
        "task": "deduce",
        "seeds": [1],
        "backend": "solver",
        "tree": {
            "entity_count": 12,
            "closure_band": None,
            "require_all_relations": False,
        },
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    report_path = tmp_path / "report.json"
    run_dir = tmp_path / "run"
    code = run_cli(
        "run", "--config", config_path, "--run-dir", run_dir, "-o", report_path
    )
    assert code == 0
    report_doc = json.loads(report_path.read_text())
    assert report_doc["rows"][0]["value"] == 100.0
    assert sorted(p.name for p in run_dir.iterdir()) == [
        "config.json",
        "manifest.json",
        "report.csv",
        "report.json",
        "report.md",
    ]
    capsys.readouterr()

    code = run_cli("report", "--report", report_path, "--format", "csv")
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("label,task,setting")


def test_errors_exit_nonzero(tmp_path):
    with pytest.raises(SystemExit) as err:
        run_cli(
            "gen",
            "--seeds",
            "1",
            "--entity-count",
            "6",
            "--closure-band",
            "500",
            "600",
            "-o",
            tmp_path / "never.json",
        )
    assert "InfeasibleConfig" in str(err.value)
