"""Command line interface; every subcommand talks to the HTTP service."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import httpx

from .service.client import in_process_client, remote_client

API_KEY_ENV = "SYMTREE_API_KEY"


def _client(args: argparse.Namespace) -> httpx.Client:
    if args.server:
        return remote_client(args.server, args.api_key or os.environ.get(API_KEY_ENV, ""))
    return in_process_client()


def _call(client: httpx.Client, method: str, path: str, **kwargs) -> dict:
    response = client.request(method, path, **kwargs)
    if response.status_code != 200:
        try:
            doc = response.json()
            message = f"{doc.get('error', response.status_code)}: {doc.get('detail', response.text)}"
        except ValueError:
            message = f"HTTP {response.status_code}: {response.text}"
        raise SystemExit(f"error: {message}")
    return response.json()


def _write_json(path: str | Path, doc: dict) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, ensure_ascii=False, indent=2)
        fh.write("\n")


def _load_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _theory_of(doc: dict) -> dict:
    return doc["theory"] if "theory" in doc else doc


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(part) for part in text.replace(",", " ").split()]
    except ValueError:
        raise SystemExit(f"error: bad seed list {text!r}")


def _tree_overrides(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.entity_count is not None:
        overrides["entity_count"] = args.entity_count
    if args.max_depth is not None:
        overrides["max_depth"] = args.max_depth
    if args.no_require_all_relations:
        overrides["require_all_relations"] = False
    if args.no_closure_band:
        overrides["closure_band"] = None
    elif args.closure_band is not None:
        overrides["closure_band"] = tuple(args.closure_band)
    return overrides


def _add_tree_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--entity-count", type=int, default=None)
    parser.add_argument("--max-depth", type=int, default=None)
    parser.add_argument("--closure-band", type=int, nargs=2, metavar=("LO", "HI"), default=None)
    parser.add_argument("--no-closure-band", action="store_true")
    parser.add_argument(
        "--no-require-all-relations", action="store_true",
        help="allow trees that miss some derived relations (needed below ~18 entities)",
    )


def cmd_gen(args: argparse.Namespace) -> int:
    client = _client(args)
    seeds = _parse_seeds(args.seeds)
    out_dir = Path(args.out)
    body_base = _tree_overrides(args)
    multi = len(seeds) > 1 or args.out.endswith("/")
    for seed in seeds:
        body = dict(body_base, seed=seed)
        doc = _call(client, "POST", "/v1/trees", json=body)["dataset"]
        path = out_dir / f"tree_s{seed}.json" if multi else Path(args.out)
        _write_json(path, doc)
        positives = sum(1 for q in doc["questions"] if q["label"])
        print(f"seed {seed}: {len(doc['theory']['entities'])} entities, "
              f"{positives} inferred, {len(doc['questions'])} questions -> {path}")
    return 0


def cmd_transform(args: argparse.Namespace) -> int:
    client = _client(args)
    doc = _load_json(args.input)
    theory = _theory_of(doc)
    build = {
        "theory": theory,
        "mode": args.mode,
        "seed": args.seed,
        "preset": args.preset,
        "rename_entities": args.rename_entities,
    }
    map_doc = _call(client, "POST", "/v1/maps/build", json=build)["map"]
    applied = _call(
        client, "POST", "/v1/maps/apply", json={"theory": theory, "map": map_doc}
    )["theory"]
    if "questions" in doc:
        relations = map_doc["relations"]
        out = dict(doc, theory=applied, transform=map_doc)
        out["questions"] = [
            dict(q, rel=relations.get(q["rel"], q["rel"])) for q in doc["questions"]
        ]
    else:
        out = {"theory": applied, "transform": map_doc}
    _write_json(args.out, out)
    print(f"{args.mode} (seed {args.seed}, preset {args.preset}) -> {args.out}")
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    client = _client(args)
    doc = _load_json(args.input)
    theory = _theory_of(doc)
    if args.task:
        body = {
            "task": args.task,
            "theory": theory,
            "style": args.style,
            "regime": args.regime,
            "variant": args.variant,
            "remove_rules": args.remove_rules,
            "after_selection": args.after_selection,
        }
        if args.relation:
            body["relation"] = args.relation
        elif args.atom:
            body["question"] = {"rel": args.atom[0], "args": args.atom[1:]}
        else:
            raise SystemExit("error: prompt rendering needs --atom or --relation")
        if args.demo_bank:
            body["demo_bank"] = _load_json(args.demo_bank)
        prompt = _call(client, "POST", "/v1/prompts", json=body)
        print(prompt["text"])
        return 0
    body = {"theory": theory, "style": args.style}
    if args.atom:
        body["atom"] = {"rel": args.atom[0], "args": args.atom[1:]}
    rendered = _call(client, "POST", "/v1/render", json=body)
    print("\n".join(rendered["rules"]))
    print()
    print("\n".join(rendered["facts"]))
    if rendered.get("statement"):
        print()
        print(rendered["statement"])
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    client = _client(args)
    if args.input:
        doc = _load_json(args.input)
        theory = _theory_of(doc)
        if args.relation:
            result = _call(
                client, "POST", "/v1/induce",
                json={"theory": theory, "relation": args.relation},
            )
            print(result["rendered"])
            print(f"support={result['support']} exact={result['exact']}")
            return 0
        if not args.atom:
            raise SystemExit("error: solving a file needs --atom or --relation")
        atom = {"rel": args.atom[0], "args": args.atom[1:]}
        verdict = _call(
            client, "POST", "/v1/classify", json={"theory": theory, "atom": atom}
        )["entailed"]
        print("True" if verdict else "False")
        if verdict and args.task == "abduce":
            proofs = _call(
                client, "POST", "/v1/abduce",
                json={"theory": theory, "observation": atom},
            )["proofs"]
            for proof in proofs:
                print(f"{proof['rule']}: {', '.join(proof['facts'])}")
        return 0
    config = {
        "version": 1,
        "task": args.task,
        "source": "treegen",
        "seeds": _parse_seeds(args.seeds),
        "tree": _tree_overrides(args),
        "backend": "solver",
    }
    report = _call(client, "POST", "/v1/experiments", json={"config": config})["report"]
    formatted = _call(
        client, "POST", "/v1/reports/format",
        json={"report": report, "format": "markdown"},
    )["formatted"]
    print(formatted, end="")
    return 0


def cmd_ingest_proofwriter(args: argparse.Namespace) -> int:
    client = _client(args)
    with open(args.input, encoding="utf-8") as fh:
        text = fh.read()
    doc = _call(
        client, "POST", "/v1/proofwriter",
        json={"text": text, "depersonalized": not args.keep_names},
    )["dataset"]
    _write_json(args.out, doc)
    print(f"{len(doc['questions'])} questions -> {args.out}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    client = _client(args)
    config = _load_json(args.config)
    body = {"config": config}
    if args.run_dir:
        body["run_dir"] = args.run_dir
    report = _call(client, "POST", "/v1/experiments", json=body)["report"]
    formatted = _call(
        client, "POST", "/v1/reports/format",
        json={"report": report, "format": "markdown"},
    )["formatted"]
    print(formatted, end="")
    if args.out:
        _write_json(args.out, report)
        print(f"report -> {args.out}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    client = _client(args)
    report = _load_json(args.report)
    formatted = _call(
        client, "POST", "/v1/reports/format",
        json={"report": report, "format": args.format},
    )["formatted"]
    print(formatted, end="")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("symtree.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symtree",
        description="Closed-world kinship benchmarks: generate, rename, prompt, solve, score.",
    )
    parser.add_argument("--server", default="", help="service URL (default: in-process)")
    parser.add_argument("--api-key", default="", help=f"bearer token (or ${API_KEY_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate tree datasets")
    p.add_argument("--seeds", default="1", help="comma or space separated")
    _add_tree_arguments(p)
    p.add_argument("-o", "--out", required=True, help="output file (one seed) or directory")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("transform", help="rename symbols in a dataset or theory")
    p.add_argument("--input", required=True)
    p.add_argument(
        "--mode", required=True,
        choices=["identity", "id-symbols", "garbled", "single-token",
                 "counter-commonsense", "entity-ids"],
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--preset", default="deduction", choices=["deduction", "induction"])
    p.add_argument("--rename-entities", action="store_true")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("render", help="render rules/facts, statements, or full prompts")
    p.add_argument("--input", required=True, help="dataset or theory JSON")
    p.add_argument("--style", default="logic", choices=["logic", "natural"])
    p.add_argument("--atom", nargs="+", metavar="REL ARG", default=None)
    p.add_argument("--task", default="", choices=["", "deduce", "induce", "abduce"])
    p.add_argument("--regime", default="zero-shot")
    p.add_argument("--relation", default="", help="target relation for induce prompts")
    p.add_argument("--demo-bank", default="", help="demo bank JSON for few-shot regimes")
    p.add_argument("--variant", type=int, default=1)
    p.add_argument("--remove-rules", action="store_true")
    p.add_argument("--after-selection", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("solve", help="exact reasoning: experiments or single queries")
    p.add_argument("--task", default="deduce", choices=["deduce", "induce", "abduce"])
    p.add_argument("--seeds", default="1 2 3 4 5 6 7 8 9 10")
    _add_tree_arguments(p)
    p.add_argument("--input", default="", help="dataset/theory JSON for single queries")
    p.add_argument("--atom", nargs="+", metavar="REL ARG", default=None)
    p.add_argument("--relation", default="")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ingest-proofwriter", help="convert a ProofWriter meta shard")
    p.add_argument("--input", required=True, help="JSONL shard")
    p.add_argument("--keep-names", action="store_true", help="skip depersonalization")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_ingest_proofwriter)

    p = sub.add_parser("run", help="run an experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--run-dir", default="")
    p.add_argument("-o", "--out", default="", help="also write the report JSON here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="format a report document")
    p.add_argument("--report", required=True)
    p.add_argument("--format", default="markdown", choices=["json", "csv", "markdown"])
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
