"""FastAPI application: every toolkit operation behind a JSON route."""

from __future__ import annotations

import io

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..errors import ToolkitError
from ..harness import ExperimentConfig, MetricReport, run_experiment
from ..kb import Atom, Const, Theory, canonicalize_rule
from ..metrics import (
    ABDUCE, DEDUCE, INDUCE, filtered_mrr, parse_boolean_answer,
    parse_proof_answer, parse_rule_answer,
)
from ..proofwriter import ingest
from ..reasoner import (
    RuleTemplate, abduce_proofs, classify_hypothesis, forward_closure,
    induce_rule, make_template,
)
from ..rendering import (
    DemoBank, build_prompt, facts_block, messages_to_text, render_rule,
    render_statement, rules_block,
)
from ..transforms import SymbolMap, apply_map, build_symbol_map
from ..treegen import TreeConfig, assemble_dataset
from . import schemas


def _ground(doc: schemas.AtomDoc) -> Atom:
    return Atom(doc.rel, tuple(Const(a) for a in doc.args))


def create_app() -> FastAPI:
    app = FastAPI(title="symtree", version="1.0")

    @app.exception_handler(ToolkitError)
    async def toolkit_error(request: Request, exc: ToolkitError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError) -> JSONResponse:
        return JSONResponse(
            status_code=400,
            content={"error": "ValueError", "detail": str(exc)},
        )

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz() -> schemas.HealthResponse:
        return schemas.HealthResponse()

    @app.post("/v1/trees", response_model=schemas.DatasetResponse)
    def trees(req: schemas.TreeRequest) -> schemas.DatasetResponse:
        config = TreeConfig(
            seed=req.seed,
            entity_count=req.entity_count,
            max_depth=req.max_depth,
            children_min=req.children_min,
            children_max=req.children_max,
            couple_probability=req.couple_probability,
            negative_count=req.negative_count,
            require_all_relations=req.require_all_relations,
            closure_band=req.closure_band,
            distinctness=req.distinctness,
            max_restarts=req.max_restarts,
        )
        return schemas.DatasetResponse(dataset=assemble_dataset(config).to_dict())

    @app.post("/v1/closure", response_model=schemas.ClosureResponse)
    def closure(req: schemas.ClosureRequest) -> schemas.ClosureResponse:
        theory = Theory.from_dict(req.theory)
        return schemas.ClosureResponse(
            closure=forward_closure(theory, req.distinctness).to_dict()
        )

    @app.post("/v1/classify", response_model=schemas.ClassifyResponse)
    def classify(req: schemas.ClassifyRequest) -> schemas.ClassifyResponse:
        theory = Theory.from_dict(req.theory)
        verdict = classify_hypothesis(theory, _ground(req.atom), distinctness=req.distinctness)
        return schemas.ClassifyResponse(entailed=verdict)

    @app.post("/v1/abduce", response_model=schemas.AbduceResponse)
    def abduce(req: schemas.AbduceRequest) -> schemas.AbduceResponse:
        theory = Theory.from_dict(req.theory)
        proofs = abduce_proofs(theory, _ground(req.observation), distinctness=req.distinctness)
        return schemas.AbduceResponse(
            proofs=[
                schemas.ProofDoc(rule=p.rule, facts=list(p.facts), binding=dict(p.binding))
                for p in proofs
            ]
        )

    @app.post("/v1/induce", response_model=schemas.InduceResponse)
    def induce(req: schemas.InduceRequest) -> schemas.InduceResponse:
        theory = Theory.from_dict(req.theory)
        closure = forward_closure(theory, req.distinctness)
        template = make_template(theory, req.relation)
        result = induce_rule(
            theory, closure.atoms_of(req.relation), template, req.distinctness
        )
        return schemas.InduceResponse(
            canonical=result.canonical,
            rendered=render_rule(result.rule, "logic"),
            support=result.support,
            exact=result.exact,
        )

    @app.post("/v1/maps/build", response_model=schemas.MapResponse)
    def maps_build(req: schemas.MapBuildRequest) -> schemas.MapResponse:
        theory = Theory.from_dict(req.theory)
        smap = build_symbol_map(
            theory,
            req.mode,
            seed=req.seed,
            preset=req.preset,
            wordlist=tuple(req.wordlist) if req.wordlist else None,
            include_genders=req.include_genders,
            rename_entities=req.rename_entities,
        )
        return schemas.MapResponse(map=smap.to_dict())

    @app.post("/v1/maps/apply", response_model=schemas.TheoryResponse)
    def maps_apply(req: schemas.MapApplyRequest) -> schemas.TheoryResponse:
        theory = Theory.from_dict(req.theory)
        smap = SymbolMap.from_dict(req.map)
        return schemas.TheoryResponse(theory=apply_map(theory, smap).to_dict())

    @app.post("/v1/render", response_model=schemas.RenderResponse)
    def render(req: schemas.RenderRequest) -> schemas.RenderResponse:
        theory = Theory.from_dict(req.theory)
        statement = None
        if req.atom is not None:
            statement = render_statement(_ground(req.atom), req.style, theory)
        return schemas.RenderResponse(
            rules=rules_block(theory, req.style).splitlines(),
            facts=facts_block(theory, req.style).splitlines(),
            statement=statement,
        )

    @app.post("/v1/prompts", response_model=schemas.PromptResponse)
    def prompts(req: schemas.PromptRequest) -> schemas.PromptResponse:
        theory = Theory.from_dict(req.theory)
        bank = DemoBank.from_dict(req.demo_bank) if req.demo_bank else None
        closure = forward_closure(theory, req.distinctness)
        if req.task == INDUCE:
            if not req.relation:
                raise ValueError("induce prompts need a relation name")
            question = (req.relation, make_template(theory, req.relation))
        else:
            if req.question is None:
                raise ValueError(f"{req.task} prompts need a question atom")
            question = _ground(req.question)
        messages = build_prompt(
            req.task, theory, question, req.regime, req.style, bank,
            closure=closure, variant=req.variant,
            after_selection=req.after_selection, remove_rules=req.remove_rules,
        )
        return schemas.PromptResponse(
            messages=[
                schemas.MessageDoc(role=m.role, content=m.content) for m in messages
            ],
            text=messages_to_text(messages),
        )

    @app.post("/v1/parse", response_model=schemas.ParseResponse)
    def parse(req: schemas.ParseRequest) -> schemas.ParseResponse:
        if req.task == DEDUCE:
            return schemas.ParseResponse(task=DEDUCE, answer=parse_boolean_answer(req.text))
        if req.task == INDUCE:
            if req.head_rel is None or req.length is None:
                raise ValueError("induce parsing needs head_rel and length")
            theory = Theory.from_dict(req.theory) if req.theory else None
            template = RuleTemplate(head_rel=req.head_rel, length=req.length)
            rule = parse_rule_answer(req.text, template, theory=theory)
            return schemas.ParseResponse(task=INDUCE, answer=canonicalize_rule(rule))
        if req.task == ABDUCE:
            answer = parse_proof_answer(req.text)
            return schemas.ParseResponse(
                task=ABDUCE, rule=answer.rule, facts=answer.to_dict()["facts"]
            )
        raise ValueError(f"unknown task: {req.task!r}")

    @app.post("/v1/metrics/mrr", response_model=schemas.MrrResponse)
    def metrics_mrr(req: schemas.MrrRequest) -> schemas.MrrResponse:
        value = filtered_mrr(req.rankings, req.gold, req.known_true_tails)
        return schemas.MrrResponse(mrr=value)

    @app.post("/v1/proofwriter", response_model=schemas.IngestResponse)
    def proofwriter_ingest(req: schemas.IngestRequest) -> schemas.IngestResponse:
        stream = io.StringIO(req.text)
        return schemas.IngestResponse(
            dataset=ingest(stream, depersonalized=req.depersonalized)
        )

    @app.post("/v1/experiments", response_model=schemas.ReportResponse)
    def experiments(req: schemas.ExperimentRequest) -> schemas.ReportResponse:
        config = ExperimentConfig.from_dict(req.config)
        report = run_experiment(config, run_dir=req.run_dir)
        return schemas.ReportResponse(report=report.to_dict())

    @app.post("/v1/reports/format", response_model=schemas.FormattedReportResponse)
    def reports_format(req: schemas.ReportFormatRequest) -> schemas.FormattedReportResponse:
        report = MetricReport.from_dict(req.report)
        if req.format == "json":
            return schemas.FormattedReportResponse(formatted=report.to_json())
        if req.format == "csv":
            return schemas.FormattedReportResponse(formatted=report.to_csv())
        if req.format == "markdown":
            return schemas.FormattedReportResponse(formatted=report.to_markdown())
        raise ValueError(f"unknown report format: {req.format!r}")

    return app


app = create_app()
