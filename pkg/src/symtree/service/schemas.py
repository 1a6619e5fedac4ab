"""Request and response models for the HTTP routes."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..kb import DISTINCT_ALL


class HealthResponse(BaseModel):
    status: str = "ok"


class TreeRequest(BaseModel):
    seed: int = 1
    entity_count: int = 26
    max_depth: int = 5
    children_min: int = 1
    children_max: int = 3
    couple_probability: float = 0.5
    negative_count: int | None = None
    require_all_relations: bool = True
    closure_band: tuple[int, int] | None = (240, 360)
    distinctness: str = DISTINCT_ALL
    max_restarts: int = 200


class DatasetResponse(BaseModel):
    dataset: dict


class AtomDoc(BaseModel):
    rel: str
    args: list[str] = Field(min_length=1, max_length=2)


class ClosureRequest(BaseModel):
    theory: dict
    distinctness: str = DISTINCT_ALL


class ClosureResponse(BaseModel):
    closure: dict


class ClassifyRequest(BaseModel):
    theory: dict
    atom: AtomDoc
    distinctness: str = DISTINCT_ALL


class ClassifyResponse(BaseModel):
    entailed: bool


class AbduceRequest(BaseModel):
    theory: dict
    observation: AtomDoc
    distinctness: str = DISTINCT_ALL


class ProofDoc(BaseModel):
    rule: str
    facts: list[str]
    binding: dict[str, str]


class AbduceResponse(BaseModel):
    proofs: list[ProofDoc]


class InduceRequest(BaseModel):
    theory: dict
    relation: str
    distinctness: str = DISTINCT_ALL


class InduceResponse(BaseModel):
    canonical: str
    rendered: str
    support: int
    exact: bool


class MapBuildRequest(BaseModel):
    theory: dict
    mode: str
    seed: int = 0
    preset: str = "deduction"
    wordlist: list[str] | None = None
    include_genders: bool = True
    rename_entities: bool = False


class MapResponse(BaseModel):
    map: dict


class MapApplyRequest(BaseModel):
    theory: dict
    map: dict


class TheoryResponse(BaseModel):
    theory: dict


class RenderRequest(BaseModel):
    theory: dict
    style: str
    atom: AtomDoc | None = None  # statement rendering when given


class RenderResponse(BaseModel):
    rules: list[str]
    facts: list[str]
    statement: str | None = None


class PromptRequest(BaseModel):
    task: str
    theory: dict
    style: str
    regime: str
    question: AtomDoc | None = None  # deduce/abduce
    relation: str | None = None  # induce
    demo_bank: dict | None = None
    variant: int = 1
    remove_rules: bool = False
    after_selection: bool = False
    distinctness: str = DISTINCT_ALL


class MessageDoc(BaseModel):
    role: str
    content: str


class PromptResponse(BaseModel):
    messages: list[MessageDoc]
    text: str


class ParseRequest(BaseModel):
    task: str
    text: str
    # induce needs the template the answer was asked to fill
    head_rel: str | None = None
    length: int | None = None
    theory: dict | None = None


class ParseResponse(BaseModel):
    task: str
    answer: str | None = None  # deduce verdict or induce canonical form
    rule: str | None = None  # abduce rule label
    facts: list[str] | None = None


class MrrRequest(BaseModel):
    rankings: list[list[str]]
    gold: list[str | list[str]]
    known_true_tails: list[list[str]]


class MrrResponse(BaseModel):
    mrr: float


class IngestRequest(BaseModel):
    text: str  # JSONL payload
    depersonalized: bool = True


class IngestResponse(BaseModel):
    dataset: dict


class ExperimentRequest(BaseModel):
    config: dict
    run_dir: str | None = None


class ReportResponse(BaseModel):
    report: dict


class ReportFormatRequest(BaseModel):
    report: dict
    format: str = "markdown"  # json | csv | markdown


class FormattedReportResponse(BaseModel):
    formatted: str


class ErrorResponse(BaseModel):
    error: str
    detail: str
