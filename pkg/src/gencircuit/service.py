"""HTTP service exposing the engine to training workers and other clients.

Run with `uvicorn gencircuit.service:app`. Every endpoint is a thin wrapper
over the same core functions the CLI calls; circuit payloads travel in the
canonical text formats so the service stays format-stable with the on-disk
artifacts.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .anneal import AnnealSchedule, assign_gates
from .circuit_types import (
    CircuitSpec,
    CircuitType,
    emit_ground_truth,
    expected_counts_for_spec,
    parse_ground_truth,
)
from .cli import DOMAIN_ERRORS
from .dataset import deduplicate
from .generate import GenParams, generate_circuit, self_function_score
from .graphs import IsoMode
from .library import HillParams, load_parts_library
from .logic import GateNode, GateTopology, full_truth_table
from .model import deserialize_document, serialize_document
from .refine import RefineConfig, RewardThresholds, random_weights, refine_pool, surrogate_scorer
from .rng import mix
from .tasks import CurriculumState, TaskKind, make_task, pass_at_k, total_reward, tsr
from .taskio import emit_task_record, parse_submission, parse_task_record
from .verify import assess_script, hierarchical_reward

app = FastAPI(
    title="gencircuit",
    version=__version__,
    description="Procedural genetic-circuit benchmarks with hierarchical verification rewards",
)

_LIBRARY = load_parts_library("builtin")


def _domain(exc: Exception) -> HTTPException:
    return HTTPException(status_code=422, detail=str(exc))


class CircuitFiles(BaseModel):
    """One circuit in its canonical on-disk representation."""

    document: str
    script: str
    truth: str


def _spec_to_files(spec: CircuitSpec) -> CircuitFiles:
    return CircuitFiles(
        document=serialize_document(spec.document).decode("utf-8"),
        script=spec.script,
        truth=emit_ground_truth(spec),
    )


def _files_to_spec(files: CircuitFiles) -> CircuitSpec:
    doc = deserialize_document(files.document.encode("utf-8"))
    ctype, kappa, gt, description, provenance = parse_ground_truth(files.truth)
    return CircuitSpec(
        circuit_type=ctype, document=doc, script=files.script,
        ground_truth=gt, description=description, kappa=kappa, provenance=provenance,
    )


class HealthResponse(BaseModel):
    status: str
    version: str


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


class LibraryResponse(BaseModel):
    parts: int
    promoters: int
    cognate_pairs: int
    training_repressors: list[str]
    held_out_repressors: list[str]


@app.get("/library", response_model=LibraryResponse)
def library_summary() -> LibraryResponse:
    lib = _LIBRARY
    proms = [p for p in lib.parts.values() if p.kind.value == "promoter"]
    training = [lib.parts[r].name for r, _ in lib.cognate_pairs if lib.parts[r].tier.value == "training"]
    held = [lib.parts[r].name for r, _ in lib.cognate_pairs if lib.parts[r].tier.value == "held_out"]
    return LibraryResponse(
        parts=len(lib.parts),
        promoters=len(proms),
        cognate_pairs=len(lib.cognate_pairs),
        training_repressors=sorted(training),
        held_out_repressors=sorted(held),
    )


class GenerateRequest(BaseModel):
    circuit_type: str
    count: int = Field(default=1, ge=1, le=500)
    seed: int = 0
    gate_type: str | None = None
    cycle_length: int | None = None
    ffl_type: str | None = None
    promoter_class: str | None = None


class GenerateResponse(BaseModel):
    circuits: list[CircuitFiles]


@app.post("/generate", response_model=GenerateResponse)
def generate(req: GenerateRequest) -> GenerateResponse:
    try:
        ctype = CircuitType(req.circuit_type)
        circuits = []
        for i in range(req.count):
            params = GenParams(
                ctype, mix(req.seed, i),
                promoter_class=req.promoter_class,
                gate_type=req.gate_type,
                cycle_length=req.cycle_length,
                ffl_type=req.ffl_type,
            )
            circuits.append(_spec_to_files(generate_circuit(params, _LIBRARY)))
        return GenerateResponse(circuits=circuits)
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc


class VerifyRequest(BaseModel):
    circuit: CircuitFiles
    stage: int = Field(default=4, ge=1, le=4)


class CheckModel(BaseModel):
    level: str
    check_id: str
    passed: bool
    detail: str


class RewardModel(BaseModel):
    r_exec: float
    r_valid: float
    r_struct: float
    r_sem: float
    r_func: float
    f_task: float
    total: float
    weights: list[float]


class VerifyResponse(BaseModel):
    reward: RewardModel
    checks: list[CheckModel]
    diagnostics: list[str]


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest) -> VerifyResponse:
    try:
        spec = _files_to_spec(req.circuit)
        assessment = assess_script(
            spec.script, spec.circuit_type, _LIBRARY, expected_counts_for_spec(spec)
        )
        f_task = 0.0
        if assessment.document is not None:
            import dataclasses

            probe = dataclasses.replace(
                spec, document=assessment.document, reference=spec.reference_document
            )
            f_task = self_function_score(probe, _LIBRARY)
        breakdown = hierarchical_reward(
            assessment.exec_score, assessment.valid_score, assessment.struct_score,
            assessment.sem_score, f_task, CurriculumState(stage=req.stage).weights,
        )
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
    checks = []
    for level, result in (("struct", assessment.structural), ("sem", assessment.semantic)):
        if result is not None:
            checks.extend(
                CheckModel(level=level, check_id=c.check_id, passed=c.passed, detail=c.detail)
                for c in result.checks
            )
    diags = list(assessment.validity.diagnostics) if assessment.validity else []
    if assessment.exec_error is not None:
        diags.insert(0, str(assessment.exec_error))
    return VerifyResponse(reward=_reward_model(breakdown), checks=checks, diagnostics=diags)


def _reward_model(breakdown) -> RewardModel:
    return RewardModel(
        r_exec=breakdown.r_exec, r_valid=breakdown.r_valid, r_struct=breakdown.r_struct,
        r_sem=breakdown.r_sem, r_func=breakdown.r_func, f_task=breakdown.f_task,
        total=breakdown.total, weights=list(breakdown.weights),
    )


class MakeTaskRequest(BaseModel):
    circuit: CircuitFiles
    task: str
    seed: int = 0


class TaskResponse(BaseModel):
    record: str


@app.post("/tasks/make", response_model=TaskResponse)
def tasks_make(req: MakeTaskRequest) -> TaskResponse:
    try:
        spec = _files_to_spec(req.circuit)
        task = make_task(spec, TaskKind(req.task), req.seed, _LIBRARY)
        return TaskResponse(record=emit_task_record(task))
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc


class ScoreRequest(BaseModel):
    task_record: str
    submission: str
    stage: int = Field(default=4, ge=1, le=4)


class ScoreResponse(BaseModel):
    reward: RewardModel
    terms: dict[str, float]
    diagnostics: list[str]
    tau: float
    success: bool


@app.post("/score/task", response_model=ScoreResponse)
def score_task(req: ScoreRequest) -> ScoreResponse:
    try:
        task = parse_task_record(req.task_record)
        submission = parse_submission(req.submission)
        breakdown, detail = total_reward(
            task, submission, CurriculumState(stage=req.stage), _LIBRARY
        )
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
    return ScoreResponse(
        reward=_reward_model(breakdown),
        terms=detail.terms,
        diagnostics=list(detail.diagnostics),
        tau=task.tau,
        success=breakdown.total >= task.tau,
    )


class TruthTableRequest(BaseModel):
    circuit: CircuitFiles


class TruthTableResponse(BaseModel):
    rows: dict[str, int]


@app.post("/score/truth-table", response_model=TruthTableResponse)
def score_truth_table(req: TruthTableRequest) -> TruthTableResponse:
    try:
        spec = _files_to_spec(req.circuit)
        if spec.ground_truth.truth_table is None:
            raise HTTPException(status_code=422, detail="circuit has no steady-state truth table")
        table = full_truth_table(spec.document, _LIBRARY, spec.ground_truth.inputs)
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
    return TruthTableResponse(
        rows={"".join(str(b) for b in bits): v for bits, v in table.items()}
    )


class TopologyNodeModel(BaseModel):
    id: str
    inputs: list[str] = Field(default_factory=list)
    is_sensor: bool = False
    is_output: bool = False


class AssignRequest(BaseModel):
    nodes: list[TopologyNodeModel]
    gates: dict[str, list[float]]            # gate id -> [y_min, y_max, K, n]
    truth_table: dict[str, int]              # "01" -> bit
    t0: float = 1.0
    beta: float = 0.995
    iters: int = Field(default=2000, ge=1, le=100000)
    seed: int = 0


class AssignResponse(BaseModel):
    assignment: dict[str, str]
    min_on: float
    max_off: float
    objective: float
    success: bool


@app.post("/assign", response_model=AssignResponse)
def assign(req: AssignRequest) -> AssignResponse:
    try:
        topo = GateTopology(
            tuple(
                GateNode(n.id, tuple(n.inputs), is_sensor=n.is_sensor, is_output=n.is_output)
                for n in req.nodes
            )
        )
        bank = {gid: HillParams(*vals) for gid, vals in req.gates.items()}
        table = {tuple(int(c) for c in bits): v for bits, v in req.truth_table.items()}
        schedule = AnnealSchedule(t0=req.t0, beta=req.beta, iters=req.iters, seed=req.seed)
        result = assign_gates(topo, bank, table, schedule)
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
    return AssignResponse(
        assignment=result.assignment,
        min_on=result.score.min_on if result.score.min_on != float("inf") else -1.0,
        max_off=result.score.max_off,
        objective=result.score.objective if result.score.objective != float("inf") else -1.0,
        success=result.success,
    )


class DedupRequest(BaseModel):
    circuits: list[CircuitFiles]
    mode: str = "role_labeled"


class DedupResponse(BaseModel):
    kept: list[int]
    removed_pairs: list[tuple[int, int]]


@app.post("/dedup", response_model=DedupResponse)
def dedup(req: DedupRequest) -> DedupResponse:
    try:
        specs = [_files_to_spec(f) for f in req.circuits]
        result = deduplicate(specs, IsoMode(req.mode))
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
    return DedupResponse(kept=result.kept_indices, removed_pairs=result.removed_pairs)


class RefineRequest(BaseModel):
    pool_size: int = Field(default=2000, ge=1, le=20000)
    elite_frac: float = 0.15
    mutation_rate: float = 0.3
    fresh_frac: float = 0.10
    iterations: int = Field(default=8, ge=1, le=64)
    seed: int = 0
    weights_seed: int = 0
    fc_target: float = 25.0


class RefineIteration(BaseModel):
    iteration: int
    mean_score: float
    elite_mean: float
    best_score: float
    best: list[int]


class RefineResponse(BaseModel):
    history: list[RefineIteration]


@app.post("/refine", response_model=RefineResponse)
def refine(req: RefineRequest) -> RefineResponse:
    try:
        weights = random_weights(req.weights_seed)
        scorer = surrogate_scorer(weights, RewardThresholds(fc_target=req.fc_target))
        config = RefineConfig(
            pool_size=req.pool_size, elite_frac=req.elite_frac,
            mutation_rate=req.mutation_rate, fresh_frac=req.fresh_frac,
            iterations=req.iterations, seed=req.seed,
        )
        history = refine_pool(config, scorer)
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
    return RefineResponse(
        history=[
            RefineIteration(
                iteration=row.iteration, mean_score=row.mean_score,
                elite_mean=row.elite_mean, best_score=row.best_score, best=list(row.best),
            )
            for row in history
        ]
    )


class TsrRequest(BaseModel):
    results: list[tuple[float, float]]       # (reward, tau)


class TsrResponse(BaseModel):
    tsr: float


@app.post("/metrics/tsr", response_model=TsrResponse)
def metrics_tsr(req: TsrRequest) -> TsrResponse:
    try:
        return TsrResponse(tsr=tsr([(r, t) for r, t in req.results]))
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc


class PassAtKResponse(BaseModel):
    value: float


@app.get("/metrics/pass-at-k", response_model=PassAtKResponse)
def metrics_pass_at_k(n: int, c: int, k: int) -> PassAtKResponse:
    try:
        return PassAtKResponse(value=pass_at_k(n, c, k))
    except DOMAIN_ERRORS as exc:
        raise _domain(exc) from exc
