"""Task instances T1-T9 and masked prediction, scoring, curriculum, metrics.

Tasks come in two shapes. Generative tasks take a construction script back
from the solver and run it through the full verification hierarchy; analytic
tasks (logic prediction, gate assignment, masked prediction) take structured
answers, and their prerequisite levels are 1 when the submission is
well-formed and 0 otherwise, so an empty submission always scores R = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from fractions import Fraction

from .circuit_types import (
    CircuitSpec,
    CircuitType,
    FLAW_LEVELS,
    FlawRecord,
    FlawType,
    expected_counts_for_spec,
)
from .flaws import applicable_flaws, inject_flaw
from .generate import self_function_score
from .graphs import IsoMode, extract_regulatory_graph, isomorphic
from .library import HillParams, PartKind, PartsLibrary
from .logic import GateTopology, truth_table_from_propagation
from .model import CircuitDocument, serialize_document
from .rng import Rng, mix
from .script import run_script
from .verify import (
    STAGE_WEIGHTS,
    DocumentAssessment,
    RewardBreakdown,
    assess_script,
    hierarchical_reward,
    verify_semantic,
    verify_structural,
    verify_validity,
)


class TaskError(Exception):
    pass


class TaskKind(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"
    T5 = "T5"
    T6 = "T6"
    T7 = "T7"
    T8 = "T8"
    T9 = "T9"
    MASKED_PART = "masked_part"
    MASKED_TYPE = "masked_type"
    MASKED_FUNCTION = "masked_function"
    DENOVO_ISO = "denovo_iso"


# tau = 0.9 for complete-correctness tasks, 0.8 for partial-credit tasks
TASK_TAU: dict[TaskKind, float] = {
    TaskKind.T1: 0.9, TaskKind.T2: 0.9, TaskKind.T6: 0.9,
    TaskKind.T3: 0.8, TaskKind.T4: 0.8, TaskKind.T5: 0.8, TaskKind.T7: 0.8,
    TaskKind.T8: 0.8, TaskKind.T9: 0.8,
    TaskKind.MASKED_PART: 0.8, TaskKind.MASKED_TYPE: 0.8,
    TaskKind.MASKED_FUNCTION: 0.8, TaskKind.DENOVO_ISO: 0.8,
}

GENERATIVE_TASKS = {
    TaskKind.T1, TaskKind.T2, TaskKind.T3, TaskKind.T4,
    TaskKind.T6, TaskKind.T7, TaskKind.T9, TaskKind.DENOVO_ISO,
}

_ALL_TYPES = set(CircuitType)
TASK_APPLICABILITY: dict[TaskKind, set[CircuitType]] = {
    TaskKind.T1: set(_ALL_TYPES),
    TaskKind.T2: set(_ALL_TYPES),
    TaskKind.T3: set(_ALL_TYPES),
    TaskKind.T4: set(_ALL_TYPES),
    TaskKind.T5: {
        CircuitType.NOT_GATE, CircuitType.TWO_INPUT_GATE,
        CircuitType.FFL, CircuitType.BRANCHED, CircuitType.CASCADE,
    },
    TaskKind.T6: set(_ALL_TYPES),
    TaskKind.T7: set(_ALL_TYPES),
    TaskKind.T8: {CircuitType.CASCADE},
    TaskKind.T9: {CircuitType.CASCADE},
    TaskKind.MASKED_PART: _ALL_TYPES - {CircuitType.CASCADE},
    TaskKind.MASKED_TYPE: _ALL_TYPES - {CircuitType.CASCADE},
    TaskKind.MASKED_FUNCTION: _ALL_TYPES - {CircuitType.CASCADE},
    TaskKind.DENOVO_ISO: _ALL_TYPES - {CircuitType.CASCADE},
}


@dataclass(frozen=True)
class TaskInstance:
    task: TaskKind
    tau: float
    payload: dict
    reference: CircuitSpec       # hidden ground truth (never shown to the solver)
    flaw: FlawRecord | None = None

    @property
    def generative(self) -> bool:
        return self.task in GENERATIVE_TASKS


@dataclass(frozen=True)
class Submission:
    script: str | None = None
    flaw_type: str | None = None
    location: str | None = None
    outputs: dict[tuple[int, ...], int] | None = None   # T5 rows
    assignment: dict[str, str] | None = None            # T8
    ranking: tuple[str, ...] | None = None              # masked tasks
    faulty: tuple[str, ...] | None = None               # T9 gate ids


@dataclass(frozen=True)
class ScoreDetail:
    f_task: float
    terms: dict[str, float]
    diagnostics: tuple[str, ...] = ()


MASK_TOKEN = "MASK"


# --- task construction -------------------------------------------------------------


def make_task(
    spec: CircuitSpec,
    task: TaskKind,
    seed: int,
    library: PartsLibrary,
    mask_index: int | None = None,
) -> TaskInstance:
    if spec.circuit_type not in TASK_APPLICABILITY[task]:
        raise TaskError(
            f"task {task.value} is not applicable to circuit type "
            f"{spec.circuit_type.value} (see the task applicability matrix)"
        )
    rng = Rng(mix(seed, sum(ord(c) for c in task.value)))
    tau = TASK_TAU[task]

    if task is TaskKind.T1:
        flawed = _inject_from_levels(spec, (1, 2), rng, library)
        error_text = _execution_report(flawed)
        payload = {"script": flawed.script, "error": error_text}
        return TaskInstance(task, tau, payload, spec, flawed.ground_truth.flaw)

    if task is TaskKind.T2:
        partial, block = _elide_block(spec, rng)
        payload = {"script": partial, "elided": block}
        return TaskInstance(task, tau, payload, spec)

    if task is TaskKind.T3:
        instruction, expected = _substitution(spec, rng, library)
        payload = {
            "script": spec.script,
            "instruction": (
                f"Replace part {instruction['old']} with {instruction['new']} "
                f"(component {instruction['component']}); make no other changes."
            ),
            **instruction,
        }
        ref = replace(spec, document=expected, script=spec.script)
        return TaskInstance(task, tau, payload, ref)

    if task is TaskKind.T4:
        payload = {
            "description": spec.description,
            "circuit_type": spec.circuit_type.value,
        }
        return TaskInstance(task, tau, payload, spec)

    if task is TaskKind.T5:
        if spec.ground_truth.truth_table is None:
            raise TaskError("logic prediction needs a circuit with a truth table")
        vectors = sorted(spec.ground_truth.truth_table)
        payload = {
            "script": spec.script,
            "inputs": tuple(p.name for p in spec.ground_truth.inputs),
            "vectors": tuple(vectors),
        }
        return TaskInstance(task, tau, payload, spec)

    if task is TaskKind.T6:
        flawed = _inject_from_levels(spec, (3, 4), rng, library)
        payload = {"script": flawed.script, "symptom": flawed.ground_truth.flaw.symptom}
        return TaskInstance(task, tau, payload, spec, flawed.ground_truth.flaw)

    if task is TaskKind.T7 or task is TaskKind.DENOVO_ISO:
        payload = {
            "description": spec.description,
            "circuit_type": spec.circuit_type.value,
        }
        return TaskInstance(task, tau, payload, spec)

    if task is TaskKind.T8:
        gt = spec.ground_truth
        if gt.nor_topology is None or gt.truth_table is None:
            raise TaskError("gate assignment needs a cascade with topology and table")
        bank = dict(library.gate_bank())
        # the hidden answer must be feasible over the bank the solver sees
        from .anneal import AnnealSchedule, assign_gates

        solved = assign_gates(
            gt.nor_topology, bank, gt.truth_table,
            AnnealSchedule(t0=1.0, beta=0.985, iters=400, seed=mix(seed, 0x78A)),
        )
        if not solved.success:
            raise TaskError("no margin-feasible assignment exists over the gate bank")
        payload = {
            "truth_table": dict(gt.truth_table),
            "topology": gt.nor_topology,
            "gate_bank": bank,
        }
        reference = replace(
            spec, ground_truth=replace(gt, gate_assignment=dict(solved.assignment))
        )
        return TaskInstance(task, tau, payload, reference)

    if task is TaskKind.T9:
        fault = rng.choice(
            [FlawType.MISMATCHED_PAIR, FlawType.MISSING_INTERACTION, FlawType.INVERTED_LOGIC]
        )
        applicable = applicable_flaws(spec, library)
        if fault not in applicable:
            fault = next(
                f for f in (FlawType.MISSING_INTERACTION, FlawType.INVERTED_LOGIC,
                            FlawType.MISMATCHED_PAIR)
                if f in applicable
            )
        flawed = inject_flaw(spec, fault, seed, library)
        observed = _observed_misbehavior(spec, flawed, library)
        payload = {
            "script": flawed.script,
            "truth_table": dict(spec.ground_truth.truth_table or {}),
            "observed": observed,
        }
        return TaskInstance(task, tau, payload, spec, flawed.ground_truth.flaw)

    # masked prediction
    comp_id, answer = _mask_target(spec, task, rng, library, mask_index)
    masked_doc = _mask_component(spec.document, comp_id)
    payload = {
        "document": serialize_document(masked_doc).decode("utf-8"),
        "masked_component": comp_id,
        "granularity": task.value.removeprefix("masked_"),
        "answer": answer,
    }
    return TaskInstance(task, tau, payload, spec)


def _inject_from_levels(
    spec: CircuitSpec, levels: tuple[int, ...], rng: Rng, library: PartsLibrary
) -> CircuitSpec:
    options = [
        f for f in applicable_flaws(spec, library) if FLAW_LEVELS[f] in levels
    ]
    if not options:
        raise TaskError(
            f"no level {levels} flaw applies to this {spec.circuit_type.value} circuit"
        )
    flaw = rng.choice(options)
    return inject_flaw(spec, flaw, rng.next_u64(), library)


def _execution_report(flawed: CircuitSpec) -> str:
    outcome = run_script(flawed.script)
    if not outcome.ok:
        return str(outcome.error)
    validity = verify_validity(outcome.document)
    if validity.passed:
        return "no error observed"
    return "validation error: " + "; ".join(validity.diagnostics)


def _elide_block(spec: CircuitSpec, rng: Rng) -> tuple[str, str]:
    lines = spec.script.splitlines()
    blocks: dict[str, list[int]] = {"constraints": [], "interactions": []}
    for i, line in enumerate(lines):
        kw = line.split()[0] if line.split() else ""
        if kw == "precedes":
            blocks["constraints"].append(i)
        elif kw in ("interaction", "participation"):
            blocks["interactions"].append(i)
    cassettes = [c.id for c in spec.document.leaf_cassettes()]
    if cassettes:
        cas = rng.choice(sorted(cassettes))
        idxs = [
            i for i, line in enumerate(lines)
            if (toks := line.split()) and (
                (toks[0] in ("sub", "precedes") and len(toks) > 1 and toks[1] == cas)
                or (toks[0] in ("component", "roles", "name") and len(toks) > 1 and toks[1] == cas)
            )
        ]
        blocks[f"cassette {cas}"] = idxs
    options = [name for name, idxs in blocks.items() if idxs]
    name = rng.choice(sorted(options))
    idxs = set(blocks[name])
    out = []
    emitted_marker = False
    for i, line in enumerate(lines):
        if i in idxs:
            if not emitted_marker:
                out.append(f"# ELIDED: {name} block - complete this section")
                emitted_marker = True
            continue
        out.append(line)
    return "\n".join(out) + "\n", name


def _substitution(spec: CircuitSpec, rng: Rng, library: PartsLibrary) -> tuple[dict, CircuitDocument]:
    doc = spec.document
    swappable_kinds = (PartKind.RBS, PartKind.TERMINATOR)
    candidates = []
    for comp in doc.components.values():
        if comp.name is None:
            continue
        part = library.by_name(comp.name)
        if part is not None and part.kind in swappable_kinds:
            candidates.append((comp.id, part))
    comp_id, old = rng.choice(sorted(candidates, key=lambda c: c[0]))
    pool = [p for p in library.of_kind(old.kind) if p.id != old.id and p.tier.value == "training"]
    new = rng.choice(sorted(pool, key=lambda p: p.id))
    comps = dict(doc.components)
    comps[comp_id] = replace(comps[comp_id], name=new.name)
    expected = CircuitDocument(doc.namespace, comps)
    return {"component": comp_id, "old": old.name, "new": new.name}, expected


def _observed_misbehavior(
    clean: CircuitSpec, flawed: CircuitSpec, library: PartsLibrary
) -> str:
    from .logic import full_truth_table

    gt = clean.ground_truth
    if gt.truth_table is None:
        return "circuit output deviates from the specification"
    try:
        got = full_truth_table(flawed.document, library, gt.inputs)
    except Exception:
        return "circuit output could not be established for any input state"
    wrong = []
    for bits in sorted(gt.truth_table):
        if got.get(bits) != gt.truth_table[bits]:
            state = "".join(str(b) for b in bits)
            actual = "ON" if got.get(bits) else "OFF"
            wanted = "ON" if gt.truth_table[bits] else "OFF"
            wrong.append(f"output is {actual} for input state {state} when it should be {wanted}")
    return "; ".join(wrong) if wrong else "no deviation observed at steady state"


def _mask_target(
    spec: CircuitSpec,
    task: TaskKind,
    rng: Rng,
    library: PartsLibrary,
    mask_index: int | None,
) -> tuple[str, str]:
    doc = spec.document
    flat: list[str] = []
    for cas in doc.leaf_cassettes():
        flat.extend(fid for fid in cas.feature_ids() if fid in doc.components)
    if not flat:
        raise TaskError("nothing to mask: no leaf cassette features")
    if mask_index is not None:
        if not (0 <= mask_index < len(flat)):
            raise TaskError(f"mask index {mask_index} out of range 0..{len(flat) - 1}")
        comp_id = flat[mask_index]
    else:
        comp_id = rng.choice(flat)
    comp = doc.components[comp_id]
    part = library.by_name(comp.name) if comp.name else None
    if part is None:
        raise TaskError(f"masked component {comp_id} has no library part")
    if task is TaskKind.MASKED_PART:
        return comp_id, part.name
    if task is TaskKind.MASKED_TYPE:
        return comp_id, part.kind.value
    return comp_id, _functional_role(part)


def _functional_role(part) -> str:
    if part.kind is PartKind.CDS:
        if part.is_reporter:
            return "reporter"
        if part.is_repressor:
            return "repressor"
        if part.has("activator"):
            return "activator"
        return "cds"
    if part.kind is PartKind.PROMOTER:
        if part.is_constitutive:
            return "constitutive_promoter"
        if part.cognate_repressors():
            return "repressible_promoter"
        return "inducible_promoter"
    return part.kind.value


def _mask_component(doc: CircuitDocument, comp_id: str) -> CircuitDocument:
    comps = dict(doc.components)
    comps[comp_id] = replace(comps[comp_id], name=MASK_TOKEN)
    return CircuitDocument(doc.namespace, comps)


# --- scoring -------------------------------------------------------------------------


def score_function_reward(
    task: TaskInstance, submission: Submission, library: PartsLibrary
) -> ScoreDetail:
    """Raw task score f_task in [0, 1]; never raises on bad submissions."""
    try:
        return _score(task, submission, library)
    except Exception as exc:  # malformed submissions score 0 with a diagnostic
        return ScoreDetail(0.0, {}, (f"scoring failed: {exc}",))


def _assessment_for(task: TaskInstance, submission: Submission, library: PartsLibrary) -> DocumentAssessment:
    expected = expected_counts_for_spec(task.reference)
    return assess_script(
        submission.script or "", task.reference.circuit_type, library, expected
    )


def _score(task: TaskInstance, submission: Submission, library: PartsLibrary) -> ScoreDetail:
    kind = task.task
    ref = task.reference

    if kind is TaskKind.T1:
        terms = {
            "error_type": 1.0 if (task.flaw and submission.flaw_type == task.flaw.flaw_type.value) else 0.0,
            "error_location": 1.0 if (task.flaw and submission.location == task.flaw.location) else 0.0,
        }
        assessment = _assessment_for(task, submission, library)
        terms["repaired_executes"] = 1.0 if (assessment.exec_ok and assessment.valid_score == 1.0) else 0.0
        f = 0.3 * terms["error_type"] + 0.3 * terms["error_location"] + 0.4 * terms["repaired_executes"]
        return ScoreDetail(f, terms)

    if kind is TaskKind.T2:
        assessment = _assessment_for(task, submission, library)
        ok = 0.0
        if assessment.document is not None:
            got = extract_regulatory_graph(assessment.document, library)
            want = extract_regulatory_graph(ref.document, library)
            ok = 1.0 if isomorphic(got, want, IsoMode.PART_AWARE) else 0.0
        return ScoreDetail(ok, {"isomorphic": ok})

    if kind is TaskKind.T3:
        return _score_substitution(task, submission, library)

    if kind is TaskKind.T4:
        return _score_coverage(task, submission, library)

    if kind is TaskKind.T5:
        table = ref.ground_truth.truth_table or {}
        outputs = submission.outputs or {}
        if not table:
            return ScoreDetail(0.0, {}, ("reference has no truth table",))
        hits = sum(1 for bits in table if outputs.get(bits) == table[bits])
        f = hits / len(table)
        return ScoreDetail(f, {"rows_correct": float(hits), "rows_total": float(len(table))})

    if kind is TaskKind.T6:
        terms = {
            "flaw_type": 1.0 if (task.flaw and submission.flaw_type == task.flaw.flaw_type.value) else 0.0,
            "flaw_location": 1.0 if (task.flaw and submission.location == task.flaw.location) else 0.0,
        }
        assessment = _assessment_for(task, submission, library)
        terms["fix_valid"] = 1.0 if (assessment.exec_ok and assessment.valid_score == 1.0) else 0.0
        terms["fix_functional"] = 0.0
        if assessment.document is not None and terms["fix_valid"] == 1.0:
            candidate = replace(ref, document=assessment.document, reference=ref.reference_document)
            if self_function_score(candidate, library) >= 1.0 - 1e-9:
                terms["fix_functional"] = 1.0
        f = (
            0.3 * terms["flaw_type"] + 0.2 * terms["flaw_location"]
            + 0.2 * terms["fix_valid"] + 0.3 * terms["fix_functional"]
        )
        return ScoreDetail(f, terms)

    if kind is TaskKind.T7:
        assessment = _assessment_for(task, submission, library)
        topo = 0.0
        struct = sem = 0.0
        if assessment.document is not None:
            got = extract_regulatory_graph(assessment.document, library)
            want = extract_regulatory_graph(ref.document, library)
            topo = 1.0 if isomorphic(got, want, IsoMode.ROLE_LABELED) else 0.0
            if assessment.valid_score == 1.0:
                struct = verify_structural(
                    assessment.document, ref.circuit_type, library, expected_counts_for_spec(ref)
                ).score
                sem = verify_semantic(assessment.document, ref.circuit_type, library).score
        f = 0.4 * topo + 0.3 * struct + 0.3 * sem
        return ScoreDetail(f, {"topology": topo, "struct_spec": struct, "sem_spec": sem})

    if kind is TaskKind.T8:
        return _score_assignment_task(task, submission)

    if kind is TaskKind.T9:
        terms = {"fault_identified": 0.0, "fix_passes": 0.0}
        if task.flaw and submission.location == task.flaw.location:
            terms["fault_identified"] = 1.0
        elif task.flaw and submission.faulty and task.flaw.location in submission.faulty:
            terms["fault_identified"] = 1.0
        assessment = _assessment_for(task, submission, library)
        if assessment.document is not None and assessment.valid_score == 1.0:
            from .logic import full_truth_table

            gt = ref.ground_truth
            try:
                got = full_truth_table(assessment.document, library, gt.inputs)
                if gt.truth_table and all(
                    got.get(b) == v for b, v in gt.truth_table.items()
                ):
                    terms["fix_passes"] = 1.0
            except Exception:
                pass
        f = 0.5 * terms["fault_identified"] + 0.5 * terms["fix_passes"]
        return ScoreDetail(f, terms)

    if kind is TaskKind.DENOVO_ISO:
        assessment = _assessment_for(task, submission, library)
        ok = 0.0
        if assessment.document is not None:
            got = extract_regulatory_graph(assessment.document, library)
            want = extract_regulatory_graph(ref.document, library)
            ok = 1.0 if isomorphic(got, want, IsoMode.ROLE_LABELED) else 0.0
        return ScoreDetail(ok, {"isomorphic": ok})

    # masked prediction: top-1 is the score, top-5 membership is reported
    answer = task.payload["answer"]
    ranking = submission.ranking or ()
    top1 = 1.0 if ranking and ranking[0] == answer else 0.0
    top5 = 1.0 if answer in ranking[:5] else 0.0
    return ScoreDetail(top1, {"top1": top1, "top5": top5})


def _score_substitution(task: TaskInstance, submission: Submission, library: PartsLibrary) -> ScoreDetail:
    assessment = _assessment_for(task, submission, library)
    terms = {"target_replaced": 0.0, "replacement_correct": 0.0, "no_other_changes": 0.0}
    if assessment.document is not None:
        got_names = _leaf_part_counts(assessment.document)
        want_names = _leaf_part_counts(task.reference.document)
        old, new = task.payload["old"], task.payload["new"]
        terms["target_replaced"] = 1.0 if got_names.get(old, 0) == want_names.get(old, 0) else 0.0
        terms["replacement_correct"] = 1.0 if got_names.get(new, 0) == want_names.get(new, 0) and want_names.get(new, 0) > 0 else 0.0
        got = extract_regulatory_graph(assessment.document, library)
        want = extract_regulatory_graph(task.reference.document, library)
        terms["no_other_changes"] = (
            1.0 if got_names == want_names and isomorphic(got, want, IsoMode.PART_AWARE) else 0.0
        )
    f = terms["target_replaced"] * terms["replacement_correct"] * terms["no_other_changes"]
    return ScoreDetail(f, terms)


def _leaf_part_counts(doc: CircuitDocument) -> dict[str, int]:
    out: dict[str, int] = {}
    for cas in doc.leaf_cassettes():
        for fid in cas.feature_ids():
            comp = doc.components.get(fid)
            if comp is not None and comp.name:
                out[comp.name] = out.get(comp.name, 0) + 1
    return out


# specification elements for T4 coverage, derived mechanically from the reference
@dataclass(frozen=True)
class SpecElement:
    kind: str          # "part" | "interaction" | "cassette_count"
    payload: tuple

    def describe(self) -> str:
        if self.kind == "part":
            return f"uses part {self.payload[0]}"
        if self.kind == "interaction":
            src, dst, pol = self.payload
            arrow = "activates" if pol == "+" else "represses"
            return f"{src} {arrow} {dst}"
        return f"has {self.payload[0]} expression cassettes"


def spec_elements(spec: CircuitSpec, library: PartsLibrary) -> list[SpecElement]:
    elements: list[SpecElement] = []
    doc = spec.document
    leaves = doc.leaf_cassettes()
    elements.append(SpecElement("cassette_count", (len(leaves),)))
    for cas in leaves:
        for fid in cas.feature_ids():
            comp = doc.components.get(fid)
            if comp is None or comp.name is None:
                continue
            part = library.by_name(comp.name)
            if part is not None and part.kind in (PartKind.PROMOTER, PartKind.CDS):
                elements.append(SpecElement("part", (part.name,)))
    graph = extract_regulatory_graph(doc, library)
    name_of = {n.id: n for n in graph.nodes}
    for e in graph.edges:
        src = "/".join(name_of[e.src].label)
        dst = "/".join(name_of[e.dst].label)
        elements.append(SpecElement("interaction", (src, dst, e.polarity.symbol)))
    return elements


def _score_coverage(task: TaskInstance, submission: Submission, library: PartsLibrary) -> ScoreDetail:
    assessment = _assessment_for(task, submission, library)
    elements = spec_elements(task.reference, library)
    if assessment.document is None:
        return ScoreDetail(0.0, {"covered": 0.0, "total": float(len(elements))})
    doc = assessment.document
    got_parts = _leaf_part_counts(doc)
    got_graph = extract_regulatory_graph(doc, library)
    name_of = {n.id: n for n in got_graph.nodes}
    got_edges = {
        ("/".join(name_of[e.src].label), "/".join(name_of[e.dst].label), e.polarity.symbol)
        for e in got_graph.edges
    }
    covered = 0
    for el in elements:
        if el.kind == "part":
            covered += 1 if got_parts.get(el.payload[0], 0) > 0 else 0
        elif el.kind == "interaction":
            covered += 1 if el.payload in got_edges else 0
        else:
            covered += 1 if len(doc.leaf_cassettes()) == el.payload[0] else 0
    f = covered / len(elements) if elements else 0.0
    return ScoreDetail(f, {"covered": float(covered), "total": float(len(elements))})


def _score_assignment_task(task: TaskInstance, submission: Submission) -> ScoreDetail:
    topo: GateTopology = task.payload["topology"]
    bank: dict[str, HillParams] = task.payload["gate_bank"]
    table: dict[tuple[int, ...], int] = task.payload["truth_table"]
    assign = submission.assignment or {}
    nodes = [g.id for g in topo.gates]
    if any(n not in assign for n in nodes):
        return ScoreDetail(0.0, {}, ("assignment does not cover every gate node",))
    if any(assign[n] not in bank for n in nodes):
        return ScoreDetail(0.0, {}, ("assignment names a gate outside the bank",))
    if len({assign[n] for n in nodes}) != len(nodes):
        return ScoreDetail(0.0, {}, ("assignment reuses a gate; gates are single-use",))
    params = {n: bank[assign[n]] for n in nodes}
    got = truth_table_from_propagation(topo, params, sensor_levels=(0.01, 3.0))
    hits = sum(1 for bits, want in table.items() if got.get(bits) == want)
    f = hits / len(table)
    return ScoreDetail(f, {"rows_correct": float(hits), "rows_total": float(len(table))})


def total_reward(
    task: TaskInstance,
    submission: Submission,
    curriculum: "CurriculumState",
    library: PartsLibrary,
) -> tuple[RewardBreakdown, ScoreDetail]:
    detail = score_function_reward(task, submission, library)
    if task.generative:
        assessment = _assessment_for(task, submission, library)
        breakdown = hierarchical_reward(
            assessment.exec_score,
            assessment.valid_score,
            assessment.struct_score,
            assessment.sem_score,
            detail.f_task,
            curriculum.weights,
        )
    else:
        well_formed = 1.0 if _well_formed(task, submission) else 0.0
        breakdown = hierarchical_reward(
            well_formed, well_formed, well_formed, well_formed,
            detail.f_task if well_formed else 0.0,
            curriculum.weights,
        )
    return breakdown, detail


def _well_formed(task: TaskInstance, submission: Submission) -> bool:
    if task.task is TaskKind.T5:
        return bool(submission.outputs)
    if task.task is TaskKind.T8:
        return bool(submission.assignment)
    return bool(submission.ranking)


# --- curriculum ------------------------------------------------------------------------

TASK_SAMPLING: dict[TaskKind, tuple[float, float, float, float]] = {
    TaskKind.T1: (0.40, 0.10, 0.05, 0.05),
    TaskKind.T2: (0.40, 0.10, 0.05, 0.05),
    TaskKind.T3: (0.10, 0.30, 0.10, 0.05),
    TaskKind.T4: (0.10, 0.30, 0.15, 0.10),
    TaskKind.T5: (0.00, 0.10, 0.30, 0.15),
    TaskKind.T6: (0.00, 0.10, 0.25, 0.15),
    TaskKind.T7: (0.00, 0.00, 0.10, 0.45),
}

PROMOTION_THRESHOLDS = {1: 0.80, 2: 0.70, 3: 0.60}


@dataclass(frozen=True)
class CurriculumState:
    stage: int = 1

    def __post_init__(self):
        if self.stage not in (1, 2, 3, 4):
            raise TaskError(f"curriculum stage must be 1..4, got {self.stage}")

    @property
    def weights(self) -> tuple[float, float, float, float, float]:
        return STAGE_WEIGHTS[self.stage]

    @property
    def promotion_threshold(self) -> float | None:
        return PROMOTION_THRESHOLDS.get(self.stage)

    @property
    def task_distribution(self) -> dict[TaskKind, float]:
        return {t: probs[self.stage - 1] for t, probs in TASK_SAMPLING.items()}


def sample_task_type(state: CurriculumState, rng: Rng) -> TaskKind:
    dist = state.task_distribution
    tasks = sorted(dist, key=lambda t: t.value)
    return rng.weighted_choice(tasks, [dist[t] for t in tasks])


def curriculum_step(state: CurriculumState, validation_tsr: float) -> CurriculumState:
    if not (0.0 <= validation_tsr <= 1.0):
        raise TaskError(f"validation TSR must lie in [0, 1], got {validation_tsr}")
    threshold = state.promotion_threshold
    if threshold is not None and validation_tsr >= threshold:
        return CurriculumState(stage=state.stage + 1)
    return state


# --- metrics ----------------------------------------------------------------------------


def tsr(rewards: list[tuple[float, float]]) -> float:
    """Mean of 1[R >= tau] over (reward, threshold) pairs."""
    if not rewards:
        raise TaskError("TSR of an empty result set is undefined")
    return sum(1 for r, tau in rewards if r >= tau) / len(rewards)


def delta_gen(tsr_proc: float, tsr_real: float) -> float:
    return tsr_proc - tsr_real


def pass_at_k(n: int, c: int, k: int) -> float:
    """Unbiased estimator 1 - C(n-c, k) / C(n, k), evaluated exactly."""
    if not (0 <= c <= n):
        raise TaskError(f"need 0 <= c <= n, got c={c}, n={n}")
    if not (1 <= k <= n):
        raise TaskError(f"need 1 <= k <= n, got k={k}, n={n}")
    frac = Fraction(math.comb(n - c, k), math.comb(n, k))
    return float(1 - frac)
