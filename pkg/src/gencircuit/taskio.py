"""Text serialization for task instances and submissions.

Records are line-oriented like every other format in the engine; multi-line
payloads (scripts, documents) sit between `begin <key>` / `end <key>` fences.
"""

from __future__ import annotations

from .circuit_types import (
    CircuitSpec,
    FlawRecord,
    FlawType,
    emit_ground_truth,
    parse_ground_truth,
)
from .library import HillParams
from .logic import GateNode, GateTopology
from .model import deserialize_document, serialize_document
from .tasks import Submission, TaskInstance, TaskKind

_TASK_HEADER = "gencircuit-taskrec v1"
_SUBMISSION_HEADER = "gencircuit-submission v1"


class TaskIOError(Exception):
    pass


def emit_task_record(task: TaskInstance) -> str:
    lines = [_TASK_HEADER, f"task {task.task.value}", f"tau {task.tau:g}"]

    def block(key: str, text: str) -> None:
        lines.append(f"begin {key}")
        lines.extend(text.rstrip("\n").splitlines())
        lines.append(f"end {key}")

    p = task.payload
    for key in ("error", "symptom", "instruction", "description", "circuit_type",
                "elided", "component", "old", "new", "masked_component",
                "granularity", "answer", "observed"):
        if key in p:
            lines.append(f"field {key} {p[key]}")
    if "inputs" in p:
        lines.append("field inputs " + ",".join(p["inputs"]))
    if "vectors" in p:
        for bits in p["vectors"]:
            lines.append("vector " + "".join(str(b) for b in bits))
    if "truth_table" in p:
        for bits in sorted(p["truth_table"]):
            lines.append(
                "tt " + "".join(str(b) for b in bits) + f" {p['truth_table'][bits]}"
            )
    if "topology" in p:
        topo: GateTopology = p["topology"]
        for node in topo.nodes:
            flags = []
            if node.is_sensor:
                flags.append("sensor")
            if node.is_output:
                flags.append("output")
            ins = ",".join(node.inputs) if node.inputs else "-"
            lines.append(f"topo_node {node.id} {ins} {';'.join(flags) if flags else '-'}")
    if "gate_bank" in p:
        for gid in sorted(p["gate_bank"]):
            h: HillParams = p["gate_bank"][gid]
            lines.append(f"gate {gid} {h.y_min:g} {h.y_max:g} {h.K:g} {h.n:g}")
    if "script" in p:
        block("script", p["script"])
    if "document" in p:
        block("document", p["document"])

    if task.flaw is not None:
        lines.append(
            f"flaw {task.flaw.flaw_type.value} {task.flaw.level} "
            f"{task.flaw.location} :: {task.flaw.symptom}"
        )

    ref = task.reference
    block("reference_document", serialize_document(ref.document).decode("utf-8"))
    block("reference_script", ref.script)
    block("reference_truth", emit_ground_truth(ref))
    return "\n".join(lines) + "\n"


def parse_task_record(text: str) -> TaskInstance:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _TASK_HEADER:
        raise TaskIOError(f"missing header {_TASK_HEADER!r}")
    task_kind: TaskKind | None = None
    tau = 0.8
    payload: dict = {}
    flaw: FlawRecord | None = None
    blocks: dict[str, str] = {}
    topo_nodes: list[GateNode] = []
    gate_bank: dict[str, HillParams] = {}

    i = 1
    while i < len(lines):
        line = lines[i].rstrip("\n")
        if not line.strip():
            i += 1
            continue
        if line.startswith("begin "):
            key = line.split(" ", 1)[1]
            body = []
            i += 1
            while i < len(lines) and lines[i].rstrip("\n") != f"end {key}":
                body.append(lines[i])
                i += 1
            if i >= len(lines):
                raise TaskIOError(f"unterminated block {key!r}")
            blocks[key] = "\n".join(body) + "\n"
            i += 1
            continue
        key, _, rest = line.partition(" ")
        if key == "task":
            task_kind = TaskKind(rest)
        elif key == "tau":
            tau = float(rest)
        elif key == "field":
            fkey, _, fval = rest.partition(" ")
            if fkey == "inputs":
                payload["inputs"] = tuple(fval.split(","))
            else:
                payload[fkey] = fval
        elif key == "vector":
            payload.setdefault("vectors", [])
            payload["vectors"] = tuple(
                list(payload["vectors"]) + [tuple(int(c) for c in rest)]
            )
        elif key == "tt":
            bits_txt, val = rest.split()
            payload.setdefault("truth_table", {})
            payload["truth_table"][tuple(int(c) for c in bits_txt)] = int(val)
        elif key == "topo_node":
            nid, ins, flags = rest.split()
            topo_nodes.append(
                GateNode(
                    nid,
                    tuple(ins.split(",")) if ins != "-" else (),
                    is_sensor="sensor" in flags,
                    is_output="output" in flags,
                )
            )
        elif key == "gate":
            gid, *nums = rest.split()
            gate_bank[gid] = HillParams(*(float(v) for v in nums))
        elif key == "flaw":
            head, _, symptom = rest.partition(" :: ")
            ftype, level, location = head.split(" ", 2)
            flaw = FlawRecord(FlawType(ftype), int(level), location, symptom)
        else:
            raise TaskIOError(f"unknown task record line {line!r}")
        i += 1

    if task_kind is None:
        raise TaskIOError("task record missing task kind")
    if topo_nodes:
        payload["topology"] = GateTopology(tuple(topo_nodes))
    if gate_bank:
        payload["gate_bank"] = gate_bank
    for key in ("script", "document"):
        if key in blocks:
            payload[key] = blocks[key]

    if "reference_document" not in blocks or "reference_truth" not in blocks:
        raise TaskIOError("task record is missing its reference sections")
    ref_doc = deserialize_document(blocks["reference_document"].encode("utf-8"))
    ctype, kappa, gt, description, provenance = parse_ground_truth(blocks["reference_truth"])
    reference = CircuitSpec(
        circuit_type=ctype,
        document=ref_doc,
        script=blocks.get("reference_script", ""),
        ground_truth=gt,
        description=description,
        kappa=kappa,
        provenance=provenance,
    )
    return TaskInstance(task=task_kind, tau=tau, payload=payload, reference=reference, flaw=flaw)


def emit_submission(sub: Submission) -> str:
    lines = [_SUBMISSION_HEADER]
    if sub.flaw_type is not None:
        lines.append(f"field flaw_type {sub.flaw_type}")
    if sub.location is not None:
        lines.append(f"field location {sub.location}")
    if sub.outputs:
        for bits in sorted(sub.outputs):
            lines.append("row " + "".join(str(b) for b in bits) + f" {sub.outputs[bits]}")
    if sub.assignment:
        for node in sorted(sub.assignment):
            lines.append(f"assign {node} {sub.assignment[node]}")
    if sub.ranking:
        for name in sub.ranking:
            lines.append(f"rank {name}")
    if sub.faulty:
        for gid in sub.faulty:
            lines.append(f"faulty {gid}")
    if sub.script is not None:
        lines.append("begin script")
        lines.extend(sub.script.rstrip("\n").splitlines())
        lines.append("end script")
    return "\n".join(lines) + "\n"


def parse_submission(text: str) -> Submission:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _SUBMISSION_HEADER:
        raise TaskIOError(f"missing header {_SUBMISSION_HEADER!r}")
    script = None
    flaw_type = location = None
    outputs: dict[tuple[int, ...], int] = {}
    assignment: dict[str, str] = {}
    ranking: list[str] = []
    faulty: list[str] = []
    i = 1
    while i < len(lines):
        line = lines[i].rstrip("\n")
        if not line.strip():
            i += 1
            continue
        if line == "begin script":
            body = []
            i += 1
            while i < len(lines) and lines[i].rstrip("\n") != "end script":
                body.append(lines[i])
                i += 1
            if i >= len(lines):
                raise TaskIOError("unterminated script block")
            script = "\n".join(body) + "\n"
            i += 1
            continue
        key, _, rest = line.partition(" ")
        if key == "field":
            fkey, _, fval = rest.partition(" ")
            if fkey == "flaw_type":
                flaw_type = fval
            elif fkey == "location":
                location = fval
            else:
                raise TaskIOError(f"unknown submission field {fkey!r}")
        elif key == "row":
            bits_txt, val = rest.split()
            outputs[tuple(int(c) for c in bits_txt)] = int(val)
        elif key == "assign":
            node, gate = rest.split()
            assignment[node] = gate
        elif key == "rank":
            ranking.append(rest)
        elif key == "faulty":
            faulty.append(rest)
        else:
            raise TaskIOError(f"unknown submission line {line!r}")
        i += 1
    return Submission(
        script=script,
        flaw_type=flaw_type,
        location=location,
        outputs=outputs or None,
        assignment=assignment or None,
        ranking=tuple(ranking) or None,
        faulty=tuple(faulty) or None,
    )
