"""Circuit specifications: generated circuit + ground truth + provenance.

Also the flaw taxonomy shared by the injector (generate), the task builders
(T1/T6) and the verifier tests. Each flaw has a difficulty level; levels 1-2
break execution or document validity, levels 3-4 leave a valid document whose
biology is wrong.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .graphs import Kappa
from .logic import GateTopology, GateNode, InputPort
from .model import CircuitDocument


class CircuitType(str, enum.Enum):
    CASSETTE = "cassette"
    NOT_GATE = "not_gate"
    TWO_INPUT_GATE = "two_input_gate"
    TOGGLE = "toggle"
    BRANCHED = "branched"
    FFL = "ffl"
    OSCILLATOR = "oscillator"
    CASCADE = "cascade"


class OscillationExpectation(str, enum.Enum):
    YES = "yes"
    BIFURCATION_DEPENDENT = "bifurcation_dependent"


class FlawType(str, enum.Enum):
    MISSING_TERMINATOR = "missing_terminator"
    DUPLICATE_COMPONENT = "duplicate_component"
    EMPTY_FEATURE = "empty_feature"
    WRONG_PART_ORDER = "wrong_part_order"
    MISSING_CONSTRAINT = "missing_constraint"
    ORPHAN_COMPONENT = "orphan_component"
    WRONG_ORIENTATION = "wrong_orientation"
    MISMATCHED_PAIR = "mismatched_pair"
    WRONG_INDUCER = "wrong_inducer"
    INVERTED_LOGIC = "inverted_logic"
    MISSING_INTERACTION = "missing_interaction"
    INCOMPLETE_FEEDBACK = "incomplete_feedback"
    PROMOTER_LEAK = "promoter_leak"
    EXTRA_REGULATION = "extra_regulation"


FLAW_LEVELS: dict[FlawType, int] = {
    FlawType.MISSING_TERMINATOR: 1,
    FlawType.DUPLICATE_COMPONENT: 1,
    FlawType.EMPTY_FEATURE: 1,
    FlawType.WRONG_PART_ORDER: 2,
    FlawType.MISSING_CONSTRAINT: 2,
    FlawType.ORPHAN_COMPONENT: 2,
    FlawType.WRONG_ORIENTATION: 2,
    FlawType.MISMATCHED_PAIR: 3,
    FlawType.WRONG_INDUCER: 3,
    FlawType.INVERTED_LOGIC: 3,
    FlawType.MISSING_INTERACTION: 3,
    FlawType.INCOMPLETE_FEEDBACK: 4,
    FlawType.PROMOTER_LEAK: 4,
    FlawType.EXTRA_REGULATION: 4,
}

FLAW_SYMPTOMS: dict[FlawType, str] = {
    FlawType.MISSING_TERMINATOR: "Transcriptional read-through",
    FlawType.DUPLICATE_COMPONENT: "Validation/parsing error",
    FlawType.EMPTY_FEATURE: "Validation failure",
    FlawType.WRONG_PART_ORDER: "Circuit malfunction",
    FlawType.MISSING_CONSTRAINT: "Ambiguous assembly order",
    FlawType.ORPHAN_COMPONENT: "Disconnected component",
    FlawType.WRONG_ORIENTATION: "Circuit malfunction",
    FlawType.MISMATCHED_PAIR: "No repression observed",
    FlawType.WRONG_INDUCER: "No response to inducer",
    FlawType.INVERTED_LOGIC: "Inverted output behavior",
    FlawType.MISSING_INTERACTION: "No regulation observed",
    FlawType.INCOMPLETE_FEEDBACK: "No oscillation / no bistability",
    FlawType.PROMOTER_LEAK: "Always-on expression",
    FlawType.EXTRA_REGULATION: "Unexpected interference",
}


@dataclass(frozen=True)
class FlawRecord:
    flaw_type: FlawType
    level: int
    location: str
    symptom: str

    def __post_init__(self):
        if self.level >= 3 and not self.symptom:
            raise ValueError("level 3-4 flaws must carry a symptom")


@dataclass(frozen=True)
class GroundTruth:
    truth_table: dict[tuple[int, ...], int] | None = None
    gate_type: str | None = None
    stable_states: tuple[str, ...] | None = None
    oscillation_expected: OscillationExpectation | None = None
    cycle_length: int | None = None
    ffl_type: str | None = None
    expression_level: float | None = None
    inducible: bool | None = None
    repressible: bool | None = None
    expected_dynamics: str | None = None
    inputs: tuple[InputPort, ...] = ()
    nor_topology: GateTopology | None = None
    gate_assignment: dict[str, str] | None = None
    flaw: FlawRecord | None = None


@dataclass(frozen=True)
class CircuitSpec:
    circuit_type: CircuitType
    document: CircuitDocument
    script: str
    ground_truth: GroundTruth
    description: str
    kappa: Kappa
    reference: CircuitDocument | None = None   # clean document, for flawed/perturbed variants
    provenance: tuple[str, ...] = ()           # flaw / perturbation operator sequence

    @property
    def reference_document(self) -> CircuitDocument:
        return self.reference if self.reference is not None else self.document

    def with_flaw(self, document: CircuitDocument, script: str, flaw: FlawRecord) -> "CircuitSpec":
        return replace(
            self,
            document=document,
            script=script,
            ground_truth=replace(self.ground_truth, flaw=flaw),
            reference=self.reference_document,
            provenance=self.provenance + (f"flaw:{flaw.flaw_type.value}",),
        )


@dataclass(frozen=True)
class ExpectedCounts:
    engineered_region_count: int
    leaf_cassette_count: int

    def __post_init__(self):
        if self.leaf_cassette_count > self.engineered_region_count:
            raise ValueError("leaf cassette count cannot exceed region count")


_FIXED_COUNTS: dict[tuple[CircuitType, str | None], ExpectedCounts] = {
    (CircuitType.CASSETTE, None): ExpectedCounts(1, 1),
    (CircuitType.NOT_GATE, None): ExpectedCounts(3, 2),
    (CircuitType.TWO_INPUT_GATE, "NOR"): ExpectedCounts(4, 3),
    (CircuitType.TWO_INPUT_GATE, "NAND"): ExpectedCounts(4, 3),
    (CircuitType.TWO_INPUT_GATE, "OR"): ExpectedCounts(5, 4),
    (CircuitType.TWO_INPUT_GATE, "AND"): ExpectedCounts(6, 5),
    (CircuitType.TOGGLE, None): ExpectedCounts(3, 2),
    (CircuitType.BRANCHED, None): ExpectedCounts(4, 3),
    (CircuitType.FFL, None): ExpectedCounts(4, 3),
}


def expected_counts_for(
    circuit_type: CircuitType,
    gate_type: str | None = None,
    cycle_length: int | None = None,
    topology: GateTopology | None = None,
) -> ExpectedCounts:
    """Reference region/cassette counts per circuit type.

    Oscillators scale with ring length k -> (k+1, k); cascades are derived
    from the synthesized topology (sensors + gates, plus the wrapper region).
    """
    if circuit_type is CircuitType.OSCILLATOR:
        if cycle_length is None:
            raise ValueError("oscillator expected counts need the cycle length")
        return ExpectedCounts(cycle_length + 1, cycle_length)
    if circuit_type is CircuitType.CASCADE:
        if topology is None:
            raise ValueError("cascade expected counts need the gate topology")
        # split architecture: one transcription unit per topology edge plus the
        # reporter unit reading the output gate's promoter
        cassettes = sum(len(g.inputs) for g in topology.gates) + 1
        return ExpectedCounts(cassettes + 1, cassettes)
    key = (circuit_type, gate_type if circuit_type is CircuitType.TWO_INPUT_GATE else None)
    if key not in _FIXED_COUNTS:
        raise ValueError(f"no expected counts for {circuit_type} / {gate_type}")
    return _FIXED_COUNTS[key]


def expected_counts_for_spec(spec: CircuitSpec) -> ExpectedCounts:
    return expected_counts_for(
        spec.circuit_type,
        gate_type=spec.ground_truth.gate_type,
        cycle_length=spec.ground_truth.cycle_length,
        topology=spec.ground_truth.nor_topology,
    )


# --- ground-truth record serialization ------------------------------------------

_TRUTH_HEADER = "gencircuit-truth v1"


def emit_ground_truth(spec: CircuitSpec) -> str:
    gt = spec.ground_truth
    lines = [_TRUTH_HEADER, f"circuit_type {spec.circuit_type.value}"]
    lines.append(f"kappa {spec.kappa.d} {spec.kappa.f} {spec.kappa.b} {spec.kappa.n}")
    lines.append(f"description {spec.description}")
    for port in gt.inputs:
        targets = ",".join(port.targets) if port.targets else "-"
        lines.append(f"input {port.name} {port.kind} {targets}")
    if gt.truth_table is not None:
        for bits in sorted(gt.truth_table):
            key = "".join(str(b) for b in bits)
            lines.append(f"tt {key} {gt.truth_table[bits]}")
    if gt.gate_type is not None:
        lines.append(f"gate_type {gt.gate_type}")
    if gt.stable_states is not None:
        for state in gt.stable_states:
            lines.append(f"stable_state {state}")
    if gt.oscillation_expected is not None:
        lines.append(f"oscillation_expected {gt.oscillation_expected.value}")
    if gt.cycle_length is not None:
        lines.append(f"cycle_length {gt.cycle_length}")
    if gt.ffl_type is not None:
        lines.append(f"ffl_type {gt.ffl_type}")
    if gt.expression_level is not None:
        lines.append(f"expression_level {gt.expression_level!r}")
    if gt.inducible is not None:
        lines.append(f"inducible {int(gt.inducible)}")
    if gt.repressible is not None:
        lines.append(f"repressible {int(gt.repressible)}")
    if gt.expected_dynamics is not None:
        lines.append(f"expected_dynamics {gt.expected_dynamics}")
    if gt.nor_topology is not None:
        for node in gt.nor_topology.nodes:
            flags = []
            if node.is_sensor:
                flags.append("sensor")
            if node.is_output:
                flags.append("output")
            ins = ",".join(node.inputs) if node.inputs else "-"
            lines.append(f"topo_node {node.id} {ins} {';'.join(flags) if flags else '-'}")
    if gt.gate_assignment is not None:
        for node in sorted(gt.gate_assignment):
            lines.append(f"assign {node} {gt.gate_assignment[node]}")
    if gt.flaw is not None:
        lines.append(
            f"flaw {gt.flaw.flaw_type.value} {gt.flaw.level} {gt.flaw.location} :: {gt.flaw.symptom}"
        )
    for step in spec.provenance:
        lines.append(f"provenance {step}")
    return "\n".join(lines) + "\n"


def parse_ground_truth(text: str) -> tuple[CircuitType, Kappa, GroundTruth, str, tuple[str, ...]]:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _TRUTH_HEADER:
        raise ValueError(f"missing header {_TRUTH_HEADER!r}")
    ctype: CircuitType | None = None
    kappa = Kappa(0, 0, 0, 1)
    description = ""
    provenance: list[str] = []
    fields: dict = {
        "truth_table": None, "gate_type": None, "stable_states": None,
        "oscillation_expected": None, "cycle_length": None, "ffl_type": None,
        "expression_level": None, "inducible": None, "repressible": None,
        "expected_dynamics": None, "inputs": [], "nor_topology": None,
        "gate_assignment": None, "flaw": None,
    }
    topo_nodes: list[GateNode] = []
    for raw in lines[1:]:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key == "circuit_type":
            ctype = CircuitType(rest)
        elif key == "kappa":
            d, f, b, n = (int(t) for t in rest.split())
            kappa = Kappa(d, f, b, n)
        elif key == "description":
            description = rest
        elif key == "input":
            name, kind, targets = rest.split(" ", 2)
            tgt = tuple(targets.split(",")) if targets != "-" else ()
            fields["inputs"].append(InputPort(name, kind, tgt))
        elif key == "tt":
            bits_txt, val = rest.split()
            bits = tuple(int(c) for c in bits_txt)
            if fields["truth_table"] is None:
                fields["truth_table"] = {}
            fields["truth_table"][bits] = int(val)
        elif key == "gate_type":
            fields["gate_type"] = rest
        elif key == "stable_state":
            fields["stable_states"] = (fields["stable_states"] or ()) + (rest,)
        elif key == "oscillation_expected":
            fields["oscillation_expected"] = OscillationExpectation(rest)
        elif key == "cycle_length":
            fields["cycle_length"] = int(rest)
        elif key == "ffl_type":
            fields["ffl_type"] = rest
        elif key == "expression_level":
            fields["expression_level"] = float(rest)
        elif key == "inducible":
            fields["inducible"] = bool(int(rest))
        elif key == "repressible":
            fields["repressible"] = bool(int(rest))
        elif key == "expected_dynamics":
            fields["expected_dynamics"] = rest
        elif key == "topo_node":
            nid, ins, flags = rest.split()
            inputs = tuple(ins.split(",")) if ins != "-" else ()
            topo_nodes.append(
                GateNode(nid, inputs, is_sensor="sensor" in flags, is_output="output" in flags)
            )
        elif key == "assign":
            node, gate = rest.split()
            if fields["gate_assignment"] is None:
                fields["gate_assignment"] = {}
            fields["gate_assignment"][node] = gate
        elif key == "flaw":
            head, _, symptom = rest.partition(" :: ")
            ftype, level, location = head.split(" ", 2)
            fields["flaw"] = FlawRecord(FlawType(ftype), int(level), location, symptom)
        elif key == "provenance":
            provenance.append(rest)
        else:
            raise ValueError(f"unknown ground-truth record {key!r}")
    if topo_nodes:
        fields["nor_topology"] = GateTopology(tuple(topo_nodes))
    if ctype is None:
        raise ValueError("ground-truth record missing circuit_type")
    fields["inputs"] = tuple(fields["inputs"])
    return ctype, kappa, GroundTruth(**fields), description, tuple(provenance)
