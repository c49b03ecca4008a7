"""Functional evaluation: symbolic truth tables and Hill-function propagation.

Symbolic evaluation honors biological reality, not just declared wiring: an
inhibition only takes effect when the target promoter actually hosts an
operator for at least one of its declared inhibitors (the cognate anchor);
co-inhibitors on an anchored promoter act as tandem wired-OR operators.
Stimulations only act on promoters that require that activator. This makes
flawed circuits (non-cognate repressor, leaky constitutive promoter) behave
like their documented symptoms while leaving clean circuits unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .library import HillParams, PartsLibrary
from .model import CircuitDocument, Component, InteractionType, ParticipationRole, Role

ON_RPU = 0.5    # thresholds for classifying propagated outputs
OFF_RPU = 0.1

MARGIN_FAILURE = "margin_failure"


class EvalError(Exception):
    pass


class UnsupportedTopologyError(EvalError):
    """Steady-state logic is undefined for circuits with effective feedback."""


@dataclass(frozen=True)
class InputPort:
    """Declared circuit input: either a promoter forced by an abstract inducer
    or a small-molecule inducer gating the proteins that require it."""

    name: str
    kind: str = "promoter"            # "promoter" | "inducer"
    targets: tuple[str, ...] = ()     # promoter component ids (promoter kind)


# --- symbolic truth-table evaluation ----------------------------------------------


class _DocIndex:
    def __init__(self, doc: CircuitDocument, library: PartsLibrary):
        self.doc = doc
        self.library = library
        self.cassettes = doc.leaf_cassettes()
        self.promoter_of: dict[str, str] = {}
        self.cds_of: dict[str, list[str]] = {}
        for cas in self.cassettes:
            for fid in cas.feature_ids():
                child = doc.components.get(fid)
                if child is None:
                    continue
                if Role.PROMOTER in child.roles and cas.id not in self.promoter_of:
                    self.promoter_of[cas.id] = fid
                if Role.CDS in child.roles:
                    self.cds_of.setdefault(cas.id, []).append(fid)

        # per target promoter component: [(inhibitor part name, coop group)], [stimulator part name]
        self.inhibitors: dict[str, list[tuple[str, str | None]]] = {}
        self.stimulators: dict[str, list[str]] = {}
        for _, inter in doc.interactions_all():
            if inter.itype is InteractionType.INHIBITION:
                tgts = inter.targets_with_role(ParticipationRole.INHIBITED)
                regs = inter.targets_with_role(ParticipationRole.INHIBITOR)
                for tgt in tgts:
                    for reg in regs:
                        name = self._part_name(reg)
                        if name is not None:
                            self.inhibitors.setdefault(tgt, []).append(
                                (name, inter.cooperative_group)
                            )
            elif inter.itype is InteractionType.STIMULATION:
                tgts = inter.targets_with_role(ParticipationRole.STIMULATED)
                regs = inter.targets_with_role(ParticipationRole.STIMULATOR)
                for tgt in tgts:
                    for reg in regs:
                        name = self._part_name(reg)
                        if name is not None:
                            self.stimulators.setdefault(tgt, []).append(name)

        # protein name -> cassette ids producing it
        self.producers: dict[str, list[str]] = {}
        for cas in self.cassettes:
            for fid in self.cds_of.get(cas.id, []):
                name = doc.components[fid].name
                if name:
                    self.producers.setdefault(name, []).append(cas.id)

    def _part_name(self, cid: str) -> str | None:
        comp = self.doc.components.get(cid)
        if comp is None:
            return None
        if Role.CDS in comp.roles:
            return comp.name or comp.id
        if comp.entity_type.value == "protein":
            for _, inter in self.doc.interactions_all():
                if inter.itype is InteractionType.GENETIC_PRODUCTION:
                    if cid in inter.targets_with_role(ParticipationRole.PRODUCT):
                        for tmpl in inter.targets_with_role(ParticipationRole.TEMPLATE):
                            t = self.doc.components.get(tmpl)
                            if t is not None:
                                return t.name or t.id
        return None

    def effective_inhibitors(self, prom_comp: Component) -> list[tuple[str, str | None]]:
        """Declared inhibitors that actually repress, under the cognate-anchor rule."""
        declared = self.inhibitors.get(prom_comp.id, [])
        if not declared:
            return []
        part = self.library.by_name(prom_comp.name) if prom_comp.name else None
        if part is None:
            return []
        cognates = set(part.cognate_repressors())
        if not cognates:
            return []
        anchored = any(
            (p := self.library.by_name(name)) is not None and p.id in cognates
            for name, _ in declared
        )
        return declared if anchored else []

    def required_activation(self, prom_comp: Component) -> list[str] | None:
        """Required activator part ids, or None when the part is unknown."""
        part = self.library.by_name(prom_comp.name) if prom_comp.name else None
        if part is None:
            return []
        return part.required_activators()


def eval_truth_table(
    doc: CircuitDocument,
    inputs: dict[str, int],
    library: PartsLibrary,
    ports: tuple[InputPort, ...],
) -> int:
    """Steady-state output bit for one input assignment.

    Procedure: set input promoter states from the assignment, propagate
    activation conjunctively, apply repression (any effective active repressor
    blocks its target, except cooperative groups which block only when every
    member is active), then read the reporter.
    """
    declared = {p.name for p in ports}
    if set(inputs) != declared:
        missing = declared - set(inputs)
        extra = set(inputs) - declared
        raise EvalError(
            f"input assignment must cover declared inputs exactly "
            f"(missing={sorted(missing)}, undeclared={sorted(extra)})"
        )

    idx = _DocIndex(doc, library)
    if not idx.cassettes:
        raise EvalError("document has no expression cassettes")

    _reject_effective_cycles(idx)

    forced: dict[str, int] = {}
    inducer_bits: dict[str, int] = {}
    for port in ports:
        if port.kind == "promoter":
            for tgt in port.targets:
                forced[tgt] = inputs[port.name]
        else:
            inducer_bits[port.name] = inputs[port.name]

    active_proteins: set[str] = set()
    promoter_state: dict[str, bool] = {}

    def protein_available(part_name: str, cassette_on: dict[str, bool]) -> bool:
        produced = any(cassette_on.get(cid, False) for cid in idx.producers.get(part_name, []))
        if not produced:
            return False
        part = library.by_name(part_name)
        if part is not None:
            for ind in part.prop_values("requires-inducer"):
                if not inducer_bits.get(ind, 0):
                    return False
        return True

    cassette_on: dict[str, bool] = {cas.id: False for cas in idx.cassettes}
    for _ in range(2 * len(idx.cassettes) + 6):
        new_proteins = {
            name for name in idx.producers if protein_available(name, cassette_on)
        }
        new_promoter_state: dict[str, bool] = {}
        new_cassette_on: dict[str, bool] = {}
        for cas in idx.cassettes:
            prom_id = idx.promoter_of.get(cas.id)
            if prom_id is None:
                new_cassette_on[cas.id] = False
                continue
            prom = doc.components[prom_id]
            if prom_id in forced:
                # an input port subsumes the promoter's own sensing machinery
                state = bool(forced[prom_id])
            else:
                state = True
                required = idx.required_activation(prom)
                for act_id in required:
                    act_part = library.get(act_id)
                    act_name = act_part.name if act_part is not None else act_id
                    stim_names = set(idx.stimulators.get(prom_id, []))
                    if act_name not in stim_names or act_name not in new_proteins:
                        state = False
                        break
            if state:
                groups: dict[str, list[str]] = {}
                singles: list[str] = []
                for name, coop in idx.effective_inhibitors(prom):
                    if coop is None:
                        singles.append(name)
                    else:
                        groups.setdefault(coop, []).append(name)
                blocked = any(name in new_proteins for name in singles) or any(
                    all(name in new_proteins for name in members)
                    for members in groups.values()
                )
                if blocked:
                    state = False
            new_promoter_state[prom_id] = state
            new_cassette_on[cas.id] = state
        if new_cassette_on == cassette_on and new_proteins == active_proteins:
            promoter_state = new_promoter_state
            break
        cassette_on, active_proteins = new_cassette_on, new_proteins
        promoter_state = new_promoter_state
    else:
        raise EvalError("symbolic evaluation did not stabilize")

    outputs = []
    for cas in idx.cassettes:
        for fid in idx.cds_of.get(cas.id, []):
            name = doc.components[fid].name
            part = library.by_name(name) if name else None
            if part is not None and part.is_reporter:
                outputs.append(1 if cassette_on[cas.id] else 0)
    if not outputs:
        raise EvalError("document has no reporter cassette to read")
    if len(set(outputs)) > 1:
        raise EvalError("reporter cassettes disagree; no single output bit")
    return outputs[0]


def _reject_effective_cycles(idx: _DocIndex) -> None:
    edges: set[tuple[str, str]] = set()
    containing: dict[str, str] = {}
    for cas in idx.cassettes:
        containing[cas.id] = cas.id
    for cas in idx.cassettes:
        prom_id = idx.promoter_of.get(cas.id)
        if prom_id is None:
            continue
        prom = idx.doc.components[prom_id]
        names = [n for n, _ in idx.effective_inhibitors(prom)]
        names += [
            n for n in idx.stimulators.get(prom_id, [])
        ]
        for name in names:
            for src in idx.producers.get(name, []):
                edges.add((src, cas.id))
    # DFS cycle detection over cassette ids
    adj: dict[str, list[str]] = {}
    for src, dst in edges:
        adj.setdefault(src, []).append(dst)
    WHITE, GREY, BLACK = 0, 1, 2
    color = {cas.id: WHITE for cas in idx.cassettes}

    def dfs(u: str) -> bool:
        color[u] = GREY
        for v in adj.get(u, []):
            if color[v] == GREY:
                return True
            if color[v] == WHITE and dfs(v):
                return True
        color[u] = BLACK
        return False

    for cas in idx.cassettes:
        if color[cas.id] == WHITE and dfs(cas.id):
            raise UnsupportedTopologyError(
                "circuit has effective regulatory feedback; steady-state logic undefined"
            )


def full_truth_table(
    doc: CircuitDocument, library: PartsLibrary, ports: tuple[InputPort, ...]
) -> dict[tuple[int, ...], int]:
    table: dict[tuple[int, ...], int] = {}
    k = len(ports)
    for bits in _all_vectors(k):
        assignment = {port.name: bit for port, bit in zip(ports, bits)}
        table[bits] = eval_truth_table(doc, assignment, library, ports)
    return table


def _all_vectors(k: int) -> list[tuple[int, ...]]:
    return [tuple((i >> (k - 1 - j)) & 1 for j in range(k)) for i in range(1 << k)]


# --- gate topologies and Hill propagation -----------------------------------------


@dataclass(frozen=True)
class GateNode:
    id: str
    inputs: tuple[str, ...] = ()
    is_sensor: bool = False
    is_output: bool = False


@dataclass(frozen=True)
class GateTopology:
    """DAG of NOR operations; sensors are sources, exactly one node is output."""

    nodes: tuple[GateNode, ...]

    def __post_init__(self):
        ids = {n.id for n in self.nodes}
        if len(ids) != len(self.nodes):
            raise EvalError("duplicate gate node ids")
        outputs = [n for n in self.nodes if n.is_output]
        if len(outputs) != 1:
            raise EvalError(f"topology needs exactly one output node, found {len(outputs)}")
        for n in self.nodes:
            if n.is_sensor and n.inputs:
                raise EvalError(f"sensor {n.id} cannot have inputs")
            if not n.is_sensor and not n.inputs:
                raise EvalError(f"gate {n.id} has no inputs")
            if len(n.inputs) > 3:
                raise EvalError(f"gate {n.id} exceeds fan-in 3")
            for src in n.inputs:
                if src not in ids:
                    raise EvalError(f"gate {n.id} references missing input {src}")
        if self._depths() is None:
            raise EvalError("topology contains a cycle")

    def _depths(self) -> dict[str, int] | None:
        depth: dict[str, int] = {n.id: 0 for n in self.nodes if n.is_sensor}
        pending = [n for n in self.nodes if not n.is_sensor]
        guard = len(pending) + 1
        while pending and guard:
            guard -= 1
            rest = []
            for n in pending:
                if all(i in depth for i in n.inputs):
                    depth[n.id] = 1 + max(depth[i] for i in n.inputs)
                else:
                    rest.append(n)
            if len(rest) == len(pending):
                return None
            pending = rest
        return depth if not pending else None

    @property
    def sensors(self) -> list[GateNode]:
        return [n for n in self.nodes if n.is_sensor]

    @property
    def gates(self) -> list[GateNode]:
        return [n for n in self.nodes if not n.is_sensor]

    @property
    def output(self) -> GateNode:
        return next(n for n in self.nodes if n.is_output)

    def depth(self) -> int:
        depths = self._depths()
        assert depths is not None
        return max(depths.values(), default=0)


def eval_gate_topology(topology: GateTopology, inputs: dict[str, int]) -> dict[str, int]:
    """Boolean NOR semantics over the DAG: a gate is 1 iff all inputs are 0."""
    bits: dict[str, int] = {}
    for sensor in topology.sensors:
        if sensor.id not in inputs:
            raise EvalError(f"missing input bit for sensor {sensor.id}")
        bits[sensor.id] = 1 if inputs[sensor.id] else 0
    pending = list(topology.gates)
    while pending:
        rest = []
        for gate in pending:
            if all(i in bits for i in gate.inputs):
                bits[gate.id] = 1 if all(bits[i] == 0 for i in gate.inputs) else 0
            else:
                rest.append(gate)
        pending = rest
    return bits


def hill(params: HillParams, x: float) -> float:
    """Repressor response: y_min + (y_max - y_min) * K^n / (K^n + x^n)."""
    if x < 0:
        raise EvalError(f"hill input must be nonnegative, got {x}")
    kn = params.K ** params.n
    return params.y_min + (params.y_max - params.y_min) * kn / (kn + x ** params.n)


@dataclass(frozen=True)
class PropagationResult:
    state: dict[str, float]
    iterations: int
    converged: bool


def propagate_signals(
    topology: GateTopology,
    assignment: dict[str, HillParams],
    sensors: dict[str, float],
    tol: float = 1e-6,
    max_iter: int | None = None,
) -> PropagationResult:
    """Synchronous fixed-point iteration x_v <- f_v(sum of parent levels).

    Starts from x = 0 on all non-sensor nodes; converged when the largest
    per-node change drops below `tol` RPU. Inputs compose additively (split
    transcriptional-unit architecture).
    """
    for gate in topology.gates:
        if gate.id not in assignment:
            raise EvalError(f"gate {gate.id} has no response function assigned")
    for sensor in topology.sensors:
        if sensor.id not in sensors:
            raise EvalError(f"sensor {sensor.id} has no input level")

    if max_iter is None:
        max_iter = 10 * max(topology.depth(), 1) + 100

    state: dict[str, float] = {n.id: 0.0 for n in topology.nodes}
    state.update({s.id: float(sensors[s.id]) for s in topology.sensors})

    iterations = 0
    for iterations in range(1, max_iter + 1):
        nxt = dict(state)
        delta = 0.0
        for gate in topology.gates:
            x = sum(state[i] for i in gate.inputs)
            y = hill(assignment[gate.id], x)
            delta = max(delta, abs(y - state[gate.id]))
            nxt[gate.id] = y
        state = nxt
        if delta < tol:
            return PropagationResult(state=state, iterations=iterations, converged=True)
        if not all(math.isfinite(v) for v in state.values()):
            raise EvalError("propagation produced non-finite levels")
    return PropagationResult(state=state, iterations=iterations, converged=False)


def truth_table_from_propagation(
    topology: GateTopology,
    assignment: dict[str, HillParams],
    sensor_levels: tuple[float, float],
) -> dict[tuple[int, ...], int | str]:
    """Thresholded table: ON > 0.5 RPU, OFF < 0.1 RPU, else margin_failure."""
    off_rpu, on_rpu = sensor_levels
    sensor_ids = [s.id for s in topology.sensors]
    out = topology.output.id
    table: dict[tuple[int, ...], int | str] = {}
    for bits in _all_vectors(len(sensor_ids)):
        sensors = {
            sid: (on_rpu if bit else off_rpu) for sid, bit in zip(sensor_ids, bits)
        }
        result = propagate_signals(topology, assignment, sensors)
        if not result.converged:
            raise EvalError(f"propagation did not converge for input {bits}")
        level = result.state[out]
        if level > ON_RPU:
            table[bits] = 1
        elif level < OFF_RPU:
            table[bits] = 0
        else:
            table[bits] = MARGIN_FAILURE
    return table


def check_gate_compatibility(upstream: HillParams, downstream: HillParams) -> bool:
    """Upstream dynamic range must intersect [K/10, 10K] of the downstream gate."""
    lo, hi = downstream.K / 10.0, downstream.K * 10.0
    return max(upstream.y_min, lo) <= min(upstream.y_max, hi)
