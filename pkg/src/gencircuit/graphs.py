"""Regulatory graph extraction, complexity tuples, motifs and isomorphism.

Graphs are cassette-level: one node per leaf expression cassette (plus one
node for any loose promoter/CDS component), one directed edge per regulatory
interaction from the cassette producing the regulator to the cassette whose
promoter is targeted, labeled with polarity.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import networkx as nx
from networkx.algorithms import isomorphism as nxiso

from .library import PartsLibrary
from .model import CircuitDocument, Component, InteractionType, ParticipationRole, Role

MAX_CYCLE_NODES = 12  # simple-cycle enumeration bound; larger graphs are flagged


class GraphError(Exception):
    pass


class NodeRole(str, enum.Enum):
    CASSETTE = "cassette"
    PROMOTER = "promoter"
    CDS = "cds"
    REPORTER = "reporter"


class Polarity(str, enum.Enum):
    ACTIVATION = "activation"
    REPRESSION = "repression"

    @property
    def symbol(self) -> str:
        return "+" if self is Polarity.ACTIVATION else "-"


class RingExpectation(str, enum.Enum):
    YES = "yes"
    BIFURCATION_DEPENDENT = "bifurcation_dependent"


@dataclass(frozen=True)
class RegNode:
    id: str
    role: NodeRole
    label: tuple[str, ...] = ()   # part names, for part-aware matching


@dataclass(frozen=True)
class RegEdge:
    src: str
    dst: str
    polarity: Polarity


@dataclass(frozen=True)
class RegGraph:
    nodes: tuple[RegNode, ...]
    edges: tuple[RegEdge, ...]

    def __post_init__(self):
        ids = {n.id for n in self.nodes}
        if len(ids) != len(self.nodes):
            raise GraphError("duplicate node ids")
        for e in self.edges:
            if e.src not in ids or e.dst not in ids:
                raise GraphError(f"edge ({e.src}, {e.dst}) references missing node")
            if e.src == e.dst and e.polarity is not Polarity.REPRESSION:
                raise GraphError(f"activation self-loop on {e.src}")

    def node(self, nid: str) -> RegNode:
        for n in self.nodes:
            if n.id == nid:
                return n
        raise KeyError(nid)

    def in_degree(self, nid: str) -> int:
        return sum(1 for e in self.edges if e.dst == nid)

    def to_nx(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for n in self.nodes:
            g.add_node(n.id, role=n.role.value, label=n.label)
        pols: dict[tuple[str, str], list[str]] = {}
        for e in self.edges:
            pols.setdefault((e.src, e.dst), []).append(e.polarity.value)
        for (src, dst), ps in pols.items():
            g.add_edge(src, dst, pols=tuple(sorted(ps)))
        return g


@dataclass(frozen=True)
class Kappa:
    """Complexity tuple: regulatory depth, max fan-in, feedback flag, cassettes."""

    d: int
    f: int
    b: int
    n: int

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.d, self.f, self.b, self.n)


@dataclass(frozen=True)
class Ring:
    length: int
    repression_count: int
    expected: RingExpectation
    nodes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Ffl:
    a: str
    b: str
    c: str
    type: str  # "C1" | "I1" | "other"


@dataclass(frozen=True)
class MotifReport:
    bistable: bool
    oscillator_rings: tuple[Ring, ...]
    ffls: tuple[Ffl, ...]
    cycles_analyzed: bool = True


# --- extraction ----------------------------------------------------------------


def _resolve_regulator(doc: CircuitDocument, cid: str) -> Component | None:
    """The CDS whose product acts as regulator; protein targets are traced
    back through genetic_production interactions."""
    comp = doc.components.get(cid)
    if comp is None:
        return None
    if Role.CDS in comp.roles:
        return comp
    if comp.entity_type.value == "protein":
        for _, inter in doc.interactions_all():
            if inter.itype is InteractionType.GENETIC_PRODUCTION:
                if cid in inter.targets_with_role(ParticipationRole.PRODUCT):
                    for tmpl in inter.targets_with_role(ParticipationRole.TEMPLATE):
                        t = doc.components.get(tmpl)
                        if t is not None and Role.CDS in t.roles:
                            return t
    return None


def extract_regulatory_graph(doc: CircuitDocument, library: PartsLibrary | None = None) -> RegGraph:
    cassettes = doc.leaf_cassettes()
    containing: dict[str, list[str]] = {}
    for cas in cassettes:
        for fid in cas.feature_ids():
            containing.setdefault(fid, []).append(cas.id)

    nodes: list[RegNode] = []
    node_ids: set[str] = set()

    def cassette_role(cas: Component) -> NodeRole:
        if library is not None:
            for fid in cas.feature_ids():
                child = doc.components.get(fid)
                if child is not None and Role.CDS in child.roles and child.name:
                    part = library.by_name(child.name)
                    if part is not None and part.is_reporter:
                        return NodeRole.REPORTER
        return NodeRole.CASSETTE

    for cas in cassettes:
        label = tuple(
            (doc.components[fid].name or fid) for fid in cas.feature_ids() if fid in doc.components
        )
        nodes.append(RegNode(cas.id, cassette_role(cas), label))
        node_ids.add(cas.id)

    # promoter/CDS components outside any cassette get their own nodes
    for comp in doc.components.values():
        if comp.id in containing or comp.is_region:
            continue
        if Role.PROMOTER in comp.roles:
            nodes.append(RegNode(comp.id, NodeRole.PROMOTER, (comp.name or comp.id,)))
            node_ids.add(comp.id)
        elif Role.CDS in comp.roles:
            nodes.append(RegNode(comp.id, NodeRole.CDS, (comp.name or comp.id,)))
            node_ids.add(comp.id)

    def nodes_of(cid: str) -> list[str]:
        if cid in containing:
            return containing[cid]
        if cid in node_ids:
            return [cid]
        return []

    edges: list[RegEdge] = []
    seen: set[tuple[str, str, Polarity]] = set()
    for _, inter in doc.interactions_all():
        if inter.itype is InteractionType.INHIBITION:
            polarity = Polarity.REPRESSION
            reg_ids = inter.targets_with_role(ParticipationRole.INHIBITOR)
            tgt_ids = inter.targets_with_role(ParticipationRole.INHIBITED)
        elif inter.itype is InteractionType.STIMULATION:
            polarity = Polarity.ACTIVATION
            reg_ids = inter.targets_with_role(ParticipationRole.STIMULATOR)
            tgt_ids = inter.targets_with_role(ParticipationRole.STIMULATED)
        else:
            continue
        for rid in reg_ids:
            reg = _resolve_regulator(doc, rid)
            if reg is None:
                raise GraphError(
                    f"interaction {inter.id!r}: regulator {rid!r} does not resolve to a CDS"
                )
            for tid in tgt_ids:
                tgt = doc.components.get(tid)
                if tgt is None or Role.PROMOTER not in tgt.roles:
                    raise GraphError(
                        f"interaction {inter.id!r}: target {tid!r} does not resolve to a promoter"
                    )
                for src in nodes_of(reg.id):
                    for dst in nodes_of(tgt.id):
                        key = (src, dst, polarity)
                        if key not in seen:
                            seen.add(key)
                            edges.append(RegEdge(src, dst, polarity))
    return RegGraph(nodes=tuple(nodes), edges=tuple(edges))


# --- complexity ------------------------------------------------------------------


def complexity(graph: RegGraph) -> Kappa:
    g = graph.to_nx()
    n = sum(1 for node in graph.nodes if node.role in (NodeRole.CASSETTE, NodeRole.REPORTER))
    f = max((graph.in_degree(node.id) for node in graph.nodes), default=0)
    cycles = _simple_cycles(g)
    b = 1 if cycles else 0
    if b == 0:
        d = nx.dag_longest_path_length(g) if g.number_of_nodes() else 0
    else:
        # longest simple path, with a traversed cycle contributing its full length
        d = max(_longest_simple_path(g), max(len(c) for c in cycles))
    return Kappa(d=d, f=f, b=b, n=max(n, 0))


def _longest_simple_path(g: nx.DiGraph) -> int:
    best = 0

    def dfs(node: str, visited: set[str], length: int) -> None:
        nonlocal best
        best = max(best, length)
        for nxt in g.successors(node):
            if nxt not in visited:
                visited.add(nxt)
                dfs(nxt, visited, length + 1)
                visited.discard(nxt)

    for start in g.nodes:
        dfs(start, {start}, 0)
    return best


def _simple_cycles(g: nx.DiGraph) -> list[list[str]]:
    if g.number_of_nodes() > MAX_CYCLE_NODES:
        # feedback detection still works above the bound; enumeration does not
        try:
            cyc = nx.find_cycle(g)
            return [[u for u, _ in cyc]]
        except nx.NetworkXNoCycle:
            return []
    return sorted(nx.simple_cycles(g), key=lambda c: (len(c), c))


# --- motifs ---------------------------------------------------------------------


def detect_motifs(graph: RegGraph) -> MotifReport:
    g = graph.to_nx()
    analyzed = g.number_of_nodes() <= MAX_CYCLE_NODES

    bistable = False
    ids = [n.id for n in graph.nodes]
    rep_pairs = {(e.src, e.dst) for e in graph.edges if e.polarity is Polarity.REPRESSION}
    for a in ids:
        for b in ids:
            if a < b and (a, b) in rep_pairs and (b, a) in rep_pairs:
                bistable = True

    rings: list[Ring] = []
    if analyzed:
        for cyc in sorted(nx.simple_cycles(g), key=lambda c: (len(c), c)):
            closed = list(cyc) + [cyc[0]]
            reps = 0
            for u, v in zip(closed, closed[1:]):
                pols = g.edges[u, v]["pols"]
                reps += sum(1 for p in pols if p == Polarity.REPRESSION.value)
            expected = (
                RingExpectation.YES if reps % 2 == 1 else RingExpectation.BIFURCATION_DEPENDENT
            )
            rings.append(Ring(len(cyc), reps, expected, tuple(cyc)))

    ffls: list[Ffl] = []

    def pol_of(u: str, v: str) -> str | None:
        if not g.has_edge(u, v):
            return None
        pols = set(g.edges[u, v]["pols"])
        if len(pols) > 1:
            return "mixed"
        return next(iter(pols))

    act, rep = Polarity.ACTIVATION.value, Polarity.REPRESSION.value
    for a in ids:
        for b in ids:
            if b == a:
                continue
            for c in ids:
                if c in (a, b):
                    continue
                p_ab, p_bc, p_ac = pol_of(a, b), pol_of(b, c), pol_of(a, c)
                if p_ab is None or p_bc is None or p_ac is None:
                    continue
                if (p_ab, p_ac, p_bc) == (act, act, act):
                    kind = "C1"
                elif (p_ab, p_ac, p_bc) == (act, act, rep):
                    kind = "I1"
                else:
                    kind = "other"
                ffls.append(Ffl(a, b, c, kind))

    return MotifReport(
        bistable=bistable,
        oscillator_rings=tuple(rings),
        ffls=tuple(ffls),
        cycles_analyzed=analyzed,
    )


def build_ring(labels: list[str], polarities: list[Polarity]) -> RegGraph:
    """Direct ring constructor for motif parity studies (node i -> node i+1)."""
    if len(labels) != len(polarities):
        raise GraphError("labels/polarities length mismatch")
    nodes = tuple(RegNode(lbl, NodeRole.CASSETTE, (lbl,)) for lbl in labels)
    edges = tuple(
        RegEdge(labels[i], labels[(i + 1) % len(labels)], polarities[i])
        for i in range(len(labels))
    )
    return RegGraph(nodes=nodes, edges=edges)


# --- isomorphism and fingerprints -------------------------------------------------


class IsoMode(str, enum.Enum):
    ROLE_LABELED = "role_labeled"
    PART_AWARE = "part_aware"


def isomorphic(g1: RegGraph, g2: RegGraph, mode: IsoMode = IsoMode.ROLE_LABELED) -> bool:
    """Labeled digraph isomorphism (VF2), edge polarities always matched."""
    n1, n2 = g1.to_nx(), g2.to_nx()
    if n1.number_of_nodes() != n2.number_of_nodes() or n1.number_of_edges() != n2.number_of_edges():
        return False

    if mode is IsoMode.PART_AWARE:
        def node_match(a, b):
            return a["role"] == b["role"] and a["label"] == b["label"]
    else:
        def node_match(a, b):
            return a["role"] == b["role"]

    def edge_match(a, b):
        return a["pols"] == b["pols"]

    matcher = nxiso.DiGraphMatcher(n1, n2, node_match=node_match, edge_match=edge_match)
    return matcher.is_isomorphic()


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def _fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & 0xFFFFFFFFFFFFFFFF
    return h


def fingerprint(doc: CircuitDocument) -> int:
    """64-bit role-level fingerprint, a sound stage-1 filter before VF2.

    Built from the sorted (entity_type, roles) multiset over components and
    the sorted (src_role, dst_role, polarity) multiset over regulatory edges;
    part names and ids never enter, so role-labeled-isomorphic documents
    always collide.
    """
    graph = extract_regulatory_graph(doc)
    roles = {n.id: n.role.value for n in graph.nodes}
    parts = sorted(
        f"{c.entity_type.value}/{','.join(r.value for r in c.roles)}"
        for c in doc.components.values()
    )
    edges = sorted(
        f"{roles[e.src]}>{roles[e.dst]}:{e.polarity.symbol}" for e in graph.edges
    )
    payload = "|".join(parts) + "||" + "|".join(edges)
    return _fnv1a64(payload.encode("utf-8"))


def graph_fingerprint(graph: RegGraph) -> int:
    """Role-level fingerprint computed directly from a regulatory graph."""
    nodes = sorted(n.role.value for n in graph.nodes)
    roles = {n.id: n.role.value for n in graph.nodes}
    edges = sorted(f"{roles[e.src]}>{roles[e.dst]}:{e.polarity.symbol}" for e in graph.edges)
    return _fnv1a64(("|".join(nodes) + "||" + "|".join(edges)).encode("utf-8"))


# --- debug text format -------------------------------------------------------------


def emit_graph(graph: RegGraph) -> str:
    lines = [f"node {n.id} {n.role.value}" for n in graph.nodes]
    lines += [f"edge {e.src} {e.dst} {e.polarity.symbol}" for e in graph.edges]
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> RegGraph:
    nodes: list[RegNode] = []
    edges: list[RegEdge] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] == "node" and len(toks) == 3:
            nodes.append(RegNode(toks[1], NodeRole(toks[2]), (toks[1],)))
        elif toks[0] == "edge" and len(toks) == 4:
            pol = Polarity.ACTIVATION if toks[3] == "+" else Polarity.REPRESSION
            edges.append(RegEdge(toks[1], toks[2], pol))
        else:
            raise GraphError(f"line {lineno}: bad graph record {line!r}")
    return RegGraph(nodes=tuple(nodes), edges=tuple(edges))
