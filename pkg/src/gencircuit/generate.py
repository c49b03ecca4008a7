"""Procedural circuit generation, flaw injection, perturbation and datasets.

Every generator is deterministic in its seed and draws only training-tier
parts. Generated specs self-verify: the emitted script executes back to the
document, all verification levels score 1 against the spec's own expected
counts, and the ground truth agrees with motif detection / truth-table
evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .anneal import AnnealSchedule, CapacityError, assign_gates
from .circuit_types import (
    CircuitSpec,
    CircuitType,
    GroundTruth,
    OscillationExpectation,
)
from .graphs import (
    IsoMode,
    Polarity,
    RegGraph,
    RingExpectation,
    complexity,
    detect_motifs,
    extract_regulatory_graph,
    isomorphic,
)
from .library import Part, PartKind, PartsLibrary, Tier
from .logic import InputPort, full_truth_table
from .model import (
    CircuitDocument,
    Component,
    Constraint,
    DEFAULT_NAMESPACE,
    EntityType,
    Interaction,
    InteractionType,
    Participation,
    ParticipationRole,
    Role,
    SubComponent,
)
from .rng import Rng, mix
from .script import emit_script
from .synth import BudgetError, is_degenerate, synthesize_nor_network


class GenerationError(Exception):
    pass


class ApplicabilityError(GenerationError):
    pass


GATE_SUBTYPES = ("NOR", "AND", "OR", "NAND")


@dataclass(frozen=True)
class GenParams:
    circuit_type: CircuitType
    seed: int
    promoter_class: str | None = None        # "constitutive" | "inducible"
    gate_type: str | None = None             # two-input subtype
    cycle_length: int | None = None          # oscillator ring length, 3 or 5
    ffl_type: str | None = None              # "C1" | "I1"
    function: dict[tuple[int, ...], int] | None = None  # cascade truth table

    def __post_init__(self):
        if self.promoter_class not in (None, "constitutive", "inducible"):
            raise GenerationError(f"unknown promoter class {self.promoter_class!r}")
        if self.gate_type is not None:
            if self.circuit_type is not CircuitType.TWO_INPUT_GATE:
                raise GenerationError("gate_type only applies to two-input gates")
            if self.gate_type not in GATE_SUBTYPES:
                raise GenerationError(f"unknown gate type {self.gate_type!r}")
        if self.cycle_length is not None:
            if self.circuit_type is not CircuitType.OSCILLATOR:
                raise GenerationError("cycle_length only applies to oscillators")
            if self.cycle_length not in (3, 5):
                raise GenerationError("oscillator cycle length must be 3 or 5")
        if self.ffl_type is not None:
            if self.circuit_type is not CircuitType.FFL:
                raise GenerationError("ffl_type only applies to feed-forward loops")
            if self.ffl_type not in ("C1", "I1"):
                raise GenerationError(f"unknown FFL type {self.ffl_type!r}")
        if self.function is not None and self.circuit_type is not CircuitType.CASCADE:
            raise GenerationError("function tables only apply to cascades")


# --- part sampling -----------------------------------------------------------------


def _training(lib: PartsLibrary, kind: PartKind) -> list[Part]:
    return sorted(lib.of_kind(kind, Tier.TRAINING), key=lambda p: p.id)


def _constitutive_promoters(lib: PartsLibrary) -> list[Part]:
    return [p for p in _training(lib, PartKind.PROMOTER) if p.is_constitutive]


def _inducible_promoters(lib: PartsLibrary) -> list[Part]:
    return [
        p for p in _training(lib, PartKind.PROMOTER)
        if p.has("inducible") and not p.has("synthetic_hybrid")
    ]


def _reporters(lib: PartsLibrary) -> list[Part]:
    return [p for p in _training(lib, PartKind.CDS) if p.is_reporter]


def _sample_input_promoter(rng: Rng, lib: PartsLibrary, p_class: str | None) -> Part:
    cls = p_class or ("constitutive" if rng.random() < 0.7 else "inducible")
    pool = _constitutive_promoters(lib) if cls == "constitutive" else _inducible_promoters(lib)
    return rng.choice(pool)


def _sample_rbs(rng: Rng, lib: PartsLibrary) -> Part:
    return rng.choice(_training(lib, PartKind.RBS))


def _sample_terminator(rng: Rng, lib: PartsLibrary) -> Part:
    terms = {p.id: p for p in _training(lib, PartKind.TERMINATOR)}
    ids = ["BBa_B0015", "BBa_B0010", "BBa_B0012"]
    return terms[rng.weighted_choice(ids, [0.5, 0.25, 0.25])]


# --- document assembly -------------------------------------------------------------


class _DocBuilder:
    def __init__(self, namespace: str = DEFAULT_NAMESPACE):
        self.namespace = namespace
        self.components: dict[str, Component] = {}

    def add_part(self, cid: str, part: Part, role: Role) -> str:
        self.components[cid] = Component(
            id=cid, entity_type=EntityType.DNA, roles=(role,), name=part.name
        )
        return cid

    def add_cassette(
        self, cassette_id: str, prefix: str,
        promoter: Part, rbs: Part, cds: Part, terminator: Part,
    ) -> tuple[str, str]:
        """Canonical 4-part cassette; returns (promoter comp id, cds comp id)."""
        p = self.add_part(f"{prefix}_promoter", promoter, Role.PROMOTER)
        r = self.add_part(f"{prefix}_rbs", rbs, Role.RBS)
        g = self.add_part(f"{prefix}_cds", cds, Role.CDS)
        t = self.add_part(f"{prefix}_terminator", terminator, Role.TERMINATOR)
        self.components[cassette_id] = Component(
            id=cassette_id,
            entity_type=EntityType.DNA,
            roles=(Role.ENGINEERED_REGION,),
            name=cassette_id,
            features=tuple(SubComponent(x) for x in (p, r, g, t)),
            constraints=(
                Constraint(subject=p, object=r),
                Constraint(subject=r, object=g),
                Constraint(subject=g, object=t),
            ),
        )
        return p, g

    def add_top(self, top_id: str, cassette_ids: list[str], interactions: list[Interaction]) -> None:
        self.components[top_id] = Component(
            id=top_id,
            entity_type=EntityType.DNA,
            roles=(Role.ENGINEERED_REGION,),
            name=top_id,
            features=tuple(SubComponent(c) for c in cassette_ids),
            interactions=tuple(interactions),
        )

    def build(self) -> CircuitDocument:
        return CircuitDocument(namespace=self.namespace, components=dict(self.components))


def _inhibition(iid: str, inhibitors: list[str], target: str, coop: str | None = None) -> Interaction:
    parts = tuple(Participation(ParticipationRole.INHIBITOR, c) for c in inhibitors)
    parts += (Participation(ParticipationRole.INHIBITED, target),)
    return Interaction(id=iid, itype=InteractionType.INHIBITION, participations=parts, cooperative_group=coop)


def _stimulation(iid: str, stimulators: list[str], target: str) -> Interaction:
    parts = tuple(Participation(ParticipationRole.STIMULATOR, c) for c in stimulators)
    parts += (Participation(ParticipationRole.STIMULATED, target),)
    return Interaction(id=iid, itype=InteractionType.STIMULATION, participations=parts)


def _finish(
    circuit_type: CircuitType,
    doc: CircuitDocument,
    gt: GroundTruth,
    description: str,
    library: PartsLibrary,
) -> CircuitSpec:
    graph = extract_regulatory_graph(doc, library)
    return CircuitSpec(
        circuit_type=circuit_type,
        document=doc,
        script=emit_script(doc),
        ground_truth=gt,
        description=description,
        kappa=complexity(graph),
    )


# --- descriptions -----------------------------------------------------------------


def _describe(rng: Rng, templates: list[str], **slots: str) -> str:
    return rng.choice(templates).format(**slots)


_CASSETTE_TEMPLATES = [
    "A single expression cassette: the {pclass} promoter {p} drives {g} through RBS {r}, ending in terminator {t}.",
    "Expression unit producing {g}: promoter {p} ({pclass}), RBS {r}, coding sequence {g}, terminator {t}.",
    "{g} reporter cassette built from {p}, {r} and {t} in canonical order.",
]
_NOT_TEMPLATES = [
    "A NOT gate: {pin} constitutively expresses the repressor {rep}, which represses {pout} and shuts off {g} when the input is high.",
    "Inverter circuit where {rep} produced from the input cassette ({pin}) blocks the {pout} promoter driving the {g} reporter.",
    "Logic inverter: input cassette {pin}->{rep}; output cassette {pout}->{g}; {rep} represses {pout}.",
]
_GATE_TEMPLATES = [
    "A two-input {gate} gate over inputs A and B, built from repressors {reps}, reading out through {g}.",
    "{gate} logic circuit: input cassettes express {reps}; the output {g} cassette follows the {gate} truth table.",
    "Two-input {gate} gate with repressor set {reps} and {g} as output reporter.",
]
_TOGGLE_TEMPLATES = [
    "A toggle switch: {r1} and {r2} repress each other's promoters, giving two stable states.",
    "Bistable memory from mutual repression between {r1} (via {p1}) and {r2} (via {p2}).",
    "Mutual-repression toggle built from the orthogonal pair {r1}/{r2}.",
]
_BRANCHED_TEMPLATES = [
    "Branched activation: AraC activates {pbad} twice in parallel, driving both {g1} and {g2} on arabinose.",
    "A master activator (AraC) drives two parallel reporter branches ({g1}, {g2}) from {pbad}.",
    "Coordinated expression motif: one AraC cassette activates two {pbad} reporter cassettes.",
]
_FFL_TEMPLATES_C1 = [
    "A coherent type-1 feed-forward loop: AraC activates LuxR and, together with LuxR, the hybrid promoter {ph} driving {g}.",
    "C1 feed-forward loop with AND-gated output: both AraC and LuxR are needed to fire {ph} -> {g}.",
    "Coherent FFL (sign-sensitive delay): AraC -> LuxR -> {g}, plus the direct AraC -> {g} arm via {ph}.",
]
_FFL_TEMPLATES_I1 = [
    "An incoherent type-1 feed-forward loop: AraC activates both {rep} and the hybrid promoter {ph}; {rep} then represses {ph} -> {g}.",
    "I1 pulse generator: arabinose turns on {g} through {ph} while {rep} accumulates and shuts it back off.",
    "Incoherent FFL over AraC, {rep} and reporter {g} using hybrid promoter {ph}.",
]
_OSC_TEMPLATES = [
    "A {k}-node repression ring ({reps}); odd cycle length gives sustained oscillation.",
    "Repressilator-style oscillator of length {k} built from {reps}.",
    "Ring oscillator: {reps} repress each other cyclically over {k} stages.",
]
_CASCADE_TEMPLATES = [
    "A {k}-input NOR cascade computing {fn}: {gates} gates mapped to repressors {reps}.",
    "Multi-layer logic circuit for {fn} ({gates} NOR gates over {k} inputs) realized with {reps}.",
    "Cascaded NOR network ({gates} gates, {k} inputs) implementing {fn}.",
]


# --- generators ---------------------------------------------------------------------


def generate_circuit(params: GenParams, library: PartsLibrary) -> CircuitSpec:
    rng = Rng(params.seed)
    t = params.circuit_type
    if t is CircuitType.CASSETTE:
        return _gen_cassette(rng, params, library)
    if t is CircuitType.NOT_GATE:
        return _gen_not(rng, library)
    if t is CircuitType.TWO_INPUT_GATE:
        return _gen_two_input(rng, params, library)
    if t is CircuitType.TOGGLE:
        return _gen_toggle(rng, library)
    if t is CircuitType.BRANCHED:
        return _gen_branched(rng, library)
    if t is CircuitType.FFL:
        return _gen_ffl(rng, params, library)
    if t is CircuitType.OSCILLATOR:
        return _gen_oscillator(rng, params, library)
    if t is CircuitType.CASCADE:
        table = params.function or _sample_function(rng, 2)
        return generate_cascaded(table, library, params.seed)
    raise GenerationError(f"unknown circuit type {t}")


def _gen_cassette(rng: Rng, params: GenParams, library: PartsLibrary) -> CircuitSpec:
    promoter = _sample_input_promoter(rng, library, params.promoter_class)
    rbs = _sample_rbs(rng, library)
    reporter = rng.choice(_reporters(library))
    term = _sample_terminator(rng, library)

    b = _DocBuilder()
    b.add_cassette("expression_cassette", "cas", promoter, rbs, reporter, term)
    doc = b.build()

    gt = GroundTruth(
        expression_level=promoter.strength * rbs.strength,
        inducible=not promoter.is_constitutive,
        repressible=False,
    )
    pclass = "constitutive" if promoter.is_constitutive else "inducible"
    desc = _describe(
        rng, _CASSETTE_TEMPLATES,
        pclass=pclass, p=promoter.name, r=rbs.name, g=reporter.name, t=term.name,
    )
    return _finish(CircuitType.CASSETTE, doc, gt, desc, library)


def _gen_not(rng: Rng, library: PartsLibrary) -> CircuitSpec:
    rep = rng.choice(library.training_repressors())
    p_rep = library.promoter_for_repressor(rep.id)
    p_in = _sample_input_promoter(rng, library, None)

    b = _DocBuilder()
    in_prom, in_cds = b.add_cassette(
        "input_cassette", "in", p_in, _sample_rbs(rng, library), rep, _sample_terminator(rng, library)
    )
    reporter = rng.choice(_reporters(library))
    out_prom, _ = b.add_cassette(
        "output_cassette", "out", p_rep, _sample_rbs(rng, library), reporter,
        _sample_terminator(rng, library),
    )
    b.add_top(
        "not_circuit", ["input_cassette", "output_cassette"],
        [_inhibition("inh_1", [in_cds], out_prom)],
    )
    doc = b.build()
    gt = GroundTruth(
        truth_table={(0,): 1, (1,): 0},
        gate_type="NOT",
        inputs=(InputPort("input", "promoter", (in_prom,)),),
    )
    desc = _describe(
        rng, _NOT_TEMPLATES,
        pin=p_in.name, rep=rep.name, pout=p_rep.name, g=reporter.name,
    )
    return _finish(CircuitType.NOT_GATE, doc, gt, desc, library)


_GATE_TABLES = {
    "NOR": {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0},
    "AND": {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 1},
    "OR": {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 1},
    "NAND": {(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 0},
}


def _gen_two_input(rng: Rng, params: GenParams, library: PartsLibrary) -> CircuitSpec:
    gate = params.gate_type or rng.choice(GATE_SUBTYPES)
    reporter = rng.choice(_reporters(library))
    reps_needed = {"NOR": 2, "NAND": 2, "OR": 3, "AND": 4}[gate]
    reps = rng.sample(library.training_repressors(), reps_needed)

    b = _DocBuilder()
    a_prom, a_cds = b.add_cassette(
        "cassette_a", "a", _sample_input_promoter(rng, library, None),
        _sample_rbs(rng, library), reps[0], _sample_terminator(rng, library),
    )
    b_prom, b_cds = b.add_cassette(
        "cassette_b", "b", _sample_input_promoter(rng, library, None),
        _sample_rbs(rng, library), reps[1], _sample_terminator(rng, library),
    )
    cassettes = ["cassette_a", "cassette_b"]
    interactions: list[Interaction] = []

    if gate in ("NOR", "NAND"):
        # wired-OR output promoter anchored on the first repressor's operator
        out_prom, _ = b.add_cassette(
            "cassette_out", "out", library.promoter_for_repressor(reps[0].id),
            _sample_rbs(rng, library), reporter, _sample_terminator(rng, library),
        )
        cassettes.append("cassette_out")
        coop = "coop_out" if gate == "NAND" else None
        interactions.append(_inhibition("inh_a", [a_cds], out_prom, coop))
        interactions.append(_inhibition("inh_b", [b_cds], out_prom, coop))
    elif gate == "OR":
        int_prom, int_cds = b.add_cassette(
            "cassette_int", "int", library.promoter_for_repressor(reps[0].id),
            _sample_rbs(rng, library), reps[2], _sample_terminator(rng, library),
        )
        out_prom, _ = b.add_cassette(
            "cassette_out", "out", library.promoter_for_repressor(reps[2].id),
            _sample_rbs(rng, library), reporter, _sample_terminator(rng, library),
        )
        cassettes += ["cassette_int", "cassette_out"]
        interactions.append(_inhibition("inh_a", [a_cds], int_prom))
        interactions.append(_inhibition("inh_b", [b_cds], int_prom))
        interactions.append(_inhibition("inh_int", [int_cds], out_prom))
    else:  # AND: invert each input, then NOR the inversions
        x_prom, x_cds = b.add_cassette(
            "cassette_x", "x", library.promoter_for_repressor(reps[0].id),
            _sample_rbs(rng, library), reps[2], _sample_terminator(rng, library),
        )
        y_prom, y_cds = b.add_cassette(
            "cassette_y", "y", library.promoter_for_repressor(reps[1].id),
            _sample_rbs(rng, library), reps[3], _sample_terminator(rng, library),
        )
        out_prom, _ = b.add_cassette(
            "cassette_out", "out", library.promoter_for_repressor(reps[2].id),
            _sample_rbs(rng, library), reporter, _sample_terminator(rng, library),
        )
        cassettes += ["cassette_x", "cassette_y", "cassette_out"]
        interactions.append(_inhibition("inh_a", [a_cds], x_prom))
        interactions.append(_inhibition("inh_b", [b_cds], y_prom))
        interactions.append(_inhibition("inh_x", [x_cds], out_prom))
        interactions.append(_inhibition("inh_y", [y_cds], out_prom))

    b.add_top(f"{gate.lower()}_circuit", cassettes, interactions)
    doc = b.build()
    gt = GroundTruth(
        truth_table=dict(_GATE_TABLES[gate]),
        gate_type=gate,
        inputs=(
            InputPort("in_a", "promoter", (a_prom,)),
            InputPort("in_b", "promoter", (b_prom,)),
        ),
    )
    desc = _describe(
        rng, _GATE_TEMPLATES,
        gate=gate, reps=", ".join(r.name for r in reps), g=reporter.name,
    )
    return _finish(CircuitType.TWO_INPUT_GATE, doc, gt, desc, library)


def _gen_toggle(rng: Rng, library: PartsLibrary) -> CircuitSpec:
    rep1, rep2 = rng.sample(library.training_repressors(), 2)
    p1 = library.promoter_for_repressor(rep1.id)
    p2 = library.promoter_for_repressor(rep2.id)

    b = _DocBuilder()
    c1_prom, c1_cds = b.add_cassette(
        "cassette_1", "c1", p2, _sample_rbs(rng, library), rep1, _sample_terminator(rng, library)
    )
    c2_prom, c2_cds = b.add_cassette(
        "cassette_2", "c2", p1, _sample_rbs(rng, library), rep2, _sample_terminator(rng, library)
    )
    b.add_top(
        "toggle_circuit", ["cassette_1", "cassette_2"],
        [
            _inhibition("inh_1", [c1_cds], c2_prom),   # rep1 represses p1
            _inhibition("inh_2", [c2_cds], c1_prom),   # rep2 represses p2
        ],
    )
    doc = b.build()
    gt = GroundTruth(
        stable_states=(
            f"{rep1.name} high, {rep2.name} low",
            f"{rep1.name} low, {rep2.name} high",
        ),
    )
    desc = _describe(
        rng, _TOGGLE_TEMPLATES, r1=rep1.name, r2=rep2.name, p1=p1.name, p2=p2.name
    )
    return _finish(CircuitType.TOGGLE, doc, gt, desc, library)


def _gen_branched(rng: Rng, library: PartsLibrary) -> CircuitSpec:
    arac = library.parts["BBa_K206000"]
    pbad = library.parts["BBa_I0500"]
    rep1, rep2 = rng.sample(_reporters(library), 2)

    b = _DocBuilder()
    _, a_cds = b.add_cassette(
        "cassette_a", "a", rng.choice(_constitutive_promoters(library)),
        _sample_rbs(rng, library), arac, _sample_terminator(rng, library),
    )
    b_prom, _ = b.add_cassette(
        "cassette_b", "bch", pbad, _sample_rbs(rng, library), rep1, _sample_terminator(rng, library)
    )
    c_prom, _ = b.add_cassette(
        "cassette_c", "cch", pbad, _sample_rbs(rng, library), rep2, _sample_terminator(rng, library)
    )
    b.add_top(
        "branch_circuit", ["cassette_a", "cassette_b", "cassette_c"],
        [
            _stimulation("stim_b", [a_cds], b_prom),
            _stimulation("stim_c", [a_cds], c_prom),
        ],
    )
    doc = b.build()
    gt = GroundTruth(
        truth_table={(0,): 0, (1,): 1},
        expected_dynamics="coordinated activation: both reporters rise together upon arabinose induction",
        inputs=(InputPort("arabinose", "inducer", ()),),
    )
    desc = _describe(rng, _BRANCHED_TEMPLATES, pbad=pbad.name, g1=rep1.name, g2=rep2.name)
    return _finish(CircuitType.BRANCHED, doc, gt, desc, library)


_I1_HYBRIDS = {"BBa_C0012": "pAraLac", "BBa_C0040": "pAraTet"}


def _gen_ffl(rng: Rng, params: GenParams, library: PartsLibrary) -> CircuitSpec:
    ffl_type = params.ffl_type or rng.choice(["C1", "I1"])
    arac = library.parts["BBa_K206000"]
    pbad = library.parts["BBa_I0500"]
    reporter = rng.choice(_reporters(library))

    b = _DocBuilder()
    _, a_cds = b.add_cassette(
        "cassette_a", "a", rng.choice(_constitutive_promoters(library)),
        _sample_rbs(rng, library), arac, _sample_terminator(rng, library),
    )
    if ffl_type == "C1":
        luxr = library.synthetic["LuxR"]
        hybrid = library.synthetic["pAraLux"]
        b_prom, b_cds = b.add_cassette(
            "cassette_b", "bf", pbad, _sample_rbs(rng, library), luxr, _sample_terminator(rng, library)
        )
        c_prom, _ = b.add_cassette(
            "cassette_c", "cf", hybrid, _sample_rbs(rng, library), reporter,
            _sample_terminator(rng, library),
        )
        interactions = [
            _stimulation("stim_1", [a_cds], b_prom),
            _stimulation("stim_2", [a_cds], c_prom),
            _stimulation("stim_3", [b_cds], c_prom),
        ]
        gt = GroundTruth(
            truth_table={(0,): 0, (1,): 1},
            ffl_type="C1",
            expected_dynamics=(
                "sign-sensitive delay: output activation lags behind LuxR on arabinose "
                "addition; deactivation is immediate on removal"
            ),
            inputs=(InputPort("arabinose", "inducer", ()),),
        )
        desc = _describe(rng, _FFL_TEMPLATES_C1, ph=hybrid.name, g=reporter.name)
    else:
        rep_id = rng.choice(sorted(_I1_HYBRIDS))
        rep = library.parts[rep_id]
        hybrid = library.synthetic[_I1_HYBRIDS[rep_id]]
        b_prom, b_cds = b.add_cassette(
            "cassette_b", "bf", pbad, _sample_rbs(rng, library), rep, _sample_terminator(rng, library)
        )
        c_prom, _ = b.add_cassette(
            "cassette_c", "cf", hybrid, _sample_rbs(rng, library), reporter,
            _sample_terminator(rng, library),
        )
        interactions = [
            _stimulation("stim_1", [a_cds], b_prom),
            _stimulation("stim_2", [a_cds], c_prom),
            _inhibition("inh_1", [b_cds], c_prom),
        ]
        gt = GroundTruth(
            truth_table={(0,): 0, (1,): 0},   # sustained-input steady state
            ffl_type="I1",
            expected_dynamics=(
                "pulse generation: output transiently activates, then the accumulating "
                "repressor shuts it off"
            ),
            inputs=(InputPort("arabinose", "inducer", ()),),
        )
        desc = _describe(rng, _FFL_TEMPLATES_I1, rep=rep.name, ph=hybrid.name, g=reporter.name)

    b.add_top("ffl_circuit", ["cassette_a", "cassette_b", "cassette_c"], interactions)
    return _finish(CircuitType.FFL, b.build(), gt, desc, library)


def _gen_oscillator(rng: Rng, params: GenParams, library: PartsLibrary) -> CircuitSpec:
    k = params.cycle_length or rng.choice([3, 5])
    reps = library.training_repressors()
    if len(reps) < k:
        raise CapacityError(f"{k}-node oscillator needs {k} orthogonal repressors, have {len(reps)}")
    ring = rng.sample(reps, k)

    b = _DocBuilder()
    prom_comp: dict[int, str] = {}
    cds_comp: dict[int, str] = {}
    for i in range(1, k + 1):
        upstream = ring[i % k]  # repressor (i mod k) + 1 drives this cassette's promoter
        p, g = b.add_cassette(
            f"ring_cassette_{i}", f"n{i}",
            library.promoter_for_repressor(upstream.id),
            _sample_rbs(rng, library), ring[i - 1], _sample_terminator(rng, library),
        )
        prom_comp[(i % k) + 1] = p   # this comp instantiates the cognate promoter of ring[(i % k)]
        cds_comp[i] = g
    interactions = [
        _inhibition(f"inh_{i}", [cds_comp[i]], prom_comp[i]) for i in range(1, k + 1)
    ]
    b.add_top("oscillator_circuit", [f"ring_cassette_{i}" for i in range(1, k + 1)], interactions)
    doc = b.build()
    gt = GroundTruth(
        cycle_length=k,
        oscillation_expected=OscillationExpectation.YES,  # k in {3, 5} is odd
    )
    desc = _describe(
        rng, _OSC_TEMPLATES, k=str(k), reps=", ".join(r.name for r in ring)
    )
    return _finish(CircuitType.OSCILLATOR, doc, gt, desc, library)


def _sample_function(rng: Rng, k: int) -> dict[tuple[int, ...], int]:
    rows = 1 << k
    vectors = [tuple((i >> (k - 1 - j)) & 1 for j in range(k)) for i in range(rows)]
    for _ in range(200):
        mask = rng.randint(1, (1 << rows) - 2)
        if not is_degenerate(mask, k):
            return {vectors[i]: (mask >> i) & 1 for i in range(rows)}
    raise GenerationError("could not sample a non-degenerate function")


def generate_cascaded(
    table: dict[tuple[int, ...], int],
    library: PartsLibrary,
    seed: int,
    max_gates: int = 8,
) -> CircuitSpec:
    """Cascaded circuit: synthesize a NOR network, assign repressor systems by
    annealing, then realize one transcription unit per topology edge (split
    architecture) plus a reporter unit on the output gate's promoter."""
    rng = Rng(mix(seed, 0xCA5CADE))
    systems = library.training_repressors()
    # every gate needs its own orthogonal repressor system, so networks larger
    # than the system count are unrealizable; capping the (minimal) synthesis
    # budget there turns them into immediate capacity errors
    try:
        topo = synthesize_nor_network(table, max_gates=min(max_gates, len(systems)))
    except BudgetError as exc:
        raise CapacityError(
            f"no NOR network within {len(systems)} gates; the library offers only "
            f"{len(systems)} orthogonal repressor systems"
        ) from exc
    gate_nodes = [g.id for g in topo.gates]

    bank = {p.name: library.hill[library.promoter_for_repressor(p.id).id] for p in systems}
    anneal = assign_gates(
        topo, bank, table,
        AnnealSchedule(t0=1.0, beta=0.98, iters=300, seed=mix(seed, 0xA55160)),
    )
    assignment = anneal.assignment
    rep_of = {node: library.by_name(name) for node, name in assignment.items()}

    sensor_pool = _constitutive_promoters(library) + _inducible_promoters(library)
    sensors = topo.sensors
    sensor_promoters = dict(zip([s.id for s in sensors], rng.sample(sensor_pool, len(sensors))))

    b = _DocBuilder()
    reporter = rng.choice(_reporters(library))
    tu_index = 0
    cassette_ids: list[str] = []
    prom_comps_of_source: dict[str, list[str]] = {}   # topology node -> promoter comps it drives
    cds_comps_of_gate: dict[str, list[str]] = {}      # gate node -> comps producing its repressor

    def output_promoter_part(node_id: str) -> Part:
        if node_id in sensor_promoters:
            return sensor_promoters[node_id]
        return library.promoter_for_repressor(rep_of[node_id].id)

    for gate in topo.gates:
        for src in gate.inputs:
            tu_index += 1
            cas_id = f"tu_{tu_index}"
            p, g = b.add_cassette(
                cas_id, f"tu{tu_index}",
                output_promoter_part(src), _sample_rbs(rng, library),
                rep_of[gate.id], _sample_terminator(rng, library),
            )
            cassette_ids.append(cas_id)
            prom_comps_of_source.setdefault(src, []).append(p)
            cds_comps_of_gate.setdefault(gate.id, []).append(g)

    tu_index += 1
    rep_cas = f"tu_{tu_index}"
    out_prom, _ = b.add_cassette(
        rep_cas, f"tu{tu_index}",
        output_promoter_part(topo.output.id), _sample_rbs(rng, library),
        reporter, _sample_terminator(rng, library),
    )
    cassette_ids.append(rep_cas)
    prom_comps_of_source.setdefault(topo.output.id, []).append(out_prom)

    interactions = []
    for gate in topo.gates:
        for t_i, target in enumerate(prom_comps_of_source.get(gate.id, []), start=1):
            interactions.append(
                _inhibition(f"inh_{gate.id}_{t_i}", sorted(cds_comps_of_gate[gate.id]), target)
            )
    b.add_top("cascade_circuit", cassette_ids, interactions)
    doc = b.build()

    ports = tuple(
        InputPort(s.id, "promoter", tuple(prom_comps_of_source.get(s.id, ())))
        for s in sensors
    )
    mask = 0
    for bits in sorted(table):
        mask = (mask << 1) | table[bits]
    fn_name = f"f{mask:x}_{len(sensors)}in"
    gt = GroundTruth(
        truth_table=dict(table),
        gate_type=fn_name,
        inputs=ports,
        nor_topology=topo,
        gate_assignment=dict(assignment),
    )
    desc = _describe(
        rng, _CASCADE_TEMPLATES,
        k=str(len(sensors)), fn=fn_name, gates=str(len(gate_nodes)),
        reps=", ".join(sorted({r.name for r in rep_of.values()})),
    )
    return _finish(CircuitType.CASCADE, doc, gt, desc, library)


# --- functional self-check -----------------------------------------------------------


def self_function_score(spec: CircuitSpec, library: PartsLibrary) -> float:
    """Agreement between a spec's document and its own ground truth, in [0, 1].

    Components (averaged, by circuit type): part-aware isomorphism against the
    reference document, truth-table agreement, motif expectations, expression
    level. Clean generator output scores exactly 1.
    """
    checks: list[float] = []
    gt = spec.ground_truth
    try:
        graph = extract_regulatory_graph(spec.document, library)
        ref_graph = extract_regulatory_graph(spec.reference_document, library)
        checks.append(1.0 if isomorphic(graph, ref_graph, IsoMode.PART_AWARE) else 0.0)
    except Exception:
        graph = None
        checks.append(0.0)

    if gt.truth_table is not None:
        try:
            got = full_truth_table(spec.document, library, gt.inputs)
            rows = list(gt.truth_table)
            agree = sum(1 for r in rows if got.get(r) == gt.truth_table[r]) / len(rows)
            checks.append(agree)
        except Exception:
            checks.append(0.0)

    if graph is not None and _wants_motif_check(spec):
        checks.append(1.0 if _motifs_ok(spec, graph) else 0.0)
    elif _wants_motif_check(spec):
        checks.append(0.0)

    if gt.expression_level is not None:
        checks.append(1.0 if _expression_ok(spec, library) else 0.0)

    return sum(checks) / len(checks) if checks else 0.0


def _wants_motif_check(spec: CircuitSpec) -> bool:
    gt = spec.ground_truth
    return (
        gt.stable_states is not None
        or gt.oscillation_expected is not None
        or gt.ffl_type is not None
        or spec.circuit_type is CircuitType.BRANCHED
    )


def _motifs_ok(spec: CircuitSpec, graph: RegGraph) -> bool:
    gt = spec.ground_truth
    report = detect_motifs(graph)
    if gt.stable_states is not None and not report.bistable:
        return False
    if gt.oscillation_expected is not None:
        want = (
            RingExpectation.YES
            if gt.oscillation_expected is OscillationExpectation.YES
            else RingExpectation.BIFURCATION_DEPENDENT
        )
        rings = [
            r for r in report.oscillator_rings
            if r.length == gt.cycle_length and r.expected is want
        ]
        if not rings:
            return False
    if gt.ffl_type is not None:
        if not any(f.type == gt.ffl_type for f in report.ffls):
            return False
    if spec.circuit_type is CircuitType.BRANCHED:
        if report.ffls:
            return False
        out_act: dict[str, int] = {}
        for e in graph.edges:
            if e.polarity is Polarity.ACTIVATION:
                out_act[e.src] = out_act.get(e.src, 0) + 1
        if not any(v >= 2 for v in out_act.values()):
            return False
    return True


def _expression_ok(spec: CircuitSpec, library: PartsLibrary) -> bool:
    doc = spec.document
    for cas in doc.leaf_cassettes():
        prom = rbs = None
        for fid in cas.feature_ids():
            comp = doc.components.get(fid)
            if comp is None or comp.name is None:
                continue
            part = library.by_name(comp.name)
            if part is None:
                continue
            if part.kind is PartKind.PROMOTER:
                prom = part
            elif part.kind is PartKind.RBS:
                rbs = part
        if prom is not None and rbs is not None and prom.strength is not None:
            level = prom.strength * rbs.strength
            return abs(level - (spec.ground_truth.expression_level or 0.0)) < 1e-9
    return False
