"""Flaw injection and perturbation operators over generated circuits.

Level 1-2 flaws are applied to the construction script so the damage lands in
execution or document validity; level 3-4 flaws are applied to the document
(the script is re-emitted) so the circuit stays executable and valid while
its biology goes wrong.
"""

from __future__ import annotations

import enum
from dataclasses import replace

from .circuit_types import (
    CircuitSpec,
    FLAW_LEVELS,
    FLAW_SYMPTOMS,
    FlawRecord,
    FlawType,
    GroundTruth,
)
from .graphs import Polarity, complexity, extract_regulatory_graph
from .library import Part, PartKind, PartsLibrary, Tier
from .logic import UnsupportedTopologyError, full_truth_table
from .model import (
    CircuitDocument,
    Component,
    Interaction,
    InteractionType,
    Participation,
    ParticipationRole,
    Role,
    constraint_order,
)
from .rng import Rng, mix
from .script import emit_script


class FlawError(Exception):
    pass


class InapplicableFlawError(FlawError):
    pass


# --- applicability -----------------------------------------------------------------


def applicable_flaws(spec: CircuitSpec, library: PartsLibrary) -> list[FlawType]:
    doc = spec.document
    out: list[FlawType] = []
    leaves = doc.leaf_cassettes()
    has_sub = any(c.features for c in doc.components.values())
    has_constraint = any(c.constraints for c in doc.components.values())
    regulatory = _regulatory_interactions(doc)

    if any(_terminator_features(doc, c) for c in leaves):
        out.append(FlawType.MISSING_TERMINATOR)
    if has_sub:
        out.append(FlawType.DUPLICATE_COMPONENT)
    if leaves:
        out.append(FlawType.EMPTY_FEATURE)
    if any(constraint_order(c) for c in leaves):
        out.append(FlawType.WRONG_PART_ORDER)
    if has_constraint:
        out.append(FlawType.MISSING_CONSTRAINT)
    if any(len(c.features) >= 3 for c in leaves):
        out.append(FlawType.ORPHAN_COMPONENT)
    if has_sub:
        out.append(FlawType.WRONG_ORIENTATION)
    if _anchored_inhibitions(doc, library):
        out.append(FlawType.MISMATCHED_PAIR)
    if _inducible_promoter_comps(doc, library):
        out.append(FlawType.WRONG_INDUCER)
    if regulatory:
        out.append(FlawType.INVERTED_LOGIC)
        out.append(FlawType.MISSING_INTERACTION)
    if spec.kappa.b == 1 and _cycle_interactions(doc, library):
        out.append(FlawType.INCOMPLETE_FEEDBACK)
    if _inhibited_promoter_comps(doc):
        out.append(FlawType.PROMOTER_LEAK)
    if _extra_regulation_candidates(doc, library):
        out.append(FlawType.EXTRA_REGULATION)
    return out


def _regulatory_interactions(doc: CircuitDocument) -> list[tuple[str, Interaction]]:
    return [
        (owner, i)
        for owner, i in doc.interactions_all()
        if i.itype in (InteractionType.INHIBITION, InteractionType.STIMULATION)
    ]


def _terminator_features(doc: CircuitDocument, cassette: Component) -> list[str]:
    return [
        fid for fid in cassette.feature_ids()
        if fid in doc.components and Role.TERMINATOR in doc.components[fid].roles
    ]


def _inducible_promoter_comps(doc: CircuitDocument, library: PartsLibrary) -> list[str]:
    out = []
    for comp in doc.components.values():
        if Role.PROMOTER not in comp.roles or comp.name is None:
            continue
        part = library.by_name(comp.name)
        if part is not None and part.has("inducible") and not part.has("synthetic_hybrid"):
            out.append(comp.id)
    return sorted(out)


def _inhibited_promoter_comps(doc: CircuitDocument) -> list[str]:
    out = set()
    for _, inter in doc.interactions_all():
        if inter.itype is InteractionType.INHIBITION:
            out.update(inter.targets_with_role(ParticipationRole.INHIBITED))
    return sorted(out)


def _anchored_inhibitions(
    doc: CircuitDocument, library: PartsLibrary
) -> list[tuple[str, str]]:
    """(promoter comp, cognate inhibitor comp) pairs under inhibition."""
    pairs = []
    for _, inter in doc.interactions_all():
        if inter.itype is not InteractionType.INHIBITION:
            continue
        for prom_id in inter.targets_with_role(ParticipationRole.INHIBITED):
            prom = doc.components.get(prom_id)
            part = library.by_name(prom.name) if prom is not None and prom.name else None
            cognates = set(part.cognate_repressors()) if part is not None else set()
            for inh_id in inter.targets_with_role(ParticipationRole.INHIBITOR):
                inh = doc.components.get(inh_id)
                inh_part = library.by_name(inh.name) if inh is not None and inh.name else None
                if inh_part is not None and inh_part.id in cognates:
                    pairs.append((prom_id, inh_id))
    return sorted(set(pairs))


def _produced_regulators(doc: CircuitDocument, library: PartsLibrary) -> list[str]:
    """CDS component ids inside cassettes whose part is a repressor/activator."""
    out = []
    for cas in doc.leaf_cassettes():
        for fid in cas.feature_ids():
            comp = doc.components.get(fid)
            if comp is None or Role.CDS not in comp.roles or comp.name is None:
                continue
            part = library.by_name(comp.name)
            if part is not None and (part.is_repressor or part.has("activator")):
                out.append(fid)
    return sorted(out)


def _extra_regulation_candidates(
    doc: CircuitDocument, library: PartsLibrary
) -> list[tuple[str, str]]:
    """(regulator cds comp, promoter comp) pairs whose repression edge is new."""
    try:
        graph = extract_regulatory_graph(doc, library)
    except Exception:
        return []
    existing = {(e.src, e.dst, e.polarity) for e in graph.edges}
    cassette_of: dict[str, str] = {}
    for cas in doc.leaf_cassettes():
        for fid in cas.feature_ids():
            cassette_of[fid] = cas.id
    pairs = []
    for reg in _produced_regulators(doc, library):
        for comp in doc.components.values():
            if Role.PROMOTER not in comp.roles or comp.id not in cassette_of:
                continue
            src = cassette_of.get(reg)
            dst = cassette_of.get(comp.id)
            if src is None or dst is None:
                continue
            if (src, dst, Polarity.REPRESSION) in existing:
                continue
            pairs.append((reg, comp.id))
    return sorted(set(pairs))


def _cycle_interactions(doc: CircuitDocument, library: PartsLibrary) -> list[str]:
    """Interaction ids whose extracted edge lies on a directed cycle."""
    from .graphs import detect_motifs

    graph = extract_regulatory_graph(doc, library)
    report = detect_motifs(graph)
    cycle_edges: set[tuple[str, str]] = set()
    for ring in report.oscillator_rings:
        closed = list(ring.nodes) + [ring.nodes[0]]
        cycle_edges.update(zip(closed, closed[1:]))
    cassette_of: dict[str, str] = {}
    for cas in doc.leaf_cassettes():
        for fid in cas.feature_ids():
            cassette_of[fid] = cas.id
    out = []
    for _, inter in _regulatory_interactions(doc):
        for src, dst in _interaction_edges(doc, inter, cassette_of):
            if (src, dst) in cycle_edges:
                out.append(inter.id)
                break
    return sorted(set(out))


def _interaction_edges(
    doc: CircuitDocument, inter: Interaction, cassette_of: dict[str, str]
) -> list[tuple[str, str]]:
    if inter.itype is InteractionType.INHIBITION:
        regs = inter.targets_with_role(ParticipationRole.INHIBITOR)
        tgts = inter.targets_with_role(ParticipationRole.INHIBITED)
    elif inter.itype is InteractionType.STIMULATION:
        regs = inter.targets_with_role(ParticipationRole.STIMULATOR)
        tgts = inter.targets_with_role(ParticipationRole.STIMULATED)
    else:
        return []
    edges = []
    for r in regs:
        for t in tgts:
            src, dst = cassette_of.get(r), cassette_of.get(t)
            if src and dst:
                edges.append((src, dst))
    return edges


# --- flaw injection -------------------------------------------------------------------


def inject_flaw(
    spec: CircuitSpec, flaw_type: FlawType, seed: int, library: PartsLibrary
) -> CircuitSpec:
    """Inject one flaw; levels 1-2 corrupt the script, 3-4 corrupt the document."""
    if flaw_type not in applicable_flaws(spec, library):
        raise InapplicableFlawError(
            f"{flaw_type.value} is not applicable to this {spec.circuit_type.value} circuit"
        )
    rng = Rng(mix(seed, hash_flaw(flaw_type)))
    level = FLAW_LEVELS[flaw_type]
    if level <= 2:
        script, location = _inject_script_flaw(spec, flaw_type, rng)
        record = FlawRecord(flaw_type, level, location, FLAW_SYMPTOMS[flaw_type])
        return spec.with_flaw(spec.document, script, record)
    doc, location = _inject_document_flaw(spec, flaw_type, rng, library)
    record = FlawRecord(flaw_type, level, location, FLAW_SYMPTOMS[flaw_type])
    return spec.with_flaw(doc, emit_script(doc), record)


def hash_flaw(flaw_type: FlawType) -> int:
    return sum(ord(c) for c in flaw_type.value)


def _script_lines(spec: CircuitSpec) -> list[str]:
    return spec.script.splitlines()


def _leaf_sub_lines(spec: CircuitSpec, role: Role | None = None) -> list[int]:
    """Indices of `sub` lines whose parent is a leaf cassette (optionally
    filtered by the child's role)."""
    doc = spec.document
    leaves = {c.id for c in doc.leaf_cassettes()}
    idxs = []
    for i, line in enumerate(_script_lines(spec)):
        toks = line.split()
        if len(toks) >= 3 and toks[0] == "sub" and toks[1] in leaves:
            child = doc.components.get(toks[2])
            if child is None:
                continue
            if role is None or role in child.roles:
                idxs.append(i)
    return idxs


def _inject_script_flaw(
    spec: CircuitSpec, flaw_type: FlawType, rng: Rng
) -> tuple[str, str]:
    lines = _script_lines(spec)
    doc = spec.document

    if flaw_type is FlawType.MISSING_TERMINATOR:
        idx = rng.choice(_leaf_sub_lines(spec, Role.TERMINATOR))
        location = lines[idx].split()[2]
        del lines[idx]  # the precedes constraint now dangles
        return "\n".join(lines) + "\n", location

    if flaw_type is FlawType.DUPLICATE_COMPONENT:
        idx = rng.choice(_leaf_sub_lines(spec))
        location = lines[idx].split()[2]
        lines.insert(idx + 1, lines[idx])
        return "\n".join(lines) + "\n", location

    if flaw_type is FlawType.EMPTY_FEATURE:
        cassette = rng.choice(sorted(c.id for c in doc.leaf_cassettes()))
        lines.append("component ghost_feature dna")
        lines.append(f"sub {cassette} ghost_feature")
        return "\n".join(lines) + "\n", "ghost_feature"

    if flaw_type is FlawType.WRONG_PART_ORDER:
        ordered = [c for c in doc.leaf_cassettes() if constraint_order(c)]
        cassette = rng.choice(sorted(ordered, key=lambda c: c.id))
        chain = constraint_order(cassette)
        i = rng.randint(0, len(chain) - 2)
        # assert the swapped order on top of the existing chain: contradiction
        lines.append(f"precedes {cassette.id} {chain[i + 1]} {chain[i]}")
        return "\n".join(lines) + "\n", cassette.id

    if flaw_type is FlawType.MISSING_CONSTRAINT:
        idxs = [i for i, ln in enumerate(lines) if ln.split()[:1] == ["precedes"]]
        idx = rng.choice(idxs)
        location = lines[idx].split()[1]
        del lines[idx]
        return "\n".join(lines) + "\n", location

    if flaw_type is FlawType.ORPHAN_COMPONENT:
        candidates = [c for c in doc.leaf_cassettes() if len(c.features) >= 3]
        cassette = rng.choice(sorted(candidates, key=lambda c: c.id))
        victim = cassette.feature_ids()[1]  # middle part: orphan + ambiguous order
        lines = [
            ln for ln in lines
            if not (
                ln.split()[:3] == ["sub", cassette.id, victim]
                or (ln.startswith(f"precedes {cassette.id} ") and victim in ln.split()[2:])
            )
        ]
        return "\n".join(lines) + "\n", victim

    if flaw_type is FlawType.WRONG_ORIENTATION:
        idx = rng.choice(_leaf_sub_lines(spec))
        location = lines[idx].split()[2]
        lines[idx] = lines[idx] + " reverse"
        return "\n".join(lines) + "\n", location

    raise FlawError(f"{flaw_type} is not a script-level flaw")


def _replace_component_names(
    doc: CircuitDocument, renames: dict[str, str]
) -> CircuitDocument:
    comps = {}
    for comp in doc.components.values():
        if comp.name in renames:
            comps[comp.id] = replace(comp, name=renames[comp.name])
        else:
            comps[comp.id] = comp
    return CircuitDocument(namespace=doc.namespace, components=comps)


def _remove_interaction(doc: CircuitDocument, iid: str) -> CircuitDocument:
    comps = {}
    for comp in doc.components.values():
        if any(i.id == iid for i in comp.interactions):
            comps[comp.id] = replace(
                comp, interactions=tuple(i for i in comp.interactions if i.id != iid)
            )
        else:
            comps[comp.id] = comp
    return CircuitDocument(namespace=doc.namespace, components=comps)


def _inject_document_flaw(
    spec: CircuitSpec, flaw_type: FlawType, rng: Rng, library: PartsLibrary
) -> tuple[CircuitDocument, str]:
    doc = spec.document

    if flaw_type is FlawType.MISMATCHED_PAIR:
        prom_id, inh_id = rng.choice(_anchored_inhibitions(doc, library))
        old_name = doc.components[inh_id].name
        old_part = library.by_name(old_name)
        prom_part = library.by_name(doc.components[prom_id].name)
        used = {c.name for c in doc.components.values()}
        options = [
            r for r in library.training_repressors()
            if r.id != old_part.id and r.id not in prom_part.cognate_repressors()
        ]
        unused = [r for r in options if r.name not in used]
        new_part = rng.choice(sorted(unused or options, key=lambda p: p.id))
        return _replace_component_names(doc, {old_name: new_part.name}), inh_id

    if flaw_type is FlawType.WRONG_INDUCER:
        comp_id = rng.choice(_inducible_promoter_comps(doc, library))
        old_name = doc.components[comp_id].name
        others = [
            p for p in library.of_kind(PartKind.PROMOTER, Tier.TRAINING)
            if p.has("inducible") and p.name != old_name and not p.has("synthetic_hybrid")
        ]
        new_part = rng.choice(sorted(others, key=lambda p: p.id))
        comps = dict(doc.components)
        comps[comp_id] = replace(comps[comp_id], name=new_part.name)
        return CircuitDocument(doc.namespace, comps), comp_id

    if flaw_type is FlawType.INVERTED_LOGIC:
        inter_ids = sorted(i.id for _, i in _regulatory_interactions(doc))
        iid = rng.choice(inter_ids)
        return _flip_interaction(doc, iid), iid

    if flaw_type is FlawType.MISSING_INTERACTION:
        inter_ids = sorted(i.id for _, i in _regulatory_interactions(doc))
        iid = rng.choice(inter_ids)
        return _remove_interaction(doc, iid), iid

    if flaw_type is FlawType.INCOMPLETE_FEEDBACK:
        iid = rng.choice(_cycle_interactions(doc, library))
        return _remove_interaction(doc, iid), iid

    if flaw_type is FlawType.PROMOTER_LEAK:
        prom_id = rng.choice(_inhibited_promoter_comps(doc))
        constitutive = sorted(
            (p for p in library.of_kind(PartKind.PROMOTER, Tier.TRAINING) if p.is_constitutive),
            key=lambda p: p.id,
        )
        new_part = rng.choice(constitutive)
        comps = dict(doc.components)
        comps[prom_id] = replace(comps[prom_id], name=new_part.name)
        return CircuitDocument(doc.namespace, comps), prom_id

    if flaw_type is FlawType.EXTRA_REGULATION:
        reg_id, prom_id = rng.choice(_extra_regulation_candidates(doc, library))
        return _add_inhibition(doc, reg_id, prom_id, "inh_extra"), "inh_extra"

    raise FlawError(f"{flaw_type} is not a document-level flaw")


def _flip_interaction(doc: CircuitDocument, iid: str) -> CircuitDocument:
    flip_type = {
        InteractionType.INHIBITION: InteractionType.STIMULATION,
        InteractionType.STIMULATION: InteractionType.INHIBITION,
    }
    flip_role = {
        ParticipationRole.INHIBITOR: ParticipationRole.STIMULATOR,
        ParticipationRole.INHIBITED: ParticipationRole.STIMULATED,
        ParticipationRole.STIMULATOR: ParticipationRole.INHIBITOR,
        ParticipationRole.STIMULATED: ParticipationRole.INHIBITED,
    }
    comps = {}
    for comp in doc.components.values():
        new_inters = []
        for inter in comp.interactions:
            if inter.id == iid:
                new_inters.append(
                    replace(
                        inter,
                        itype=flip_type[inter.itype],
                        participations=tuple(
                            Participation(flip_role.get(p.role, p.role), p.target)
                            for p in inter.participations
                        ),
                    )
                )
            else:
                new_inters.append(inter)
        comps[comp.id] = replace(comp, interactions=tuple(new_inters))
    return CircuitDocument(doc.namespace, comps)


def _add_inhibition(
    doc: CircuitDocument, reg_id: str, prom_id: str, iid: str
) -> CircuitDocument:
    tops = doc.top_level_regions()
    owner = tops[0].id if tops else next(iter(doc.components))
    comps = dict(doc.components)
    new_inter = Interaction(
        id=iid,
        itype=InteractionType.INHIBITION,
        participations=(
            Participation(ParticipationRole.INHIBITOR, reg_id),
            Participation(ParticipationRole.INHIBITED, prom_id),
        ),
    )
    comps[owner] = replace(comps[owner], interactions=comps[owner].interactions + (new_inter,))
    return CircuitDocument(doc.namespace, comps)


# --- perturbation ---------------------------------------------------------------------


class PerturbOperator(str, enum.Enum):
    ISO_FUNCTIONAL = "iso_functional"
    CLASS_PRESERVING = "class_preserving"
    TOPOLOGY_AUGMENT = "topology_augment"
    TOPOLOGY_ABLATE = "topology_ablate"


class PerturbError(Exception):
    pass


def perturb(
    spec: CircuitSpec,
    operator: PerturbOperator,
    chain_len: int,
    seed: int,
    library: PartsLibrary,
) -> CircuitSpec:
    """Apply `operator` chain_len times (1-3), rederiving scripts and kappa."""
    if not (1 <= chain_len <= 3):
        raise PerturbError(f"chain length must be 1..3, got {chain_len}")
    out = spec
    for step in range(chain_len):
        out = _perturb_once(out, operator, Rng(mix(seed, step)), library)
    return out


def perturb_chain(spec: CircuitSpec, chain_len: int, seed: int, library: PartsLibrary) -> CircuitSpec:
    """Chain of 1-3 perturbations with the operator drawn uniformly over the
    applicable ones at each step."""
    if not (1 <= chain_len <= 3):
        raise PerturbError(f"chain length must be 1..3, got {chain_len}")
    out = spec
    for step in range(chain_len):
        rng = Rng(mix(seed, 0xBEEF + step))
        ops = [op for op in PerturbOperator if _operator_applicable(out, op, library)]
        if not ops:
            raise PerturbError("no perturbation operator applies to this circuit")
        out = _perturb_once(out, rng.choice(ops), Rng(mix(seed, step)), library)
    return out


def _operator_applicable(spec: CircuitSpec, op: PerturbOperator, library: PartsLibrary) -> bool:
    doc = spec.document
    if op is PerturbOperator.ISO_FUNCTIONAL:
        return bool(_used_pairs(doc, library)) or bool(_rbs_comps(doc, library))
    if op is PerturbOperator.CLASS_PRESERVING:
        return bool(_class_swap_candidates(doc, library))
    if op is PerturbOperator.TOPOLOGY_AUGMENT:
        return bool(_extra_regulation_candidates(doc, library))
    return bool(_regulatory_interactions(doc))


def _used_pairs(doc: CircuitDocument, library: PartsLibrary) -> list[tuple[Part, Part]]:
    names = {c.name for c in doc.components.values() if c.name}
    pairs = []
    for rep_id, prom_id in library.cognate_pairs:
        rep, prom = library.parts[rep_id], library.parts[prom_id]
        if rep.tier is Tier.TRAINING and rep.name in names and prom.name in names:
            pairs.append((rep, prom))
    return pairs


def _rbs_comps(doc: CircuitDocument, library: PartsLibrary) -> list[str]:
    out = []
    for comp in doc.components.values():
        if Role.RBS in comp.roles and comp.name is not None:
            if library.by_name(comp.name) is not None:
                out.append(comp.id)
    return sorted(out)


def _class_swap_candidates(doc: CircuitDocument, library: PartsLibrary) -> list[str]:
    """Promoter comps of unregulated cassettes with a swappable class."""
    regulated = set(_inhibited_promoter_comps(doc))
    for _, inter in doc.interactions_all():
        if inter.itype is InteractionType.STIMULATION:
            regulated.update(inter.targets_with_role(ParticipationRole.STIMULATED))
    out = []
    for comp in doc.components.values():
        if Role.PROMOTER not in comp.roles or comp.id in regulated or comp.name is None:
            continue
        part = library.by_name(comp.name)
        if part is None:
            continue
        if part.is_constitutive or (part.has("inducible") and not part.required_activators()):
            out.append(comp.id)
    return sorted(out)


def _perturb_once(
    spec: CircuitSpec, op: PerturbOperator, rng: Rng, library: PartsLibrary
) -> CircuitSpec:
    if not _operator_applicable(spec, op, library):
        raise PerturbError(f"{op.value} has no applicable target in this circuit")
    if op is PerturbOperator.ISO_FUNCTIONAL:
        return _perturb_iso_functional(spec, rng, library)
    if op is PerturbOperator.CLASS_PRESERVING:
        return _perturb_class_preserving(spec, rng, library)
    if op is PerturbOperator.TOPOLOGY_AUGMENT:
        return _perturb_augment(spec, rng, library)
    return _perturb_ablate(spec, rng, library)


def _refresh(spec: CircuitSpec, doc: CircuitDocument, op: PerturbOperator, library: PartsLibrary,
             gt: GroundTruth | None = None, reference_self: bool = True) -> CircuitSpec:
    graph = extract_regulatory_graph(doc, library)
    return replace(
        spec,
        document=doc,
        script=emit_script(doc),
        kappa=complexity(graph),
        ground_truth=gt if gt is not None else spec.ground_truth,
        reference=None if reference_self else spec.reference_document,
        provenance=spec.provenance + (f"perturb:{op.value}",),
    )


def _perturb_iso_functional(spec: CircuitSpec, rng: Rng, library: PartsLibrary) -> CircuitSpec:
    doc = spec.document
    pairs = _used_pairs(doc, library)
    unused = [
        (library.parts[r], library.parts[p])
        for r, p in library.cognate_pairs
        if library.parts[r].tier is Tier.TRAINING
        and library.parts[r].name not in {c.name for c in doc.components.values() if c.name}
    ]
    if pairs and unused:
        old_rep, old_prom = rng.choice(pairs)
        new_rep, new_prom = rng.choice(unused)
        renames = {old_rep.name: new_rep.name, old_prom.name: new_prom.name}
        new_doc = _replace_component_names(doc, renames)
        gt = spec.ground_truth
        if gt.stable_states is not None:
            states = tuple(
                s.replace(old_rep.name, new_rep.name) for s in gt.stable_states
            )
            gt = replace(gt, stable_states=states)
        new_spec = _refresh(spec, new_doc, PerturbOperator.ISO_FUNCTIONAL, library, gt)
        return replace(
            new_spec,
            description=new_spec.description
            .replace(old_rep.name, new_rep.name)
            .replace(old_prom.name, new_prom.name),
        )
    # no swappable pair: swap an RBS for a different strength instead
    rbs_id = rng.choice(_rbs_comps(doc, library))
    old = library.by_name(doc.components[rbs_id].name)
    options = [p for p in library.of_kind(PartKind.RBS, Tier.TRAINING) if p.id != old.id]
    new = rng.choice(sorted(options, key=lambda p: p.id))
    comps = dict(doc.components)
    comps[rbs_id] = replace(comps[rbs_id], name=new.name)
    new_doc = CircuitDocument(doc.namespace, comps)
    gt = spec.ground_truth
    if gt.expression_level is not None and old.strength is not None:
        gt = replace(
            gt,
            expression_level=gt.expression_level / old.strength * new.strength,
        )
    new_spec = _refresh(spec, new_doc, PerturbOperator.ISO_FUNCTIONAL, library, gt)
    return replace(new_spec, description=new_spec.description.replace(old.name, new.name))


def _perturb_class_preserving(spec: CircuitSpec, rng: Rng, library: PartsLibrary) -> CircuitSpec:
    doc = spec.document
    comp_id = rng.choice(_class_swap_candidates(doc, library))
    old = library.by_name(doc.components[comp_id].name)
    if old.is_constitutive:
        # the safe inducible target: no unbound activator requirement
        new = library.parts["BBa_K914003"]
    else:
        new = rng.choice(_sorted_constitutive(library))
    comps = dict(doc.components)
    comps[comp_id] = replace(comps[comp_id], name=new.name)
    new_doc = CircuitDocument(doc.namespace, comps)
    gt = spec.ground_truth
    if gt.inducible is not None:
        gt = replace(gt, inducible=not new.is_constitutive)
    if gt.expression_level is not None and old.strength and new.strength:
        gt = replace(gt, expression_level=gt.expression_level / old.strength * new.strength)
    new_spec = _refresh(spec, new_doc, PerturbOperator.CLASS_PRESERVING, library, gt)
    return replace(new_spec, description=new_spec.description.replace(old.name, new.name))


def _sorted_constitutive(library: PartsLibrary) -> list[Part]:
    return sorted(
        (p for p in library.of_kind(PartKind.PROMOTER, Tier.TRAINING) if p.is_constitutive),
        key=lambda p: p.id,
    )


def _perturb_augment(spec: CircuitSpec, rng: Rng, library: PartsLibrary) -> CircuitSpec:
    doc = spec.document
    candidates = _extra_regulation_candidates(doc, library)
    order = rng.sample(candidates, len(candidates))
    for reg_id, prom_id in order:
        new_doc = _add_inhibition(doc, reg_id, prom_id, _fresh_interaction_id(doc))
        gt = spec.ground_truth
        if gt.truth_table is not None:
            try:
                gt = replace(gt, truth_table=full_truth_table(new_doc, library, gt.inputs))
            except UnsupportedTopologyError:
                continue  # augmentation created feedback in a logic circuit; try another
            except Exception:
                continue
        return _refresh(spec, new_doc, PerturbOperator.TOPOLOGY_AUGMENT, library, gt)
    raise PerturbError("topology_augment found no target preserving evaluability")


def _fresh_interaction_id(doc: CircuitDocument) -> str:
    taken = {i.id for _, i in doc.interactions_all()}
    n = 1
    while f"inh_aug_{n}" in taken:
        n += 1
    return f"inh_aug_{n}"


def _perturb_ablate(spec: CircuitSpec, rng: Rng, library: PartsLibrary) -> CircuitSpec:
    doc = spec.document
    inter_ids = sorted(i.id for _, i in _regulatory_interactions(doc))
    iid = rng.choice(inter_ids)
    on_cycle = iid in _cycle_interactions(doc, library)
    flaw_type = FlawType.INCOMPLETE_FEEDBACK if on_cycle else FlawType.MISSING_INTERACTION
    record = FlawRecord(
        flaw_type, FLAW_LEVELS[flaw_type], iid, FLAW_SYMPTOMS[flaw_type]
    )
    new_doc = _remove_interaction(doc, iid)
    graph = extract_regulatory_graph(new_doc, library)
    return replace(
        spec,
        document=new_doc,
        script=emit_script(new_doc),
        kappa=complexity(graph),
        ground_truth=replace(spec.ground_truth, flaw=record),
        reference=spec.reference_document,
        provenance=spec.provenance + (f"perturb:{PerturbOperator.TOPOLOGY_ABLATE.value}",),
    )
