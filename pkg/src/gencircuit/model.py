"""Circuit document model and its canonical serialization.

Documents are plain immutable dataclasses. Ontology terms are closed enums;
the mapping to the original SO/SBO identifiers is kept in `SO_TERMS` /
`SBO_TERMS` for reference only - raw URIs are never stored.

Canonical format (UTF-8, one record per line):

    gencircuit-doc v1
    component <id> <entity_type> roles=<r1,r2> name=<...>
    sub <parent> <child-id> [reverse]
    constraint <parent> precedes <subjIdx> <objIdx>
    interaction <parent> <id> <itype> coop=<group|->
    part <interaction-id> <role> <target>

Components are emitted sorted by id, so byte output is independent of
insertion order. Indices in `constraint` records refer to the parent's `sub`
records in emission order.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace


class DocumentError(Exception):
    """Malformed document payload (syntax, dangling reference, duplicate id)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class EntityType(str, enum.Enum):
    DNA = "dna"
    PROTEIN = "protein"


class Role(str, enum.Enum):
    PROMOTER = "promoter"
    RBS = "rbs"
    CDS = "cds"
    TERMINATOR = "terminator"
    OPERATOR = "operator"
    ENGINEERED_REGION = "engineered_region"


class InteractionType(str, enum.Enum):
    INHIBITION = "inhibition"
    STIMULATION = "stimulation"
    GENETIC_PRODUCTION = "genetic_production"


class ParticipationRole(str, enum.Enum):
    INHIBITOR = "inhibitor"
    INHIBITED = "inhibited"
    STIMULATOR = "stimulator"
    STIMULATED = "stimulated"
    TEMPLATE = "template"
    PRODUCT = "product"


class Orientation(str, enum.Enum):
    INLINE = "inline"
    REVERSE = "reverse"


# Reference mapping of the closed enums to the ontology identifiers they stand
# in for. Kept for documentation; nothing in the engine consumes the URIs.
SO_TERMS = {
    Role.PROMOTER: "SO:0000167",
    Role.RBS: "SO:0000139",
    Role.CDS: "SO:0000316",
    Role.TERMINATOR: "SO:0000141",
    Role.OPERATOR: "SO:0000057",
    Role.ENGINEERED_REGION: "SO:0000804",
}
SBO_TERMS = {
    InteractionType.INHIBITION: "SBO:0000169",
    InteractionType.STIMULATION: "SBO:0000170",
    InteractionType.GENETIC_PRODUCTION: "SBO:0000589",
    ParticipationRole.INHIBITOR: "SBO:0000020",
    ParticipationRole.INHIBITED: "SBO:0000642",
    ParticipationRole.STIMULATOR: "SBO:0000459",
    ParticipationRole.STIMULATED: "SBO:0000643",
    ParticipationRole.TEMPLATE: "SBO:0000645",
    ParticipationRole.PRODUCT: "SBO:0000011",
}

LEAF_ROLES = (Role.PROMOTER, Role.RBS, Role.CDS, Role.TERMINATOR, Role.OPERATOR)

DEFAULT_NAMESPACE = "https://gencircuit.dev/"


@dataclass(frozen=True)
class SubComponent:
    """Reference to a child component placed inside a parent component."""

    instance_of: str
    orientation: Orientation = Orientation.INLINE


@dataclass(frozen=True)
class Constraint:
    """`subject precedes object`, both referencing feature child ids."""

    subject: str
    object: str
    relation: str = "precedes"


@dataclass(frozen=True)
class Participation:
    role: ParticipationRole
    target: str


@dataclass(frozen=True)
class Interaction:
    id: str
    itype: InteractionType
    participations: tuple[Participation, ...]
    cooperative_group: str | None = None

    def targets_with_role(self, role: ParticipationRole) -> list[str]:
        return [p.target for p in self.participations if p.role == role]


@dataclass(frozen=True)
class Component:
    id: str
    entity_type: EntityType
    roles: tuple[Role, ...] = ()
    name: str | None = None
    features: tuple[SubComponent, ...] = ()
    constraints: tuple[Constraint, ...] = ()
    interactions: tuple[Interaction, ...] = ()

    def feature_ids(self) -> list[str]:
        return [f.instance_of for f in self.features]

    @property
    def is_region(self) -> bool:
        return Role.ENGINEERED_REGION in self.roles


@dataclass(frozen=True, eq=True)
class CircuitDocument:
    namespace: str
    components: dict[str, Component] = field(default_factory=dict)

    def __post_init__(self):
        for cid, comp in self.components.items():
            if cid != comp.id:
                raise DocumentError(f"component map key {cid!r} != component id {comp.id!r}")

    def component(self, cid: str) -> Component:
        return self.components[cid]

    def regions(self) -> list[Component]:
        return [c for c in self.components.values() if c.is_region]

    def parents_of(self, cid: str) -> list[str]:
        return [c.id for c in self.components.values() if cid in c.feature_ids()]

    def top_level_regions(self) -> list[Component]:
        """Engineered regions not contained in any other component."""
        contained = {f.instance_of for c in self.components.values() for f in c.features}
        return [c for c in self.regions() if c.id not in contained]

    def leaf_cassettes(self) -> list[Component]:
        """Engineered regions whose features are all non-region components."""
        out = []
        for comp in self.regions():
            kids = [self.components.get(fid) for fid in comp.feature_ids()]
            if kids and all(k is not None and not k.is_region for k in kids):
                out.append(comp)
        return out

    def interactions_all(self) -> list[tuple[str, Interaction]]:
        return [(c.id, i) for c in self.components.values() for i in c.interactions]


def validate_document(doc: CircuitDocument) -> list[str]:
    """Document-invariant diagnostics; empty list means the document is valid.

    Rules (verification Level 2): reference closure, constraint locality,
    interaction arity and participation targets, at least one top-level
    engineered region, acyclic containment, featured components carry roles
    and inline orientation, and per-component precedes constraints must admit
    exactly one total order over the features they constrain.
    """
    diags: list[str] = []
    comps = doc.components

    for comp in comps.values():
        seen: set[str] = set()
        for sub in comp.features:
            if sub.instance_of not in comps:
                diags.append(f"{comp.id}: feature references missing component {sub.instance_of!r}")
                continue
            if sub.instance_of in seen:
                diags.append(f"{comp.id}: duplicate feature {sub.instance_of!r}")
            seen.add(sub.instance_of)
            child = comps[sub.instance_of]
            if not child.roles:
                diags.append(f"{comp.id}: feature {child.id!r} has no declared role")
            if sub.orientation is not Orientation.INLINE:
                diags.append(f"{comp.id}: feature {child.id!r} is reverse-oriented")

        feature_set = set(comp.feature_ids())
        for con in comp.constraints:
            if con.subject == con.object:
                diags.append(f"{comp.id}: constraint relates {con.subject!r} to itself")
            for end in (con.subject, con.object):
                if end not in feature_set:
                    diags.append(
                        f"{comp.id}: constraint references {end!r} which is not a feature of {comp.id!r}"
                    )

        if comp.constraints:
            _constraint_order_unique(comp, diags)  # appends its own diagnostics

        for inter in comp.interactions:
            for part in inter.participations:
                if part.target not in comps:
                    diags.append(f"{inter.id}: participation targets missing component {part.target!r}")
            _check_arity(inter, diags)

    if not doc.top_level_regions():
        diags.append("document has no top-level engineered region")

    cyc = _containment_cycle(doc)
    if cyc:
        diags.append("containment cycle: " + " -> ".join(cyc))

    orphans = _orphan_leaves(doc)
    for cid in orphans:
        diags.append(f"component {cid!r} is referenced by nothing (disconnected)")

    return diags


def _check_arity(inter: Interaction, diags: list[str]) -> None:
    n = {role: len(inter.targets_with_role(role)) for role in ParticipationRole}
    if inter.itype is InteractionType.INHIBITION:
        if n[ParticipationRole.INHIBITOR] < 1 or n[ParticipationRole.INHIBITED] != 1:
            diags.append(f"{inter.id}: inhibition needs >=1 inhibitor and exactly 1 inhibited")
    elif inter.itype is InteractionType.STIMULATION:
        if n[ParticipationRole.STIMULATOR] < 1 or n[ParticipationRole.STIMULATED] != 1:
            diags.append(f"{inter.id}: stimulation needs >=1 stimulator and exactly 1 stimulated")
    else:
        if n[ParticipationRole.TEMPLATE] != 1 or n[ParticipationRole.PRODUCT] != 1:
            diags.append(f"{inter.id}: genetic_production needs exactly 1 template and 1 product")


def _constraint_order_unique(comp: Component, diags: list[str]) -> bool:
    """Precedes constraints must define one unambiguous total order."""
    kids = comp.feature_ids()
    succ: dict[str, set[str]] = {k: set() for k in kids}
    for con in comp.constraints:
        if con.subject in succ and con.object in succ:
            succ[con.subject].add(con.object)
    # Kahn's algorithm; ambiguity = more than one zero-indegree choice at any step.
    indeg = {k: 0 for k in kids}
    for k, outs in succ.items():
        for o in outs:
            indeg[o] += 1
    order: list[str] = []
    remaining = set(kids)
    ok = True
    while remaining:
        ready = sorted(k for k in remaining if indeg[k] == 0)
        if not ready:
            diags.append(f"{comp.id}: precedes constraints contain a cycle")
            return False
        if len(ready) > 1:
            diags.append(f"{comp.id}: precedes constraints leave feature order ambiguous")
            ok = False
        nxt = ready[0]
        order.append(nxt)
        remaining.discard(nxt)
        for o in succ[nxt]:
            indeg[o] -= 1
    return ok


def constraint_order(comp: Component) -> list[str] | None:
    """Total feature order implied by precedes constraints, or None if broken."""
    throwaway: list[str] = []
    if not comp.constraints:
        return None
    if not _constraint_order_unique(comp, throwaway):
        return None
    if throwaway:
        return None
    kids = comp.feature_ids()
    succ = {k: set() for k in kids}
    for con in comp.constraints:
        if con.subject in succ and con.object in succ:
            succ[con.subject].add(con.object)
    indeg = {k: 0 for k in kids}
    for outs in succ.values():
        for o in outs:
            indeg[o] += 1
    order = []
    remaining = set(kids)
    while remaining:
        ready = [k for k in remaining if indeg[k] == 0]
        nxt = ready[0]
        order.append(nxt)
        remaining.discard(nxt)
        for o in succ[nxt]:
            indeg[o] -= 1
    return order


def _containment_cycle(doc: CircuitDocument) -> list[str] | None:
    WHITE, GREY, BLACK = 0, 1, 2
    color = {cid: WHITE for cid in doc.components}
    stack: list[str] = []

    def dfs(cid: str) -> list[str] | None:
        color[cid] = GREY
        stack.append(cid)
        for fid in doc.components[cid].feature_ids():
            if fid not in color:
                continue
            if color[fid] == GREY:
                return stack[stack.index(fid):] + [fid]
            if color[fid] == WHITE:
                found = dfs(fid)
                if found:
                    return found
        color[cid] = BLACK
        stack.pop()
        return None

    for cid in doc.components:
        if color[cid] == WHITE:
            found = dfs(cid)
            if found:
                return found
    return None


def _orphan_leaves(doc: CircuitDocument) -> list[str]:
    contained = {f.instance_of for c in doc.components.values() for f in c.features}
    orphans = []
    for comp in doc.components.values():
        if comp.entity_type is not EntityType.DNA or comp.is_region:
            continue
        if comp.id not in contained:
            orphans.append(comp.id)
    return orphans


def rename_components(doc: CircuitDocument, mapping: dict[str, str]) -> CircuitDocument:
    """Consistently rename component ids (names/parts untouched)."""

    def m(cid: str) -> str:
        return mapping.get(cid, cid)

    comps = {}
    for comp in doc.components.values():
        comps[m(comp.id)] = replace(
            comp,
            id=m(comp.id),
            features=tuple(replace(s, instance_of=m(s.instance_of)) for s in comp.features),
            constraints=tuple(
                replace(c, subject=m(c.subject), object=m(c.object)) for c in comp.constraints
            ),
            interactions=tuple(
                replace(
                    i,
                    participations=tuple(
                        replace(p, target=m(p.target)) for p in i.participations
                    ),
                )
                for i in comp.interactions
            ),
        )
    return CircuitDocument(namespace=doc.namespace, components=comps)


# --- canonical serialization -------------------------------------------------

_HEADER = "gencircuit-doc v1"


def serialize_document(doc: CircuitDocument) -> bytes:
    lines = [_HEADER, f"namespace {doc.namespace}"]
    for cid in sorted(doc.components):
        comp = doc.components[cid]
        roles = ",".join(r.value for r in comp.roles) if comp.roles else "-"
        name = comp.name if comp.name is not None else "-"
        lines.append(f"component {comp.id} {comp.entity_type.value} roles={roles} name={name}")
        for sub in comp.features:
            suffix = " reverse" if sub.orientation is Orientation.REVERSE else ""
            lines.append(f"sub {comp.id} {sub.instance_of}{suffix}")
        kid_index = {fid: i for i, fid in enumerate(comp.feature_ids())}
        for con in comp.constraints:
            si = kid_index.get(con.subject, -1)
            oi = kid_index.get(con.object, -1)
            lines.append(f"constraint {comp.id} precedes {si} {oi}")
        for inter in comp.interactions:
            coop = inter.cooperative_group if inter.cooperative_group else "-"
            lines.append(f"interaction {comp.id} {inter.id} {inter.itype.value} coop={coop}")
            for part in inter.participations:
                lines.append(f"part {inter.id} {part.role.value} {part.target}")
    return ("\n".join(lines) + "\n").encode("utf-8")


def deserialize_document(data: bytes) -> CircuitDocument:
    text = data.decode("utf-8")
    lines = text.splitlines()
    if not lines or lines[0].strip() != _HEADER:
        raise DocumentError(f"missing header {_HEADER!r}", line=1)

    namespace = DEFAULT_NAMESPACE
    order: list[str] = []
    comp_fields: dict[str, dict] = {}
    inter_owner: dict[str, str] = {}

    def fields_of(cid: str, lineno: int) -> dict:
        if cid not in comp_fields:
            raise DocumentError(f"reference to undeclared component {cid!r}", line=lineno)
        return comp_fields[cid]

    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        kind = toks[0]
        if kind == "namespace":
            if len(toks) != 2:
                raise DocumentError("namespace takes one value", line=lineno)
            namespace = toks[1]
        elif kind == "component":
            if len(toks) < 5:
                raise DocumentError("component record needs id, type, roles=, name=", line=lineno)
            cid, etype = toks[1], toks[2]
            if cid in comp_fields:
                raise DocumentError(f"duplicate component id {cid!r}", line=lineno)
            attrs = _parse_attrs(toks[3:], lineno, raw)
            roles_txt = attrs.get("roles", "-")
            try:
                entity = EntityType(etype)
                roles = tuple(Role(r) for r in roles_txt.split(",")) if roles_txt != "-" else ()
            except ValueError as exc:
                raise DocumentError(str(exc), line=lineno) from exc
            name = attrs.get("name", "-")
            comp_fields[cid] = {
                "entity": entity,
                "roles": roles,
                "name": None if name == "-" else name,
                "features": [],
                "constraints": [],
                "interactions": [],
            }
            order.append(cid)
        elif kind == "sub":
            if len(toks) not in (3, 4):
                raise DocumentError("sub record needs parent and child", line=lineno)
            orient = Orientation.INLINE
            if len(toks) == 4:
                if toks[3] != "reverse":
                    raise DocumentError(f"unknown orientation {toks[3]!r}", line=lineno)
                orient = Orientation.REVERSE
            fields_of(toks[1], lineno)["features"].append(SubComponent(toks[2], orient))
        elif kind == "constraint":
            if len(toks) != 5 or toks[2] != "precedes":
                raise DocumentError("constraint record: <parent> precedes <subjIdx> <objIdx>", line=lineno)
            f = fields_of(toks[1], lineno)
            try:
                si, oi = int(toks[3]), int(toks[4])
                subj = f["features"][si].instance_of
                obj = f["features"][oi].instance_of
            except (ValueError, IndexError) as exc:
                raise DocumentError(f"bad constraint indices {toks[3]} {toks[4]}", line=lineno) from exc
            f["constraints"].append(Constraint(subject=subj, object=obj))
        elif kind == "interaction":
            if len(toks) != 5:
                raise DocumentError("interaction record: <parent> <id> <itype> coop=<g|->", line=lineno)
            f = fields_of(toks[1], lineno)
            iid = toks[2]
            if iid in inter_owner:
                raise DocumentError(f"duplicate interaction id {iid!r}", line=lineno)
            try:
                itype = InteractionType(toks[3])
            except ValueError as exc:
                raise DocumentError(str(exc), line=lineno) from exc
            coop_attr = _parse_attrs(toks[4:], lineno, raw).get("coop", "-")
            f["interactions"].append(
                {"id": iid, "itype": itype, "coop": None if coop_attr == "-" else coop_attr, "parts": []}
            )
            inter_owner[iid] = toks[1]
        elif kind == "part":
            if len(toks) != 4:
                raise DocumentError("part record: <interaction-id> <role> <target>", line=lineno)
            iid = toks[1]
            if iid not in inter_owner:
                raise DocumentError(f"participation for undeclared interaction {iid!r}", line=lineno)
            try:
                prole = ParticipationRole(toks[2])
            except ValueError as exc:
                raise DocumentError(str(exc), line=lineno) from exc
            owner = comp_fields[inter_owner[iid]]
            for rec in owner["interactions"]:
                if rec["id"] == iid:
                    rec["parts"].append(Participation(prole, toks[3]))
        else:
            raise DocumentError(f"unknown record kind {kind!r}", line=lineno)

    comps: dict[str, Component] = {}
    for cid in order:
        f = comp_fields[cid]
        comps[cid] = Component(
            id=cid,
            entity_type=f["entity"],
            roles=f["roles"],
            name=f["name"],
            features=tuple(f["features"]),
            constraints=tuple(f["constraints"]),
            interactions=tuple(
                Interaction(r["id"], r["itype"], tuple(r["parts"]), r["coop"])
                for r in f["interactions"]
            ),
        )
    doc = CircuitDocument(namespace=namespace, components=comps)
    _check_references(doc)
    return doc


def _parse_attrs(toks: list[str], lineno: int, raw: str) -> dict[str, str]:
    """key=value tokens; `name=` consumes the remainder of the line."""
    attrs: dict[str, str] = {}
    for i, tok in enumerate(toks):
        if "=" not in tok:
            raise DocumentError(f"expected key=value, got {tok!r}", line=lineno)
        key, val = tok.split("=", 1)
        if key == "name":
            # names may contain spaces; take everything after "name=" in the raw line
            attrs[key] = raw.split("name=", 1)[1].strip()
            break
        attrs[key] = val
    return attrs


def _check_references(doc: CircuitDocument) -> None:
    for comp in doc.components.values():
        for sub in comp.features:
            if sub.instance_of not in doc.components:
                raise DocumentError(
                    f"{comp.id}: subcomponent references missing id {sub.instance_of!r}"
                )
        for inter in comp.interactions:
            for part in inter.participations:
                if part.target not in doc.components:
                    raise DocumentError(
                        f"{inter.id}: participation references missing id {part.target!r}"
                    )
