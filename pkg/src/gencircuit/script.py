"""Construction DSL: parsing, interpretation and emission.

The language is declarative-imperative with global ids - no variables, loops
or expressions - so every runtime failure maps onto exactly one statement.
Successful interpretation is verification Level 1.

Grammar (whitespace-separated tokens, `#` starts a comment):

    script    := line*
    line      := namespace | create | roles | name | sub | constraint
               | inter | partn | comment
    namespace := "namespace" URI
    create    := "component" ID ("dna" | "protein")
    roles     := "roles" ID ROLE ("," ROLE)*
    name      := "name" ID STRING
    sub       := "sub" ID ID ["reverse"]          (parent, child)
    constraint:= "precedes" ID ID ID              (parent, subjChild, objChild)
    inter     := "interaction" ID ID ITYPE ["coop" STRING]   (parent, id)
    partn     := "participation" ID PROLE ID      (interactionId, role, target)
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from .model import (
    CircuitDocument,
    Component,
    Constraint,
    DEFAULT_NAMESPACE,
    EntityType,
    Interaction,
    InteractionType,
    Orientation,
    Participation,
    ParticipationRole,
    Role,
    SubComponent,
)

_ID_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.\-]*$")


class ParseError(Exception):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ExecErrorKind(str, enum.Enum):
    PARSE = "parse"
    UNDEFINED_REF = "undefined_ref"
    DUPLICATE_ID = "duplicate_id"
    ARITY = "arity"
    DANGLING = "dangling"


@dataclass(frozen=True)
class ExecError:
    kind: ExecErrorKind
    line: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}: [{self.kind.value}] {self.message}"


@dataclass(frozen=True)
class Statement:
    kind: str
    args: tuple
    line: int


@dataclass(frozen=True)
class Script:
    statements: tuple[Statement, ...]
    source: str


@dataclass(frozen=True)
class ExecOutcome:
    """Either a document (Level 1 pass) or a structured execution error."""

    document: CircuitDocument | None = None
    error: ExecError | None = None

    @property
    def ok(self) -> bool:
        return self.document is not None


def _ident(tok: str, line: int) -> str:
    if not _ID_RE.match(tok):
        raise ParseError(f"malformed identifier {tok!r}", line)
    return tok


def parse_script(text: str) -> Script:
    statements: list[Statement] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        code = raw.split("#", 1)[0].strip()
        if not code:
            continue
        toks = code.split()
        kw = toks[0]
        if kw == "namespace":
            if len(toks) != 2:
                raise ParseError("namespace takes exactly one value", lineno)
            statements.append(Statement("namespace", (toks[1],), lineno))
        elif kw == "component":
            if len(toks) != 3:
                raise ParseError("component takes an id and an entity type", lineno)
            if toks[2] not in ("dna", "protein"):
                raise ParseError(f"entity type must be dna or protein, got {toks[2]!r}", lineno)
            statements.append(Statement("component", (_ident(toks[1], lineno), toks[2]), lineno))
        elif kw == "roles":
            if len(toks) < 3:
                raise ParseError("roles takes an id and at least one role", lineno)
            role_txt = "".join(toks[2:])
            roles = []
            for r in role_txt.split(","):
                try:
                    roles.append(Role(r))
                except ValueError:
                    raise ParseError(f"unknown role {r!r}", lineno) from None
            statements.append(Statement("roles", (_ident(toks[1], lineno), tuple(roles)), lineno))
        elif kw == "name":
            if len(toks) < 3:
                raise ParseError("name takes an id and a value", lineno)
            value = code.split(None, 2)[2]
            statements.append(Statement("name", (_ident(toks[1], lineno), value), lineno))
        elif kw == "sub":
            if len(toks) not in (3, 4):
                raise ParseError("sub takes parent and child ids", lineno)
            orient = Orientation.INLINE
            if len(toks) == 4:
                if toks[3] != "reverse":
                    raise ParseError(f"unknown sub modifier {toks[3]!r}", lineno)
                orient = Orientation.REVERSE
            statements.append(
                Statement("sub", (_ident(toks[1], lineno), _ident(toks[2], lineno), orient), lineno)
            )
        elif kw == "precedes":
            if len(toks) != 4:
                raise ParseError("precedes takes parent, subject and object ids", lineno)
            statements.append(
                Statement(
                    "precedes",
                    tuple(_ident(t, lineno) for t in toks[1:4]),
                    lineno,
                )
            )
        elif kw == "interaction":
            if len(toks) == 4:
                coop = None
            elif len(toks) == 6 and toks[4] == "coop":
                coop = toks[5]
            else:
                raise ParseError("interaction takes parent, id, type and optional coop group", lineno)
            try:
                itype = InteractionType(toks[3])
            except ValueError:
                raise ParseError(f"unknown interaction type {toks[3]!r}", lineno) from None
            statements.append(
                Statement(
                    "interaction",
                    (_ident(toks[1], lineno), _ident(toks[2], lineno), itype, coop),
                    lineno,
                )
            )
        elif kw == "participation":
            if len(toks) != 4:
                raise ParseError("participation takes interaction id, role and target", lineno)
            try:
                prole = ParticipationRole(toks[2])
            except ValueError:
                raise ParseError(f"unknown participation role {toks[2]!r}", lineno) from None
            statements.append(
                Statement(
                    "participation",
                    (_ident(toks[1], lineno), prole, _ident(toks[3], lineno)),
                    lineno,
                )
            )
        else:
            raise ParseError(f"unknown statement keyword {kw!r}", lineno)
    if not statements:
        raise ParseError("empty script", 1)
    return Script(statements=tuple(statements), source=text)


def execute_script(script: Script) -> ExecOutcome:
    """Interpret a parsed script. Never raises: all failures are ExecErrors."""
    namespace = DEFAULT_NAMESPACE
    namespace_set = False
    order: list[str] = []
    builders: dict[str, dict] = {}
    inter_owner: dict[str, str] = {}

    def fail(kind: ExecErrorKind, line: int, message: str) -> ExecOutcome:
        return ExecOutcome(error=ExecError(kind, line, message))

    for stmt in script.statements:
        line = stmt.line
        if stmt.kind == "namespace":
            if namespace_set:
                return fail(ExecErrorKind.DUPLICATE_ID, line, "namespace already set")
            namespace, namespace_set = stmt.args[0], True
        elif stmt.kind == "component":
            cid, etype = stmt.args
            if cid in builders:
                return fail(ExecErrorKind.DUPLICATE_ID, line, f"component id {cid!r} already declared")
            builders[cid] = {
                "entity": EntityType(etype),
                "roles": [],
                "name": None,
                "features": [],
                "constraints": [],
                "interactions": [],
            }
            order.append(cid)
        elif stmt.kind == "roles":
            cid, roles = stmt.args
            if cid not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"roles for undeclared component {cid!r}")
            for r in roles:
                if r not in builders[cid]["roles"]:
                    builders[cid]["roles"].append(r)
        elif stmt.kind == "name":
            cid, value = stmt.args
            if cid not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"name for undeclared component {cid!r}")
            builders[cid]["name"] = value
        elif stmt.kind == "sub":
            parent, child, orient = stmt.args
            if parent not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"sub parent {parent!r} is undeclared")
            if child not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"sub child {child!r} is undeclared")
            if any(s.instance_of == child for s in builders[parent]["features"]):
                return fail(
                    ExecErrorKind.DUPLICATE_ID, line,
                    f"{child!r} is already a feature of {parent!r}",
                )
            builders[parent]["features"].append(SubComponent(child, orient))
        elif stmt.kind == "precedes":
            parent, subj, obj = stmt.args
            if parent not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"constraint parent {parent!r} is undeclared")
            if subj == obj:
                return fail(ExecErrorKind.ARITY, line, "constraint relates a feature to itself")
            feats = [s.instance_of for s in builders[parent]["features"]]
            for end in (subj, obj):
                if end not in feats:
                    return fail(
                        ExecErrorKind.DANGLING, line,
                        f"{end!r} is not a feature of {parent!r}",
                    )
            builders[parent]["constraints"].append(Constraint(subject=subj, object=obj))
        elif stmt.kind == "interaction":
            parent, iid, itype, coop = stmt.args
            if parent not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"interaction parent {parent!r} is undeclared")
            if iid in inter_owner:
                return fail(ExecErrorKind.DUPLICATE_ID, line, f"interaction id {iid!r} already declared")
            builders[parent]["interactions"].append(
                {"id": iid, "itype": itype, "coop": coop, "parts": []}
            )
            inter_owner[iid] = parent
        elif stmt.kind == "participation":
            iid, prole, target = stmt.args
            if iid not in inter_owner:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"participation for undeclared interaction {iid!r}")
            if target not in builders:
                return fail(ExecErrorKind.UNDEFINED_REF, line, f"participation target {target!r} is undeclared")
            owner = builders[inter_owner[iid]]
            for rec in owner["interactions"]:
                if rec["id"] == iid:
                    rec["parts"].append(Participation(prole, target))

    comps: dict[str, Component] = {}
    for cid in order:
        b = builders[cid]
        comps[cid] = Component(
            id=cid,
            entity_type=b["entity"],
            roles=tuple(b["roles"]),
            name=b["name"],
            features=tuple(b["features"]),
            constraints=tuple(b["constraints"]),
            interactions=tuple(
                Interaction(r["id"], r["itype"], tuple(r["parts"]), r["coop"])
                for r in b["interactions"]
            ),
        )
    return ExecOutcome(document=CircuitDocument(namespace=namespace, components=comps))


def run_script(text: str) -> ExecOutcome:
    """Parse and execute; parse failures come back as structured errors."""
    try:
        script = parse_script(text)
    except ParseError as exc:
        return ExecOutcome(error=ExecError(ExecErrorKind.PARSE, exc.line, str(exc)))
    return execute_script(script)


def emit_script(doc: CircuitDocument) -> str:
    """Emit a script whose execution reconstructs `doc`.

    All component declarations come first so that any prefix of the emitted
    script executes cleanly.
    """
    lines = [f"namespace {doc.namespace}"]
    for comp in doc.components.values():
        lines.append(f"component {comp.id} {comp.entity_type.value}")
        if comp.roles:
            lines.append(f"roles {comp.id} " + ",".join(r.value for r in comp.roles))
        if comp.name is not None:
            lines.append(f"name {comp.id} {comp.name}")
    for comp in doc.components.values():
        for sub in comp.features:
            suffix = " reverse" if sub.orientation is Orientation.REVERSE else ""
            lines.append(f"sub {comp.id} {sub.instance_of}{suffix}")
    for comp in doc.components.values():
        for con in comp.constraints:
            lines.append(f"precedes {comp.id} {con.subject} {con.object}")
    for comp in doc.components.values():
        for inter in comp.interactions:
            coop = f" coop {inter.cooperative_group}" if inter.cooperative_group else ""
            lines.append(f"interaction {comp.id} {inter.id} {inter.itype.value}{coop}")
            for part in inter.participations:
                lines.append(f"participation {inter.id} {part.role.value} {part.target}")
    return "\n".join(lines) + "\n"
