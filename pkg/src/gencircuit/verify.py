"""Verification levels 2-4 and the weighted hierarchical reward.

Level gating is multiplicative: a level contributes only when every level
below it passed, and the function level is further scaled by both the
structural and semantic fractions, so a nonzero function reward implies all
prerequisites were met.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit_types import CircuitType, ExpectedCounts
from .library import PartsLibrary
from .model import (
    CircuitDocument,
    Component,
    InteractionType,
    ParticipationRole,
    Role,
    constraint_order,
    validate_document,
)
from .script import ExecError, run_script

CANONICAL_CASSETTE_ROLES = (Role.PROMOTER, Role.RBS, Role.CDS, Role.TERMINATOR)

STAGE_WEIGHTS: dict[int, tuple[float, float, float, float, float]] = {
    1: (0.40, 0.30, 0.20, 0.10, 0.00),
    2: (0.15, 0.15, 0.35, 0.25, 0.10),
    3: (0.10, 0.10, 0.20, 0.20, 0.40),
    4: (0.05, 0.05, 0.15, 0.15, 0.60),
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    passed: bool
    detail: str = ""

    def __post_init__(self):
        if not self.passed and not self.detail:
            raise ValueError("failed checks must carry a detail message")


@dataclass(frozen=True)
class ValidityResult:
    passed: bool
    diagnostics: tuple[str, ...]


@dataclass(frozen=True)
class LevelResult:
    score: float
    checks: tuple[CheckResult, ...]


@dataclass(frozen=True)
class RewardBreakdown:
    r_exec: float
    r_valid: float
    r_struct: float
    r_sem: float
    r_func: float
    f_task: float
    total: float
    weights: tuple[float, float, float, float, float]

    def levels(self) -> tuple[float, float, float, float, float]:
        return (self.r_exec, self.r_valid, self.r_struct, self.r_sem, self.r_func)


def verify_validity(doc: CircuitDocument) -> ValidityResult:
    diags = validate_document(doc)
    return ValidityResult(passed=not diags, diagnostics=tuple(diags))


def _primary_role(comp: Component) -> Role | None:
    for role in comp.roles:
        if role is not Role.ENGINEERED_REGION:
            return role
    return comp.roles[0] if comp.roles else None


def verify_structural(
    doc: CircuitDocument,
    spec_type: CircuitType,
    library: PartsLibrary,
    expected: ExpectedCounts,
) -> LevelResult:
    """Level 3: five structural checks, each worth 1/5."""
    checks: list[CheckResult] = []
    leaves = doc.leaf_cassettes()

    regions = len(doc.regions())
    checks.append(
        CheckResult(
            "c1",
            regions == expected.engineered_region_count,
            "" if regions == expected.engineered_region_count
            else f"expected {expected.engineered_region_count} engineered regions, found {regions}",
        )
    )

    ok = len(leaves) == expected.leaf_cassette_count and all(
        len(c.features) == 4 for c in leaves
    )
    detail = ""
    if len(leaves) != expected.leaf_cassette_count:
        detail = f"expected {expected.leaf_cassette_count} leaf cassettes, found {len(leaves)}"
    else:
        bad = [c.id for c in leaves if len(c.features) != 4]
        if bad:
            detail = f"cassettes without exactly 4 subcomponents: {', '.join(bad)}"
    checks.append(CheckResult("c2", ok, detail))

    bad_chain = []
    for cas in leaves:
        order = constraint_order(cas)
        if order is None:
            bad_chain.append(cas.id)
            continue
        roles = [_primary_role(doc.components[k]) for k in order]
        if tuple(roles) != CANONICAL_CASSETTE_ROLES:
            bad_chain.append(cas.id)
    checks.append(
        CheckResult(
            "c3",
            not bad_chain,
            "" if not bad_chain
            else f"precedes chain is not promoter->rbs->cds->terminator in: {', '.join(bad_chain)}",
        )
    )

    bad_pos = []
    for cas in leaves:
        roles = [_primary_role(doc.components[k]) for k in cas.feature_ids() if k in doc.components]
        if tuple(roles) != CANONICAL_CASSETTE_ROLES:
            bad_pos.append(cas.id)
    checks.append(
        CheckResult(
            "c4",
            not bad_pos,
            "" if not bad_pos
            else f"feature positions carry wrong roles in: {', '.join(bad_pos)}",
        )
    )

    off_library = []
    for comp in doc.components.values():
        if comp.entity_type.value != "dna" or comp.is_region:
            continue
        if comp.name is None or library.by_name(comp.name) is None:
            off_library.append(comp.id)
    checks.append(
        CheckResult(
            "c5",
            not off_library,
            "" if not off_library
            else f"parts not in the library: {', '.join(off_library)}",
        )
    )

    score = sum(1 for c in checks if c.passed) / len(checks)
    return LevelResult(score=score, checks=tuple(checks))


def verify_semantic(
    doc: CircuitDocument, spec_type: CircuitType, library: PartsLibrary
) -> LevelResult:
    """Level 4: five semantic checks; c2-c5 are vacuously true without interactions."""
    checks: list[CheckResult] = []
    interactions = doc.interactions_all()

    bad_roles = []
    leaf_roles = set(Role) - {Role.ENGINEERED_REGION}
    for comp in doc.components.values():
        if comp.entity_type.value != "dna":
            continue
        if not comp.roles:
            bad_roles.append(comp.id)
        elif not comp.is_region and not (set(comp.roles) & leaf_roles):
            bad_roles.append(comp.id)
    checks.append(
        CheckResult(
            "c1",
            not bad_roles,
            "" if not bad_roles else f"DNA components without a valid role: {', '.join(bad_roles)}",
        )
    )

    # itypes are a closed enum, so c2 can only fail for empty interactions
    bad_types = [i.id for _, i in interactions if not isinstance(i.itype, InteractionType)]
    checks.append(
        CheckResult(
            "c2",
            not bad_types,
            "" if not bad_types else f"unrecognized interaction types: {', '.join(bad_types)}",
        )
    )

    allowed = {
        InteractionType.INHIBITION: {ParticipationRole.INHIBITOR, ParticipationRole.INHIBITED},
        InteractionType.STIMULATION: {ParticipationRole.STIMULATOR, ParticipationRole.STIMULATED},
        InteractionType.GENETIC_PRODUCTION: {ParticipationRole.TEMPLATE, ParticipationRole.PRODUCT},
    }
    bad_parts = []
    for _, inter in interactions:
        for part in inter.participations:
            if part.role not in allowed[inter.itype]:
                bad_parts.append(inter.id)
                break
    checks.append(
        CheckResult(
            "c3",
            not bad_parts,
            "" if not bad_parts
            else f"participation roles inconsistent with interaction type: {', '.join(bad_parts)}",
        )
    )

    checks.append(_check_cognate_inhibition(doc, library))
    checks.append(_check_reporter_positions(doc, library))

    score = sum(1 for c in checks if c.passed) / len(checks)
    return LevelResult(score=score, checks=tuple(checks))


def _part_of(doc: CircuitDocument, library: PartsLibrary, cid: str):
    comp = doc.components.get(cid)
    if comp is None or comp.name is None:
        return None
    return library.by_name(comp.name)


def _check_cognate_inhibition(doc: CircuitDocument, library: PartsLibrary) -> CheckResult:
    """c4: every inhibited promoter keeps at least one cognate inhibitor.

    Wired-OR aware: extra non-cognate co-inhibitors are fine as long as one
    cognate operator anchors the promoter.
    """
    inhibitors_by_prom: dict[str, list[str]] = {}
    for _, inter in doc.interactions_all():
        if inter.itype is not InteractionType.INHIBITION:
            continue
        for tgt in inter.targets_with_role(ParticipationRole.INHIBITED):
            inhibitors_by_prom.setdefault(tgt, []).extend(
                inter.targets_with_role(ParticipationRole.INHIBITOR)
            )
    bad = []
    for prom_id, inh_ids in sorted(inhibitors_by_prom.items()):
        prom_part = _part_of(doc, library, prom_id)
        cognates = set(prom_part.cognate_repressors()) if prom_part is not None else set()
        anchored = False
        for iid in inh_ids:
            part = _part_of(doc, library, iid)
            if part is not None and part.id in cognates:
                anchored = True
        if not anchored:
            bad.append(prom_id)
    return CheckResult(
        "c4",
        not bad,
        "" if not bad else f"inhibited promoters without a cognate inhibitor: {', '.join(bad)}",
    )


def _check_reporter_positions(doc: CircuitDocument, library: PartsLibrary) -> CheckResult:
    """c5: reporters are never production templates; terminal regulated
    cassettes carry reporter (not repressor) CDS parts."""
    bad: list[str] = []
    for _, inter in doc.interactions_all():
        if inter.itype is InteractionType.GENETIC_PRODUCTION:
            for tmpl in inter.targets_with_role(ParticipationRole.TEMPLATE):
                part = _part_of(doc, library, tmpl)
                if part is not None and part.is_reporter:
                    bad.append(f"reporter {tmpl} used as production template")

    regulated_proms: set[str] = set()
    regulator_cds: set[str] = set()
    for _, inter in doc.interactions_all():
        if inter.itype is InteractionType.INHIBITION:
            regulated_proms.update(inter.targets_with_role(ParticipationRole.INHIBITED))
            regulator_cds.update(inter.targets_with_role(ParticipationRole.INHIBITOR))
        elif inter.itype is InteractionType.STIMULATION:
            regulated_proms.update(inter.targets_with_role(ParticipationRole.STIMULATED))
            regulator_cds.update(inter.targets_with_role(ParticipationRole.STIMULATOR))

    if regulated_proms:
        for cas in doc.leaf_cassettes():
            prom_ids = [
                fid for fid in cas.feature_ids()
                if fid in doc.components and Role.PROMOTER in doc.components[fid].roles
            ]
            cds_ids = [
                fid for fid in cas.feature_ids()
                if fid in doc.components and Role.CDS in doc.components[fid].roles
            ]
            if not any(p in regulated_proms for p in prom_ids):
                continue
            if any(c in regulator_cds for c in cds_ids):
                continue  # intermediate gate cassette, not the output
            for cid in cds_ids:
                part = _part_of(doc, library, cid)
                if part is not None and part.is_repressor:
                    bad.append(f"repressor {cid} occupies the output cassette CDS position")
    return CheckResult("c5", not bad, "; ".join(bad))


def hierarchical_reward(
    exec_score: float,
    valid_score: float,
    struct_score: float,
    sem_score: float,
    f_task: float,
    weights: tuple[float, float, float, float, float],
) -> RewardBreakdown:
    if len(weights) != 5 or any(w < 0 for w in weights):
        raise ConfigError(f"weights must be 5 nonnegative values, got {weights}")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ConfigError(f"weights must sum to 1 within 1e-9, got sum={sum(weights)!r}")
    for name, v in (("exec", exec_score), ("valid", valid_score), ("struct", struct_score),
                    ("sem", sem_score), ("f_task", f_task)):
        if not (0.0 <= v <= 1.0):
            raise ConfigError(f"{name} score must lie in [0, 1], got {v}")

    r_exec = exec_score
    r_valid = r_exec * valid_score
    r_struct = r_valid * struct_score
    r_sem = r_valid * sem_score
    r_func = r_struct * r_sem * f_task
    total = (
        weights[0] * r_exec
        + weights[1] * r_valid
        + weights[2] * r_struct
        + weights[3] * r_sem
        + weights[4] * r_func
    )
    return RewardBreakdown(
        r_exec=r_exec, r_valid=r_valid, r_struct=r_struct, r_sem=r_sem,
        r_func=r_func, f_task=f_task, total=total, weights=tuple(weights),
    )


@dataclass(frozen=True)
class DocumentAssessment:
    """Levels 1-4 of the hierarchy for one script or document."""

    exec_ok: bool
    exec_error: ExecError | None
    document: CircuitDocument | None
    validity: ValidityResult | None
    structural: LevelResult | None
    semantic: LevelResult | None

    @property
    def exec_score(self) -> float:
        return 1.0 if self.exec_ok else 0.0

    @property
    def valid_score(self) -> float:
        return 1.0 if (self.validity is not None and self.validity.passed) else 0.0

    @property
    def struct_score(self) -> float:
        return self.structural.score if self.structural is not None else 0.0

    @property
    def sem_score(self) -> float:
        return self.semantic.score if self.semantic is not None else 0.0


def assess_script(
    script_text: str,
    spec_type: CircuitType,
    library: PartsLibrary,
    expected: ExpectedCounts,
) -> DocumentAssessment:
    outcome = run_script(script_text)
    if not outcome.ok:
        return DocumentAssessment(False, outcome.error, None, None, None, None)
    return assess_document(outcome.document, spec_type, library, expected)


def assess_document(
    doc: CircuitDocument,
    spec_type: CircuitType,
    library: PartsLibrary,
    expected: ExpectedCounts,
) -> DocumentAssessment:
    validity = verify_validity(doc)
    if not validity.passed:
        return DocumentAssessment(True, None, doc, validity, None, None)
    structural = verify_structural(doc, spec_type, library, expected)
    semantic = verify_semantic(doc, spec_type, library)
    return DocumentAssessment(True, None, doc, validity, structural, semantic)
