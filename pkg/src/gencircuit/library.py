"""Biological parts catalog: 48 core parts plus synthetic hybrid entries.

The core catalog covers 17 promoters, 4 RBS, 14 CDS, 3 terminators and 10
operators, split into `training` and `held_out` tiers. Ten orthogonal
repressor-promoter pairs (5 per tier) provide the regulatory vocabulary.

Hybrid promoters needed by feed-forward loops (one activator arm plus a
second activator or a repressor arm) do not exist as characterized parts, so
they ship as synthetic entries tagged `synthetic_hybrid` together with the
LuxR activator they require. Synthetic entries never count toward the 48.

Response-function parameters (y_min, y_max, K, n per repressible promoter)
are synthetic fixtures: no public numbers exist for these systems, so they
are drawn once from fixed ranges with a seed-0 stream and shipped in the
parts file.

Parts file format (same line-oriented style as circuit documents):

    gencircuit-parts v1
    part-def <id> <kind> tier=<t> props=<p1;p2> cognate=<id|-> strength=<x|-> name=<...>
    hill <part-id> <y_min> <y_max> <K> <n>
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from pathlib import Path

from .rng import Rng


class LibraryError(Exception):
    """Parts file parse failure or catalog integrity violation."""


class PartKind(str, enum.Enum):
    PROMOTER = "promoter"
    RBS = "rbs"
    CDS = "cds"
    TERMINATOR = "terminator"
    OPERATOR = "operator"


class RegulationMode(str, enum.Enum):
    INDUCIBLE = "inducible"
    REPRESSIBLE = "repressible"
    ACTIVATABLE = "activatable"


class Tier(str, enum.Enum):
    TRAINING = "training"
    HELD_OUT = "held_out"


@dataclass(frozen=True)
class HillParams:
    """Repressor response y(x) = y_min + (y_max - y_min) * K^n / (K^n + x^n)."""

    y_min: float
    y_max: float
    K: float
    n: float

    def __post_init__(self):
        if not (0 < self.y_min < self.y_max):
            raise LibraryError(f"require 0 < y_min < y_max, got {self.y_min}, {self.y_max}")
        if self.K <= 0:
            raise LibraryError(f"require K > 0, got {self.K}")
        if self.n < 1:
            raise LibraryError(f"require n >= 1, got {self.n}")


@dataclass(frozen=True)
class Regulation:
    mode: RegulationMode
    cognate_id: str | None = None


@dataclass(frozen=True)
class Part:
    id: str
    name: str
    kind: PartKind
    properties: frozenset[str] = frozenset()
    regulation: Regulation | None = None
    tier: Tier = Tier.TRAINING
    strength: float | None = None

    def has(self, prop: str) -> bool:
        return prop in self.properties

    def prop_values(self, prefix: str) -> list[str]:
        """Values of `prefix:<value>` property tags, sorted."""
        out = [p.split(":", 1)[1] for p in self.properties if p.startswith(prefix + ":")]
        return sorted(out)

    @property
    def is_constitutive(self) -> bool:
        return self.kind is PartKind.PROMOTER and self.has("constitutive")

    @property
    def is_reporter(self) -> bool:
        return self.kind is PartKind.CDS and self.has("reporter")

    @property
    def is_repressor(self) -> bool:
        return self.kind is PartKind.CDS and self.has("repressor")

    def cognate_repressors(self) -> list[str]:
        """CDS ids whose product can repress this promoter."""
        out = list(self.prop_values("repressible-by"))
        if (
            self.regulation is not None
            and self.regulation.mode is RegulationMode.REPRESSIBLE
            and self.regulation.cognate_id
        ):
            out.append(self.regulation.cognate_id)
        return sorted(set(out))

    def required_activators(self) -> list[str]:
        """CDS ids whose product this promoter needs bound to fire."""
        out = list(self.prop_values("activatable-by"))
        if (
            self.regulation is not None
            and self.regulation.mode in (RegulationMode.INDUCIBLE, RegulationMode.ACTIVATABLE)
            and self.regulation.cognate_id
        ):
            out.append(self.regulation.cognate_id)
        return sorted(set(out))

    def inducer(self) -> str | None:
        vals = self.prop_values("inducer")
        return vals[0] if vals else None


@dataclass(frozen=True)
class PartsLibrary:
    parts: dict[str, Part]                      # the 48-part core catalog
    cognate_pairs: tuple[tuple[str, str], ...]  # (repressor cds id, promoter id)
    synthetic: dict[str, Part] = field(default_factory=dict)
    hill: dict[str, HillParams] = field(default_factory=dict)

    def __post_init__(self):
        _check_integrity(self)

    # --- lookup -------------------------------------------------------------

    def get(self, part_id: str) -> Part | None:
        return self.parts.get(part_id) or self.synthetic.get(part_id)

    def by_name(self, name: str) -> Part | None:
        for part in self.all_parts():
            if part.name == name:
                return part
        return None

    def all_parts(self) -> list[Part]:
        return list(self.parts.values()) + list(self.synthetic.values())

    def names(self) -> set[str]:
        return {p.name for p in self.all_parts()}

    def of_kind(self, kind: PartKind, tier: Tier | None = None) -> list[Part]:
        out = [p for p in self.parts.values() if p.kind is kind]
        if tier is not None:
            out = [p for p in out if p.tier is tier]
        return out

    def promoter_for_repressor(self, cds_id: str) -> Part:
        for rep_id, prom_id in self.cognate_pairs:
            if rep_id == cds_id:
                return self.parts[prom_id]
        raise LibraryError(f"no cognate promoter for repressor {cds_id!r}")

    def training_repressors(self) -> list[Part]:
        return [
            self.parts[rep_id]
            for rep_id, _ in self.cognate_pairs
            if self.parts[rep_id].tier is Tier.TRAINING
        ]

    def filter_tier(self, tier: Tier) -> "PartsLibrary":
        parts = {pid: p for pid, p in self.parts.items() if p.tier is tier}
        pairs = tuple(
            (r, p) for r, p in self.cognate_pairs if r in parts and p in parts
        )
        return PartsLibrary(
            parts=parts,
            cognate_pairs=pairs,
            synthetic=dict(self.synthetic) if tier is Tier.TRAINING else {},
            hill={k: v for k, v in self.hill.items() if k in parts},
        )

    def gate_bank(self) -> dict[str, HillParams]:
        """Response functions keyed by repressor name, for gate assignment."""
        bank = {}
        for rep_id, prom_id in self.cognate_pairs:
            if prom_id in self.hill:
                bank[self.parts[rep_id].name] = self.hill[prom_id]
        return bank


def _check_integrity(lib: PartsLibrary) -> None:
    ids = set(lib.parts) | set(lib.synthetic)
    if len(ids) != len(lib.parts) + len(lib.synthetic):
        raise LibraryError("part ids overlap between core and synthetic sets")
    pair_proms = {prom for _, prom in lib.cognate_pairs}
    for rep_id, prom_id in lib.cognate_pairs:
        rep, prom = lib.parts.get(rep_id), lib.parts.get(prom_id)
        if rep is None or prom is None:
            raise LibraryError(f"cognate pair ({rep_id}, {prom_id}) references missing part")
        if prom.regulation is None or prom.regulation.cognate_id != rep_id:
            raise LibraryError(
                f"promoter {prom_id} does not name {rep_id} as cognate (pair is asymmetric)"
            )
    for part in lib.parts.values():
        if (
            part.kind is PartKind.PROMOTER
            and part.regulation is not None
            and part.regulation.mode is RegulationMode.REPRESSIBLE
        ):
            cid = part.regulation.cognate_id
            rep = lib.parts.get(cid) if cid else None
            if rep is None or rep.kind is not PartKind.CDS:
                raise LibraryError(
                    f"repressible promoter {part.id} has no cognate repressor CDS "
                    f"(cognate={cid!r})"
                )
            if part.id not in pair_proms:
                raise LibraryError(f"repressible promoter {part.id} missing from cognate_pairs")


# --- builtin catalog ----------------------------------------------------------

# id, name, tier, properties, cognate repressor, strength
_PROMOTERS = [
    ("BBa_J23100", "J23100", "training", "constitutive;strong", None, 1.00),
    ("BBa_J23106", "J23106", "training", "constitutive;medium", None, 0.47),
    ("BBa_J23117", "J23117", "training", "constitutive;weak", None, 0.06),
    ("BBa_J23105", "J23105", "training", "constitutive;med-weak", None, 0.24),
    ("BBa_J23114", "J23114", "training", "constitutive;med-weak", None, 0.10),
    ("BBa_I0500", "pBad", "training", "inducible;inducer:arabinose", "BBa_K206000", 0.90),
    ("BBa_R0010", "pLac", "training", "repressible", "BBa_C0012", 0.85),
    ("BBa_R0040", "pTet", "training", "repressible", "BBa_C0040", 0.95),
    ("BBa_R0051", "pLambda", "training", "repressible", "BBa_C0051", 1.10),
    ("BBa_K914003", "pRha", "training", "inducible;inducer:rhamnose", None, 0.70),
    ("pPhlF", "pPhlF", "training", "repressible", "PhlF", 0.80),
    ("pSrpR", "pSrpR", "training", "repressible", "SrpR", 0.75),
    ("pBM3R1", "pBM3R1", "held_out", "repressible", "BM3R1", 0.65),
    ("pAmtR", "pAmtR", "held_out", "repressible", "AmtR", 0.60),
    ("pQacR", "pQacR", "held_out", "repressible", "QacR", 0.55),
    ("pBetI", "pBetI", "held_out", "repressible", "BetI", 0.50),
    ("pAmeR", "pAmeR", "held_out", "repressible", "AmeR", 0.45),
]

_RBS = [
    ("BBa_B0030", "B0030", "strong", 0.60),
    ("BBa_B0032", "B0032", "medium", 0.30),
    ("BBa_B0033", "B0033", "weak", 0.01),
    ("BBa_B0034", "B0034", "very-strong", 1.00),
]

_REPORTERS = [
    ("BBa_E0040", "GFP", "reporter;green"),
    ("BBa_E1010", "mCherry", "reporter;red"),
    ("BBa_I732005", "LacZ", "reporter;enzymatic"),
]

# repressor cds id, name, tier, cognate promoter id
_REPRESSORS = [
    ("BBa_C0012", "LacI", "training", "BBa_R0010"),
    ("BBa_C0040", "TetR", "training", "BBa_R0040"),
    ("BBa_C0051", "cI", "training", "BBa_R0051"),
    ("PhlF", "PhlF", "training", "pPhlF"),
    ("SrpR", "SrpR", "training", "pSrpR"),
    ("BM3R1", "BM3R1", "held_out", "pBM3R1"),
    ("AmtR", "AmtR", "held_out", "pAmtR"),
    ("QacR", "QacR", "held_out", "pQacR"),
    ("BetI", "BetI", "held_out", "pBetI"),
    ("AmeR", "AmeR", "held_out", "pAmeR"),
]

_TERMINATORS = [
    ("BBa_B0010", "T1", "strong"),
    ("BBa_B0012", "TE", "strong"),
    ("BBa_B0015", "DT", "very-strong;double"),
]

# operator id, name, tier, cognate repressor cds id
_OPERATORS = [
    ("lacO", "lacO", "training", "BBa_C0012"),
    ("tetO", "tetO", "training", "BBa_C0040"),
    ("lambdaO", "lambdaO", "training", "BBa_C0051"),
    ("phlO", "phlO", "training", "PhlF"),
    ("srpO", "srpO", "training", "SrpR"),
    ("bm3r1O", "bm3r1O", "held_out", "BM3R1"),
    ("amtO", "amtO", "held_out", "AmtR"),
    ("qacO", "qacO", "held_out", "QacR"),
    ("betO", "betO", "held_out", "BetI"),
    ("ameO", "ameO", "held_out", "AmeR"),
]

_HILL_RANGES = {"y_min": (0.01, 0.1), "y_max": (1.0, 5.0), "K": (0.1, 1.0), "n": (1.5, 4.0)}


def _hill_fixtures() -> dict[str, HillParams]:
    """Synthetic response params for the 10 repressible promoters (seed 0)."""
    rng = Rng(0)
    fixtures = {}
    for _, _, _, prom_id in _REPRESSORS:
        y_min = round(rng.uniform(*_HILL_RANGES["y_min"]), 4)
        y_max = round(rng.uniform(*_HILL_RANGES["y_max"]), 4)
        k = round(rng.uniform(*_HILL_RANGES["K"]), 4)
        n = round(rng.uniform(*_HILL_RANGES["n"]), 4)
        fixtures[prom_id] = HillParams(y_min=y_min, y_max=y_max, K=k, n=n)
    return fixtures


def _builtin_parts() -> tuple[dict[str, Part], dict[str, Part]]:
    parts: dict[str, Part] = {}

    def add(part: Part) -> None:
        if part.id in parts:
            raise LibraryError(f"duplicate builtin part id {part.id}")
        parts[part.id] = part

    for pid, name, tier, props, cognate, strength in _PROMOTERS:
        tags = set(props.split(";"))
        reg = None
        if "repressible" in tags:
            reg = Regulation(RegulationMode.REPRESSIBLE, cognate)
        elif "inducible" in tags:
            reg = Regulation(RegulationMode.INDUCIBLE, cognate)
        add(Part(pid, name, PartKind.PROMOTER, frozenset(tags), reg, Tier(tier), strength))

    for pid, name, props, strength in _RBS:
        add(Part(pid, name, PartKind.RBS, frozenset(props.split(";")), None, Tier.TRAINING, strength))

    for pid, name, props in _REPORTERS:
        add(Part(pid, name, PartKind.CDS, frozenset(props.split(";")), None, Tier.TRAINING))

    for pid, name, tier, prom in _REPRESSORS:
        add(Part(pid, name, PartKind.CDS, frozenset({"repressor", f"represses:{prom}"}), None, Tier(tier)))

    add(
        Part(
            "BBa_K206000", "AraC", PartKind.CDS,
            frozenset({"activator", "activates:BBa_I0500", "requires-inducer:arabinose"}),
            None, Tier.TRAINING,
        )
    )

    for pid, name, props in _TERMINATORS:
        add(Part(pid, name, PartKind.TERMINATOR, frozenset(props.split(";")), None, Tier.TRAINING))

    for pid, name, tier, rep in _OPERATORS:
        add(
            Part(
                pid, name, PartKind.OPERATOR, frozenset({f"cognate:{rep}"}),
                Regulation(RegulationMode.REPRESSIBLE, rep), Tier(tier),
            )
        )

    synthetic = {
        "LuxR": Part(
            "LuxR", "LuxR", PartKind.CDS,
            frozenset({"activator", "synthetic_hybrid"}), None, Tier.TRAINING,
        ),
        "pAraLux": Part(
            "pAraLux", "pAraLux", PartKind.PROMOTER,
            frozenset({"synthetic_hybrid", "activatable-by:BBa_K206000", "activatable-by:LuxR"}),
            Regulation(RegulationMode.ACTIVATABLE), Tier.TRAINING, 0.85,
        ),
        "pAraLac": Part(
            "pAraLac", "pAraLac", PartKind.PROMOTER,
            frozenset({"synthetic_hybrid", "activatable-by:BBa_K206000", "repressible-by:BBa_C0012"}),
            Regulation(RegulationMode.ACTIVATABLE), Tier.TRAINING, 0.80,
        ),
        "pAraTet": Part(
            "pAraTet", "pAraTet", PartKind.PROMOTER,
            frozenset({"synthetic_hybrid", "activatable-by:BBa_K206000", "repressible-by:BBa_C0040"}),
            Regulation(RegulationMode.ACTIVATABLE), Tier.TRAINING, 0.78,
        ),
    }
    return parts, synthetic


def builtin_library() -> PartsLibrary:
    parts, synthetic = _builtin_parts()
    pairs = tuple((rep, prom) for rep, _, _, prom in _REPRESSORS)
    return PartsLibrary(parts=parts, cognate_pairs=pairs, synthetic=synthetic, hill=_hill_fixtures())


# --- parts file IO ------------------------------------------------------------

_PARTS_HEADER = "gencircuit-parts v1"


def emit_parts_file(lib: PartsLibrary) -> str:
    lines = [_PARTS_HEADER]
    for part in sorted(lib.all_parts(), key=lambda p: p.id):
        props = ";".join(sorted(part.properties)) if part.properties else "-"
        cognate = "-"
        if part.regulation is not None and part.regulation.cognate_id:
            cognate = part.regulation.cognate_id
        mode = part.regulation.mode.value if part.regulation is not None else "-"
        strength = f"{part.strength:g}" if part.strength is not None else "-"
        lines.append(
            f"part-def {part.id} {part.kind.value} tier={part.tier.value} "
            f"props={props} cognate={cognate} mode={mode} strength={strength} name={part.name}"
        )
    for prom_id in sorted(lib.hill):
        h = lib.hill[prom_id]
        lines.append(f"hill {prom_id} {h.y_min:g} {h.y_max:g} {h.K:g} {h.n:g}")
    return "\n".join(lines) + "\n"


def parse_parts_file(text: str) -> PartsLibrary:
    lines = text.splitlines()
    if not lines or lines[0].strip() != _PARTS_HEADER:
        raise LibraryError(f"line 1: missing header {_PARTS_HEADER!r}")
    parts: dict[str, Part] = {}
    synthetic: dict[str, Part] = {}
    hill: dict[str, HillParams] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] == "part-def":
            if len(toks) < 8:
                raise LibraryError(f"line {lineno}: part-def needs id, kind and attributes")
            pid = toks[1]
            try:
                kind = PartKind(toks[2])
            except ValueError as exc:
                raise LibraryError(f"line {lineno}: {exc}") from exc
            attrs = {}
            for tok in toks[3:]:
                if "=" not in tok:
                    raise LibraryError(f"line {lineno}: expected key=value, got {tok!r}")
                key, val = tok.split("=", 1)
                if key == "name":
                    attrs[key] = raw.split("name=", 1)[1].strip()
                    break
                attrs[key] = val
            try:
                tier = Tier(attrs.get("tier", "training"))
            except ValueError as exc:
                raise LibraryError(f"line {lineno}: {exc}") from exc
            props = frozenset(attrs["props"].split(";")) if attrs.get("props", "-") != "-" else frozenset()
            cognate = attrs.get("cognate", "-")
            mode = attrs.get("mode", "-")
            reg = None
            if mode != "-":
                try:
                    reg = Regulation(RegulationMode(mode), None if cognate == "-" else cognate)
                except ValueError as exc:
                    raise LibraryError(f"line {lineno}: {exc}") from exc
            strength = None if attrs.get("strength", "-") == "-" else float(attrs["strength"])
            part = Part(pid, attrs.get("name", pid), kind, props, reg, tier, strength)
            if pid in parts or pid in synthetic:
                raise LibraryError(f"line {lineno}: duplicate part id {pid!r}")
            if "synthetic_hybrid" in props:
                synthetic[pid] = part
            else:
                parts[pid] = part
        elif toks[0] == "hill":
            if len(toks) != 6:
                raise LibraryError(f"line {lineno}: hill needs part-id and 4 numbers")
            try:
                hill[toks[1]] = HillParams(*(float(t) for t in toks[2:]))
            except (ValueError, LibraryError) as exc:
                raise LibraryError(f"line {lineno}: {exc}") from exc
        else:
            raise LibraryError(f"line {lineno}: unknown record {toks[0]!r}")

    pairs = []
    for part in parts.values():
        if (
            part.kind is PartKind.PROMOTER
            and part.regulation is not None
            and part.regulation.mode is RegulationMode.REPRESSIBLE
            and part.regulation.cognate_id
        ):
            pairs.append((part.regulation.cognate_id, part.id))
    return PartsLibrary(parts=parts, cognate_pairs=tuple(sorted(pairs)), synthetic=synthetic, hill=hill)


def load_parts_library(source: str | Path = "builtin") -> PartsLibrary:
    """Load the builtin catalog or a parts file in the documented format."""
    if str(source) == "builtin":
        return builtin_library()
    path = Path(source)
    return parse_parts_file(path.read_text(encoding="utf-8"))
