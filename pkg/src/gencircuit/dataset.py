"""Deduplication and dataset assembly.

Duplicates are filtered in two stages: a role-level fingerprint bucket, then
VF2 isomorphism inside the bucket. Dataset builds deduplicate part-aware (so
part-swapped variants survive) and assign whole role-isomorphism groups to a
single split, which is what makes cross-split leakage at the topology level
impossible by construction.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .circuit_types import CircuitSpec, CircuitType, emit_ground_truth, parse_ground_truth
from .generate import GATE_SUBTYPES, GenParams, GenerationError, generate_circuit, _sample_function
from .graphs import IsoMode, RegGraph, extract_regulatory_graph, fingerprint, isomorphic
from .library import PartsLibrary
from .model import serialize_document
from .rng import Rng, mix
from .synth import BudgetError, DegenerateFunctionError
from .anneal import CapacityError

COMPLEXITY_CLASSES = ("minimal", "simple", "moderate", "cascaded", "feedback")

DEFAULT_CLASS_MIX = {
    "minimal": 0.10,
    "simple": 0.15,
    "moderate": 0.30,
    "cascaded": 0.20,
    "feedback": 0.25,
}
DEFAULT_SPLIT = {"train": 0.80, "val": 0.10, "test": 0.10}

CLASS_OF_TYPE = {
    CircuitType.CASSETTE: "minimal",
    CircuitType.NOT_GATE: "simple",
    CircuitType.TWO_INPUT_GATE: "moderate",
    CircuitType.FFL: "moderate",
    CircuitType.BRANCHED: "moderate",
    CircuitType.CASCADE: "cascaded",
    CircuitType.TOGGLE: "feedback",
    CircuitType.OSCILLATOR: "feedback",
}


class DatasetError(Exception):
    pass


@dataclass(frozen=True)
class DatasetConfig:
    total: int = 1000
    class_mix: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_CLASS_MIX))
    split: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_SPLIT))
    classes: tuple[str, ...] = COMPLEXITY_CLASSES  # restrict for ablated builds

    def __post_init__(self):
        if self.total < 1:
            raise DatasetError("total must be positive")
        mix_sum = sum(self.class_mix.get(c, 0.0) for c in self.classes)
        if abs(mix_sum - 1.0) > 1e-9 and len(self.classes) == len(COMPLEXITY_CLASSES):
            raise DatasetError(f"class mix must sum to 1, got {mix_sum}")
        if abs(sum(self.split.values()) - 1.0) > 1e-9:
            raise DatasetError(f"split fractions must sum to 1, got {sum(self.split.values())}")


# --- deduplication --------------------------------------------------------------------


@dataclass(frozen=True)
class DedupResult:
    kept: list[CircuitSpec]
    kept_indices: list[int]
    removed_pairs: list[tuple[int, int]]   # (removed index, kept index)


def deduplicate(circuits: list[CircuitSpec], mode: IsoMode) -> DedupResult:
    """Retain the first occurrence of each isomorphism class.

    Stage 1 buckets by role-level fingerprint (sound for both modes since
    part-aware isomorphism implies role-labeled isomorphism); stage 2 runs
    VF2 within the bucket.
    """
    kept: list[CircuitSpec] = []
    kept_indices: list[int] = []
    removed: list[tuple[int, int]] = []
    buckets: dict[int, list[tuple[int, RegGraph]]] = {}
    for idx, spec in enumerate(circuits):
        fp = fingerprint(spec.document)
        graph = extract_regulatory_graph(spec.document)
        keeper = None
        for kidx, kgraph in buckets.get(fp, []):
            if isomorphic(graph, kgraph, mode):
                keeper = kidx
                break
        if keeper is None:
            buckets.setdefault(fp, []).append((idx, graph))
            kept.append(spec)
            kept_indices.append(idx)
        else:
            removed.append((idx, keeper))
    return DedupResult(kept=kept, kept_indices=kept_indices, removed_pairs=removed)


# --- dataset build --------------------------------------------------------------------


@dataclass
class Dataset:
    specs: list[CircuitSpec]
    splits: dict[str, list[int]]           # split name -> indices into specs
    seeds: list[int]                       # per-circuit generation seeds
    shortfalls: dict[str, int]
    config: DatasetConfig
    seed: int

    def manifest(self) -> str:
        lines = ["gencircuit-manifest v1", f"seed {self.seed}", f"total {len(self.specs)}"]
        per_class: dict[str, int] = {}
        per_type: dict[str, int] = {}
        kappa_hist: dict[str, int] = {}
        for spec in self.specs:
            cls = CLASS_OF_TYPE[spec.circuit_type]
            per_class[cls] = per_class.get(cls, 0) + 1
            per_type[spec.circuit_type.value] = per_type.get(spec.circuit_type.value, 0) + 1
            key = ",".join(str(x) for x in spec.kappa.as_tuple())
            kappa_hist[key] = kappa_hist.get(key, 0) + 1
        for cls in COMPLEXITY_CLASSES:
            if cls in per_class:
                lines.append(f"class {cls} {per_class[cls]}")
        for t in sorted(per_type):
            lines.append(f"type {t} {per_type[t]}")
        for k in sorted(kappa_hist):
            lines.append(f"kappa_count {k} {kappa_hist[k]}")
        for name in sorted(self.splits):
            lines.append(f"split_size {name} {len(self.splits[name])}")
        for name in sorted(self.splits):
            for idx in self.splits[name]:
                lines.append(f"split {name} circuit_{idx:04d}")
        for idx, (spec, s) in enumerate(zip(self.specs, self.seeds)):
            lines.append(f"circuit circuit_{idx:04d} {spec.circuit_type.value} seed={s}")
        for cls in sorted(self.shortfalls):
            lines.append(f"shortfall {cls} {self.shortfalls[cls]}")
        return "\n".join(lines) + "\n"


def _largest_remainder(total: int, fractions: dict[str, float], keys: list[str]) -> dict[str, int]:
    raw = {k: total * fractions.get(k, 0.0) for k in keys}
    counts = {k: int(raw[k]) for k in keys}
    rem = total - sum(counts.values())
    by_frac = sorted(keys, key=lambda k: (-(raw[k] - counts[k]), k))
    for k in by_frac[:rem]:
        counts[k] += 1
    return counts


def _class_params(cls: str, rng: Rng, seed: int) -> GenParams:
    if cls == "minimal":
        return GenParams(CircuitType.CASSETTE, seed)
    if cls == "simple":
        return GenParams(CircuitType.NOT_GATE, seed)
    if cls == "moderate":
        kind = rng.choice(["gate", "gate", "gate", "gate", "ffl", "ffl", "branched"])
        if kind == "gate":
            return GenParams(CircuitType.TWO_INPUT_GATE, seed, gate_type=rng.choice(GATE_SUBTYPES))
        if kind == "ffl":
            return GenParams(CircuitType.FFL, seed, ffl_type=rng.choice(["C1", "I1"]))
        return GenParams(CircuitType.BRANCHED, seed)
    if cls == "cascaded":
        k = rng.weighted_choice([2, 3, 4], [0.6, 0.3, 0.1])
        return GenParams(CircuitType.CASCADE, seed, function=_sample_function(rng, k))
    if cls == "feedback":
        kind = rng.choice(["toggle", "osc3", "osc5"])
        if kind == "toggle":
            return GenParams(CircuitType.TOGGLE, seed)
        return GenParams(CircuitType.OSCILLATOR, seed, cycle_length=3 if kind == "osc3" else 5)
    raise DatasetError(f"unknown complexity class {cls!r}")


def _gen_attempt(args: tuple[str, int, PartsLibrary]) -> CircuitSpec | None:
    """Worker: one generation attempt (class, attempt seed). None on rejection."""
    cls, seed, library = args
    params = _class_params(cls, Rng(mix(seed, 0x1DEA)), seed)
    try:
        return generate_circuit(params, library)
    except (BudgetError, DegenerateFunctionError, CapacityError, GenerationError):
        return None


def _part_key(graph: RegGraph) -> str:
    nodes = sorted(f"{n.role.value}:{'/'.join(n.label)}" for n in graph.nodes)
    labels = {n.id: f"{n.role.value}:{'/'.join(n.label)}" for n in graph.nodes}
    edges = sorted(f"{labels[e.src]}->{labels[e.dst]}:{e.polarity.symbol}" for e in graph.edges)
    return "|".join(nodes) + "||" + "|".join(edges)


def build_dataset(
    config: DatasetConfig, library: PartsLibrary, seed: int, jobs: int = 1
) -> Dataset:
    """Generate a class-balanced, part-aware-deduplicated dataset and assign
    role-isomorphism groups atomically to train/val/test."""
    counts = _largest_remainder(
        config.total,
        {c: config.class_mix.get(c, 0.0) for c in config.classes},
        list(config.classes),
    )
    if len(config.classes) < len(COMPLEXITY_CLASSES):
        # restricted builds put everything in the listed classes, renormalized
        total_frac = sum(config.class_mix.get(c, 0.0) for c in config.classes)
        if total_frac <= 0:
            counts = _largest_remainder(
                config.total, {c: 1.0 / len(config.classes) for c in config.classes},
                list(config.classes),
            )
        else:
            counts = _largest_remainder(
                config.total,
                {c: config.class_mix.get(c, 0.0) / total_frac for c in config.classes},
                list(config.classes),
            )

    specs: list[CircuitSpec] = []
    seeds: list[int] = []
    shortfalls: dict[str, int] = {}
    seen_part_keys: dict[str, int] = {}

    attempt_counter = 0
    for cls in config.classes:
        want = counts[cls]
        got = 0
        attempts = 0
        max_attempts = 60 * want + 60
        while got < want and attempts < max_attempts:
            batch = min(max(want - got, 1) * 2, max_attempts - attempts)
            attempt_seeds = [mix(seed, attempt_counter + i) for i in range(batch)]
            attempt_counter += batch
            attempts += batch
            args = [(cls, s, library) for s in attempt_seeds]
            if jobs > 1:
                with ProcessPoolExecutor(max_workers=jobs) as pool:
                    results = list(pool.map(_gen_attempt, args))
            else:
                results = [_gen_attempt(a) for a in args]
            for s, spec in zip(attempt_seeds, results):
                if got >= want or spec is None:
                    continue
                graph = extract_regulatory_graph(spec.document)
                key = _part_key(graph)
                if key in seen_part_keys:
                    continue
                seen_part_keys[key] = len(specs)
                specs.append(spec)
                seeds.append(s)
                got += 1
        if got < want:
            shortfalls[cls] = want - got

    splits = _assign_splits(specs, config.split)
    return Dataset(
        specs=specs, splits=splits, seeds=seeds,
        shortfalls=shortfalls, config=config, seed=seed,
    )


def _assign_splits(specs: list[CircuitSpec], split_fracs: dict[str, float]) -> dict[str, list[int]]:
    """Group circuits by role-labeled isomorphism, then assign whole groups to
    splits greedily against the target fractions."""
    groups: list[list[int]] = []
    buckets: dict[int, list[tuple[int, RegGraph]]] = {}
    group_of: dict[int, int] = {}
    for idx, spec in enumerate(specs):
        graph = extract_regulatory_graph(spec.document)
        fp = fingerprint(spec.document)
        assigned = None
        for ridx, rgraph in buckets.get(fp, []):
            if isomorphic(graph, rgraph, IsoMode.ROLE_LABELED):
                assigned = group_of[ridx]
                break
        if assigned is None:
            groups.append([idx])
            buckets.setdefault(fp, []).append((idx, graph))
            group_of[idx] = len(groups) - 1
        else:
            groups[assigned].append(idx)

    names = sorted(split_fracs)
    total = len(specs)
    targets = {name: split_fracs[name] * total for name in names}
    filled = {name: 0 for name in names}
    splits: dict[str, list[int]] = {name: [] for name in names}
    for group in sorted(groups, key=lambda g: (-len(g), g[0])):
        name = max(names, key=lambda n: (targets[n] - filled[n], n))
        splits[name].extend(group)
        filled[name] += len(group)
    for name in names:
        splits[name].sort()
    return splits


# --- disk layout ----------------------------------------------------------------------


def write_dataset(dataset: Dataset, out_dir: str | Path) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for idx, spec in enumerate(dataset.specs):
        stem = f"circuit_{idx:04d}"
        (out / f"{stem}.doc").write_bytes(serialize_document(spec.document))
        (out / f"{stem}.script").write_text(spec.script, encoding="utf-8")
        (out / f"{stem}.truth").write_text(emit_ground_truth(spec), encoding="utf-8")
    (out / "manifest.txt").write_text(dataset.manifest(), encoding="utf-8")


def load_circuit(path_stem: str | Path) -> CircuitSpec:
    """Rehydrate a CircuitSpec from its .doc/.script/.truth files."""
    from .model import deserialize_document

    stem = Path(path_stem)
    doc = deserialize_document(stem.with_suffix(".doc").read_bytes())
    script = stem.with_suffix(".script").read_text(encoding="utf-8")
    ctype, kappa, gt, description, provenance = parse_ground_truth(
        stem.with_suffix(".truth").read_text(encoding="utf-8")
    )
    return CircuitSpec(
        circuit_type=ctype,
        document=doc,
        script=script,
        ground_truth=gt,
        description=description,
        kappa=kappa,
        provenance=provenance,
    )
