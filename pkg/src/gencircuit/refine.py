"""Pool-based quantitative refinement with a pluggable scorer.

Each iteration scores the pool, keeps the top elite fraction, and rebuilds
the pool from elites, their mutants (each category resampled independently
with the mutation rate) and a fresh random fraction. The shipped scorer is an
MLP surrogate over one-hot composition vectors feeding a composite reward;
its weights are synthetic (seeded random), so only the dynamics of the loop
are meaningful, not absolute scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .rng import Rng

# 10 part-category slots, one-hot widths summing to 34
CATEGORY_WIDTHS = (4, 4, 4, 4, 4, 3, 2, 3, 3, 3)
CATEGORY_NAMES = (
    "promoter", "activation_domain", "idp_domain", "zinc_finger", "terminator",
    "spacer1", "orientation", "binding_sites", "core_promoter", "spacer2",
)
INPUT_WIDTH = sum(CATEGORY_WIDTHS)
MLP_LAYER_SIZES = (INPUT_WIDTH, 160, 80, 40, 20, 2)

Composition = tuple[int, ...]


class RefineError(Exception):
    pass


def validate_composition(comp: Sequence[int], widths: Sequence[int] = CATEGORY_WIDTHS) -> Composition:
    if len(comp) != len(widths):
        raise RefineError(f"composition needs {len(widths)} categories, got {len(comp)}")
    for i, (choice, width) in enumerate(zip(comp, widths)):
        if not (0 <= choice < width):
            raise RefineError(f"category {i} choice {choice} outside [0, {width})")
    return tuple(comp)


def one_hot(comp: Sequence[int], widths: Sequence[int] = CATEGORY_WIDTHS) -> np.ndarray:
    comp = validate_composition(comp, widths)
    x = np.zeros(sum(widths), dtype=np.float64)
    offset = 0
    for choice, width in zip(comp, widths):
        x[offset + choice] = 1.0
        offset += width
    return x


@dataclass(frozen=True)
class SurrogateWeights:
    """Dense layers 34->160->80->40->20->2 with tanh between, linear output."""

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]

    def __post_init__(self):
        sizes = MLP_LAYER_SIZES
        if len(self.layers) != len(sizes) - 1:
            raise RefineError(f"expected {len(sizes) - 1} layers, got {len(self.layers)}")
        for i, (w, b) in enumerate(self.layers):
            want = (sizes[i], sizes[i + 1])
            if w.shape != want or b.shape != (sizes[i + 1],):
                raise RefineError(
                    f"layer {i} shape {w.shape}/{b.shape}, expected {want}/({sizes[i + 1]},)"
                )


def random_weights(seed: int) -> SurrogateWeights:
    gen = np.random.default_rng(seed)
    layers = []
    sizes = MLP_LAYER_SIZES
    for i in range(len(sizes) - 1):
        scale = math.sqrt(2.0 / (sizes[i] + sizes[i + 1]))
        w = gen.normal(0.0, scale, size=(sizes[i], sizes[i + 1]))
        b = gen.normal(0.0, 0.1, size=(sizes[i + 1],))
        layers.append((w, b))
    return SurrogateWeights(layers=tuple(layers))


def mlp_forward(weights: SurrogateWeights, x: np.ndarray) -> tuple[float, float]:
    if x.shape != (INPUT_WIDTH,):
        raise RefineError(f"input must have shape ({INPUT_WIDTH},), got {x.shape}")
    h = x
    for w, b in weights.layers[:-1]:
        h = np.tanh(h @ w + b)
    w, b = weights.layers[-1]
    out = h @ w + b
    if not np.all(np.isfinite(out)):
        raise RefineError("non-finite MLP output")
    return float(out[0]), float(out[1])


# --- weights file -------------------------------------------------------------

_WEIGHTS_HEADER = "gencircuit-weights v1"


def save_weights(weights: SurrogateWeights, path: str | Path) -> None:
    lines = [_WEIGHTS_HEADER]
    lines.append("# category widths: " + ",".join(str(w) for w in CATEGORY_WIDTHS))
    for w, b in weights.layers:
        lines.append(f"layer {w.shape[0]} {w.shape[1]}")
        for row in w:
            lines.append(" ".join(f"{v:.17g}" for v in row))
        lines.append(" ".join(f"{v:.17g}" for v in b))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_weights(path: str | Path) -> SurrogateWeights:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != _WEIGHTS_HEADER:
        raise RefineError(f"missing header {_WEIGHTS_HEADER!r}")
    layers = []
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        if not line or line.startswith("#"):
            i += 1
            continue
        toks = line.split()
        if toks[0] != "layer" or len(toks) != 3:
            raise RefineError(f"line {i + 1}: expected layer record, got {line!r}")
        n_in, n_out = int(toks[1]), int(toks[2])
        rows = []
        for r in range(n_in):
            rows.append([float(v) for v in lines[i + 1 + r].split()])
        bias = [float(v) for v in lines[i + 1 + n_in].split()]
        layers.append((np.array(rows, dtype=np.float64), np.array(bias, dtype=np.float64)))
        i += 2 + n_in
    return SurrogateWeights(layers=tuple(layers))


# --- composite reward ----------------------------------------------------------


@dataclass(frozen=True)
class RewardThresholds:
    fc_target: float = 25.0         # high-fold-change threshold
    sigmoid_scale: float | None = None  # defaults to fc_target / 5
    basal_scale: float = 0.1

    @property
    def scale(self) -> float:
        return self.sigmoid_scale if self.sigmoid_scale is not None else self.fc_target / 5.0


def composite_reward(
    pred: tuple[float, float],
    thresholds: RewardThresholds = RewardThresholds(),
    r_topo: float = 1.0,
) -> float:
    """0.3 * r_topo + 0.5 * r_fc + 0.2 * r_basal.

    r_fc is a sigmoid in fold change centered on the target threshold;
    r_basal decays with basal expression (leaky circuits score low).
    """
    basal, induced = pred
    if basal <= 0:
        raise RefineError(f"basal expression must be positive, got {basal}")
    if not (0.0 <= r_topo <= 1.0):
        raise RefineError(f"r_topo must lie in [0, 1], got {r_topo}")
    fc = induced / basal
    r_fc = 1.0 / (1.0 + math.exp(-(fc - thresholds.fc_target) / thresholds.scale))
    r_basal = 1.0 / (1.0 + basal / thresholds.basal_scale)
    return 0.3 * r_topo + 0.5 * r_fc + 0.2 * r_basal


def surrogate_scorer(
    weights: SurrogateWeights,
    thresholds: RewardThresholds = RewardThresholds(),
    widths: Sequence[int] = CATEGORY_WIDTHS,
) -> Callable[[Composition], float]:
    """Scorer mapping compositions to composite rewards via the surrogate.

    Raw MLP outputs are mapped to strictly positive expression levels with
    basal = exp(o1) and fold change = exp(3 * o2); synthetic by construction.
    """

    def score(comp: Composition) -> float:
        o1, o2 = mlp_forward(weights, one_hot(comp, widths))
        basal = math.exp(o1)
        induced = basal * math.exp(3.0 * o2)
        return composite_reward((basal, induced), thresholds)

    return score


# --- pool loop -------------------------------------------------------------------


@dataclass(frozen=True)
class RefineConfig:
    pool_size: int = 2000
    elite_frac: float = 0.15
    mutation_rate: float = 0.3
    fresh_frac: float = 0.10
    iterations: int = 8
    seed: int = 0

    def __post_init__(self):
        for name in ("elite_frac", "mutation_rate", "fresh_frac"):
            v = getattr(self, name)
            if not (0.0 <= v < 1.0):
                raise RefineError(f"{name} must lie in [0, 1), got {v}")
        if self.pool_size < 1 or self.iterations < 1:
            raise RefineError("pool_size and iterations must be positive")
        if int(self.pool_size * self.elite_frac) < 1:
            raise RefineError("elite_frac * pool_size must be at least 1")


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    mean_score: float
    elite_mean: float
    best_score: float        # best-so-far across all iterations
    best: Composition


def refine_pool(
    config: RefineConfig,
    scorer: Callable[[Composition], float],
    widths: Sequence[int] = CATEGORY_WIDTHS,
) -> list[IterationStats]:
    rng = Rng(config.seed)
    widths = tuple(widths)

    def random_comp() -> Composition:
        return tuple(rng.randint(0, w - 1) for w in widths)

    def mutate(comp: Composition) -> Composition:
        out = list(comp)
        for i, w in enumerate(widths):
            if w > 1 and rng.random() < config.mutation_rate:
                alt = rng.randint(0, w - 2)
                out[i] = alt if alt < out[i] else alt + 1
        return tuple(out)

    n_elite = int(config.pool_size * config.elite_frac)
    n_fresh = int(config.pool_size * config.fresh_frac)

    pool = [random_comp() for _ in range(config.pool_size)]
    best: Composition | None = None
    best_score = -math.inf
    history: list[IterationStats] = []

    for it in range(1, config.iterations + 1):
        scored = sorted(
            ((scorer(c), c) for c in pool), key=lambda sc: (-sc[0], sc[1])
        )
        mean_score = sum(s for s, _ in scored) / len(scored)
        elites = scored[:n_elite]
        elite_mean = sum(s for s, _ in elites) / len(elites)
        if scored[0][0] > best_score:
            best_score, best = scored[0]
        history.append(
            IterationStats(
                iteration=it,
                mean_score=mean_score,
                elite_mean=elite_mean,
                best_score=best_score,
                best=best,
            )
        )
        if it == config.iterations:
            break
        next_pool = [c for _, c in elites]
        next_pool.extend(random_comp() for _ in range(n_fresh))
        i = 0
        while len(next_pool) < config.pool_size:
            next_pool.append(mutate(elites[i % len(elites)][1]))
            i += 1
        pool = next_pool[: config.pool_size]
    return history
