"""Simulated-annealing gate assignment (technology mapping).

Each non-sensor topology node gets one biological gate (a Hill response) from
the library, injectively. The objective is the worst-case ON/OFF separation
at the output: min(ON rows) / max(OFF rows), maximized. Moves either swap the
gates of two nodes or replace one node's gate with an unused one; degradations
are accepted with probability exp(-delta/T) on the log-objective scale, with a
geometric cooling schedule.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

from .library import HillParams
from .logic import GateTopology, OFF_RPU, ON_RPU, propagate_signals
from .rng import Rng

DEFAULT_SENSOR_LEVELS = (0.01, 3.0)  # RPU when a sensor input is OFF / ON


class AnnealError(Exception):
    pass


class CapacityError(AnnealError):
    pass


@dataclass(frozen=True)
class AnnealSchedule:
    t0: float = 1.0
    beta: float = 0.995
    iters: int = 2000
    seed: int = 0

    def __post_init__(self):
        if self.t0 <= 0:
            raise AnnealError(f"t0 must be positive, got {self.t0}")
        if not (0 < self.beta < 1):
            raise AnnealError(f"beta must lie in (0, 1), got {self.beta}")
        if self.iters < 1:
            raise AnnealError(f"iters must be >= 1, got {self.iters}")


@dataclass(frozen=True)
class AssignmentScore:
    min_on: float
    max_off: float
    objective: float
    margins_ok: bool  # every ON row > 0.5 RPU and every OFF row < 0.1 RPU


@dataclass(frozen=True)
class AnnealResult:
    assignment: dict[str, str]
    score: AssignmentScore
    success: bool
    trace: tuple[float, ...]  # best-seen objective per iteration
    evaluations: int


def score_assignment(
    topology: GateTopology,
    assignment: dict[str, str],
    gate_bank: dict[str, HillParams],
    truth_table: dict[tuple[int, ...], int],
    sensor_levels: tuple[float, float] = DEFAULT_SENSOR_LEVELS,
) -> AssignmentScore:
    nodes = [g.id for g in topology.gates]
    for node in nodes:
        if node not in assignment:
            raise AnnealError(f"node {node} has no gate assigned")
        if assignment[node] not in gate_bank:
            raise AnnealError(f"assigned gate {assignment[node]!r} missing from the bank")

    params = {node: gate_bank[assignment[node]] for node in nodes}
    sensor_ids = [s.id for s in topology.sensors]
    out = topology.output.id
    off_rpu, on_rpu = sensor_levels

    min_on = math.inf
    max_off = 0.0
    for bits, label in truth_table.items():
        sensors = {sid: (on_rpu if b else off_rpu) for sid, b in zip(sensor_ids, bits)}
        result = propagate_signals(topology, params, sensors)
        if not result.converged:
            raise AnnealError(f"propagation did not converge for input {bits}")
        level = result.state[out]
        if label:
            min_on = min(min_on, level)
        else:
            max_off = max(max_off, level)

    if max_off == 0.0:
        objective = math.inf
    elif math.isinf(min_on):
        objective = 0.0
    else:
        objective = min_on / max_off
    margins_ok = (math.isinf(min_on) or min_on > ON_RPU) and max_off < OFF_RPU
    return AssignmentScore(min_on=min_on, max_off=max_off, objective=objective, margins_ok=margins_ok)


def assign_gates(
    topology: GateTopology,
    gate_bank: dict[str, HillParams],
    truth_table: dict[tuple[int, ...], int],
    schedule: AnnealSchedule = AnnealSchedule(),
    sensor_levels: tuple[float, float] = DEFAULT_SENSOR_LEVELS,
) -> AnnealResult:
    nodes = sorted(g.id for g in topology.gates)
    gate_ids = sorted(gate_bank)
    if len(gate_ids) < len(nodes):
        raise CapacityError(
            f"gate library has {len(gate_ids)} gates for {len(nodes)} nodes"
        )

    rng = Rng(schedule.seed)
    cache: dict[tuple[str, ...], AssignmentScore] = {}
    evaluations = 0

    def score_of(assign: dict[str, str]) -> AssignmentScore:
        nonlocal evaluations
        key = tuple(assign[n] for n in nodes)
        if key not in cache:
            cache[key] = score_assignment(topology, assign, gate_bank, truth_table, sensor_levels)
            evaluations += 1
        return cache[key]

    current = dict(zip(nodes, rng.sample(gate_ids, len(nodes))))
    current_score = score_of(current)
    best, best_score = dict(current), current_score

    trace: list[float] = []
    temp = schedule.t0
    for _ in range(schedule.iters):
        proposal = dict(current)
        unused = [g for g in gate_ids if g not in proposal.values()]
        can_swap = len(nodes) >= 2
        if unused and (not can_swap or rng.random() < 0.5):
            node = rng.choice(nodes)
            proposal[node] = rng.choice(unused)
        elif can_swap:
            a, b = rng.sample(nodes, 2)
            proposal[a], proposal[b] = proposal[b], proposal[a]
        prop_score = score_of(proposal)

        accept = prop_score.objective >= current_score.objective
        if not accept:
            delta = _log_obj(current_score.objective) - _log_obj(prop_score.objective)
            accept = rng.random() < math.exp(-delta / temp)
        if accept:
            current, current_score = proposal, prop_score
            if current_score.objective > best_score.objective:
                best, best_score = dict(current), current_score
        trace.append(best_score.objective)
        temp *= schedule.beta

    return AnnealResult(
        assignment=best,
        score=best_score,
        success=best_score.margins_ok,
        trace=tuple(trace),
        evaluations=evaluations,
    )


def _log_obj(objective: float) -> float:
    if objective <= 0:
        return -50.0
    if math.isinf(objective):
        return 50.0
    return math.log(objective)


def exhaustive_best(
    topology: GateTopology,
    gate_bank: dict[str, HillParams],
    truth_table: dict[tuple[int, ...], int],
    sensor_levels: tuple[float, float] = DEFAULT_SENSOR_LEVELS,
) -> tuple[dict[str, str], AssignmentScore]:
    """Brute-force oracle over every injective assignment (small instances)."""
    nodes = sorted(g.id for g in topology.gates)
    gate_ids = sorted(gate_bank)
    if len(gate_ids) < len(nodes):
        raise CapacityError(
            f"gate library has {len(gate_ids)} gates for {len(nodes)} nodes"
        )
    best: tuple[dict[str, str], AssignmentScore] | None = None
    for combo in itertools.permutations(gate_ids, len(nodes)):
        assign = dict(zip(nodes, combo))
        score = score_assignment(topology, assign, gate_bank, truth_table, sensor_levels)
        if best is None or score.objective > best[1].objective:
            best = (assign, score)
    assert best is not None
    return best
