"""NOR-network synthesis from truth tables.

Functions of up to 3 inputs go through bounded exhaustive search (iterative
deepening over gate count with memoization on the set of reachable functions),
so the returned network is gate-count minimal within the budget. Four-input
functions use greedy Shannon factorization with hash-consing; best-found, not
necessarily minimal.

Signals are bitmasks over the 2^k truth-table rows; row index i encodes the
input vector as big-endian bits of i.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .logic import GateNode, GateTopology, eval_gate_topology

MAX_FAN_IN = 3
DEFAULT_GATE_BUDGET = 8


class SynthesisError(Exception):
    pass


class DegenerateFunctionError(SynthesisError):
    pass


class BudgetError(SynthesisError):
    pass


def table_to_mask(table: dict[tuple[int, ...], int]) -> tuple[int, int]:
    """(mask, num_inputs) for a complete truth table keyed by bit vectors."""
    if not table:
        raise SynthesisError("empty truth table")
    k = len(next(iter(table)))
    # 1-input tables (NOT, buffer) are the base cases; 4 is the ceiling
    if not (1 <= k <= 4):
        raise SynthesisError(f"supported input arity is 1..4, got {k}")
    if len(table) != (1 << k):
        raise SynthesisError(f"truth table must cover all {1 << k} rows")
    mask = 0
    for bits, out in table.items():
        if len(bits) != k:
            raise SynthesisError("inconsistent input arity in truth table")
        idx = 0
        for b in bits:
            idx = (idx << 1) | (1 if b else 0)
        if out:
            mask |= 1 << idx
    return mask, k


def input_masks(k: int) -> list[int]:
    masks = []
    rows = 1 << k
    for j in range(k):
        m = 0
        for i in range(rows):
            if (i >> (k - 1 - j)) & 1:
                m |= 1 << i
        masks.append(m)
    return masks


def is_degenerate(mask: int, k: int) -> bool:
    """Constant functions or functions insensitive to some input."""
    rows = 1 << k
    full = (1 << rows) - 1
    if mask == 0 or mask == full:
        return True
    for j in range(k):
        w = 1 << (k - 1 - j)
        sensitive = False
        for i in range(rows):
            if not (i & w) and ((mask >> i) & 1) != ((mask >> (i | w)) & 1):
                sensitive = True
                break
        if not sensitive:
            return True
    return False


def _nor(funcs: tuple[int, ...], full: int) -> int:
    acc = 0
    for m in funcs:
        acc |= m
    return full & ~acc


@dataclass(frozen=True)
class _Gate:
    operands: tuple[int, ...]  # indices into the signal list (inputs come first)
    func: int


def synthesize_nor_network(
    table: dict[tuple[int, ...], int], max_gates: int = DEFAULT_GATE_BUDGET
) -> GateTopology:
    """NOR/NOT DAG computing `table` (NOT = 1-input NOR).

    Raises DegenerateFunctionError for constant or input-insensitive tables
    and BudgetError when no network fits within `max_gates`.
    """
    target, k = table_to_mask(table)
    if is_degenerate(target, k):
        raise DegenerateFunctionError(
            "function is constant or does not depend on every input"
        )
    gates = _synthesize_gates(target, k, max_gates)
    if gates is None:
        raise BudgetError(f"no NOR network with <= {max_gates} gates found")
    topo = _gates_to_topology(list(gates), k)
    _self_check(topo, table)
    return topo


@lru_cache(maxsize=4096)
def _synthesize_gates(target: int, k: int, max_gates: int) -> tuple[_Gate, ...] | None:
    full = (1 << (1 << k)) - 1
    base = input_masks(k)
    if k <= 3:
        gates = _exact_search(target, base, full, max_gates)
    else:
        gates = _greedy_shannon(target, base, full, max_gates)
    return tuple(gates) if gates is not None else None


def _candidates(
    signals: list[int], full: int, target: int
) -> list[tuple[tuple[int, ...], int]]:
    """All NOR gates over current signals that compute a new function.

    A gate computing `target` is kept even when target is already among the
    signals: when the target equals an input (buffer), the output gate has to
    recompute it."""
    known = set(signals)
    out = []
    n = len(signals)
    for a in range(n):
        f = full & ~signals[a]
        if f not in known or f == target:
            out.append(((a,), f))
    for a in range(n):
        for b in range(a + 1, n):
            f = full & ~(signals[a] | signals[b])
            if f not in known or f == target:
                out.append(((a, b), f))
    for a in range(n):
        for b in range(a + 1, n):
            ab = signals[a] | signals[b]
            for c in range(b + 1, n):
                f = full & ~(ab | signals[c])
                if f not in known or f == target:
                    out.append(((a, b, c), f))
    return out


def _exact_search(
    target: int, base: list[int], full: int, max_gates: int
) -> list[_Gate] | None:
    """Iterative deepening on gate count; memo keyed by reachable function sets.

    Gates computing already-available functions are pruned (a minimal network
    never duplicates a function), which also collapses gate-order symmetry in
    the memo. Failure entries persist across deepening rounds because DFS
    outcomes depend only on the signal set and the remaining budget."""
    failed: dict[frozenset[int], int] = {}

    def dfs(signals: list[int], gates: list[_Gate], left: int) -> list[_Gate] | None:
        key = frozenset(signals)
        if failed.get(key, -1) >= left:
            return None
        cands = _candidates(signals, full, target)
        for ops, f in cands:
            if f == target:
                return list(gates) + [_Gate(ops, f)]
        if left > 1:
            for ops, f in cands:
                signals.append(f)
                gates.append(_Gate(ops, f))
                found = dfs(signals, gates, left - 1)
                gates.pop()
                signals.pop()
                if found is not None:
                    return found
        failed[key] = max(failed.get(key, -1), left)
        return None

    for limit in range(1, max_gates + 1):
        result = dfs(list(base), [], limit)
        if result is not None:
            return result
    return None


def _cofactor(mask: int, k: int, j: int, value: int) -> int:
    """Function restricted to input j = value, expressed on the same domain."""
    rows = 1 << k
    w = 1 << (k - 1 - j)
    out = 0
    for i in range(rows):
        src = (i | w) if value else (i & ~w)
        if (mask >> src) & 1:
            out |= 1 << i
    return out


def _greedy_shannon(
    target: int, base: list[int], full: int, max_gates: int
) -> list[_Gate] | None:
    """Shannon expansion f = (~x & f0) | (x & f1), compiled to NOR gates with
    hash-consing on function masks and constant simplification."""
    k = len(base)
    signals: list[int] = list(base)
    gates: list[_Gate] = []
    by_func: dict[int, int] = {f: i for i, f in enumerate(base)}

    def emit(operands: tuple[int, ...]) -> int:
        f = _nor(tuple(signals[i] for i in operands), full)
        if f in by_func:
            return by_func[f]
        gates.append(_Gate(operands, f))
        signals.append(f)
        by_func[f] = len(signals) - 1
        return by_func[f]

    def mk_not(i: int) -> int:
        return emit((i,))

    def mk_or(i: int, j: int) -> int:
        return mk_not(emit((i, j)))

    def mk_and(i: int, j: int) -> int:
        return emit((mk_not(i), mk_not(j)))

    def build(mask: int, var: int) -> int | None:
        if mask in by_func:
            return by_func[mask]
        neg = full & ~mask
        if neg in by_func:
            return mk_not(by_func[neg])
        if var >= k:
            return None
        f0 = _cofactor(mask, k, var, 0)
        f1 = _cofactor(mask, k, var, 1)
        if f0 == f1:
            return build(f0, var + 1)
        left = None
        if f0 == full:
            left = mk_not(var)
        elif f0 != 0:
            i0 = build(f0, var + 1)
            if i0 is None:
                return None
            left = mk_and(mk_not(var), i0)
        right = None
        if f1 == full:
            right = var
        elif f1 != 0:
            i1 = build(f1, var + 1)
            if i1 is None:
                return None
            right = mk_and(var, i1)
        if left is None:
            return right
        if right is None:
            return left
        return mk_or(left, right)

    idx = build(target, 0)
    if idx is None or signals[idx] != target:
        return None
    pruned = _prune_unused(gates, idx, k)
    if pruned is None or len(pruned) > max_gates:
        return None
    return pruned


def _prune_unused(gates: list[_Gate], out_idx: int, k: int) -> list[_Gate] | None:
    """Drop gates that do not feed the output, reindexing operands."""
    if out_idx < k:
        return None  # target collapsed to a bare input: degenerate, rejected upstream
    needed: set[int] = set()
    stack = [out_idx]
    while stack:
        i = stack.pop()
        if i < k or i in needed:
            continue
        needed.add(i)
        stack.extend(gates[i - k].operands)
    keep = sorted(needed)
    remap = {j: j for j in range(k)}
    remap.update({old: k + pos for pos, old in enumerate(keep)})
    return [
        _Gate(tuple(remap[o] for o in gates[old - k].operands), gates[old - k].func)
        for old in keep
    ]


def _gates_to_topology(gates: list[_Gate], k: int) -> GateTopology:
    names = [f"x{j}" for j in range(k)] + [f"g{i + 1}" for i in range(len(gates))]
    nodes = [GateNode(names[j], (), is_sensor=True) for j in range(k)]
    for i, gate in enumerate(gates):
        nodes.append(
            GateNode(
                names[k + i],
                tuple(names[o] for o in gate.operands),
                is_sensor=False,
                is_output=(i == len(gates) - 1),
            )
        )
    return GateTopology(tuple(nodes))


def _self_check(topo: GateTopology, table: dict[tuple[int, ...], int]) -> None:
    sensors = [s.id for s in topo.sensors]
    out = topo.output.id
    for bits, expected in table.items():
        got = eval_gate_topology(topo, dict(zip(sensors, bits)))[out]
        if got != expected:
            raise SynthesisError(f"synthesized network disagrees with table at {bits}")


def all_tables(k: int) -> list[dict[tuple[int, ...], int]]:
    """Every non-degenerate truth table of k inputs (enumeration helper)."""
    rows = 1 << k
    vectors = [tuple((i >> (k - 1 - j)) & 1 for j in range(k)) for i in range(rows)]
    out = []
    for mask in range(1 << rows):
        if is_degenerate(mask, k):
            continue
        out.append({vectors[i]: (mask >> i) & 1 for i in range(rows)})
    return out
