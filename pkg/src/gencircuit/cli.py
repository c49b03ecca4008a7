"""Command-line surface: generate, verify, score, metrics, assign, dedup,
refine, tasks.

Exit codes: 0 success (including scoring runs that award 0), 1 domain error,
2 usage error. Stdout carries machine-parsable structured text; diagnostics
go to stderr. All randomness is controlled by --seed flags.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .anneal import AnnealError, AnnealSchedule, assign_gates
from .circuit_types import CircuitType, expected_counts_for_spec
from .dataset import (
    COMPLEXITY_CLASSES,
    Dataset,
    DatasetConfig,
    DatasetError,
    build_dataset,
    deduplicate,
    load_circuit,
    write_dataset,
)
from .flaws import FlawError
from .generate import GATE_SUBTYPES, GenerationError, GenParams, generate_circuit, self_function_score
from .graphs import GraphError, IsoMode
from .library import HillParams, LibraryError, load_parts_library
from .logic import EvalError, GateNode, GateTopology, full_truth_table
from .model import DocumentError
from .refine import (
    RefineConfig,
    RefineError,
    RewardThresholds,
    load_weights,
    random_weights,
    refine_pool,
    save_weights,
    surrogate_scorer,
)
from .rng import mix
from .script import ParseError
from .synth import SynthesisError
from .tasks import (
    CurriculumState,
    TASK_APPLICABILITY,
    TaskError,
    TaskKind,
    delta_gen,
    make_task,
    pass_at_k,
    total_reward,
    tsr,
)
from .taskio import TaskIOError, emit_task_record, parse_submission, parse_task_record
from .verify import ConfigError, hierarchical_reward

DOMAIN_ERRORS = (
    GenerationError, DatasetError, FlawError, TaskError, TaskIOError,
    LibraryError, DocumentError, EvalError, SynthesisError, AnnealError,
    RefineError, GraphError, ParseError, ConfigError, OSError, ValueError,
)


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    argv, defaults = _extract_config(list(argv))
    parser = _build_parser(defaults)
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _extract_config(argv: list[str]) -> tuple[list[str], dict]:
    """Pop `--config FILE` and read `key value` default lines; explicit flags
    always win over config values."""
    defaults: dict = {}
    if "--config" in argv:
        i = argv.index("--config")
        if i + 1 >= len(argv):
            print("error: --config needs a file argument", file=sys.stderr)
            raise SystemExit(2)
        path = Path(argv[i + 1])
        del argv[i:i + 2]
        for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition(" ")
            if not value:
                raise ValueError(f"{path}:{lineno}: expected `key value`")
            defaults[key.replace("-", "_")] = value
    return argv, defaults


def _build_parser(defaults: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gencircuit",
        description="Genetic-circuit benchmark generation and hierarchical verification",
    )
    parser.add_argument("--version", action="version", version=f"gencircuit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate circuits or a full dataset")
    g.add_argument("--type", choices=[t.value for t in CircuitType])
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--total", type=int, help="dataset mode: total circuits across classes")
    g.add_argument("--classes", nargs="+", choices=COMPLEXITY_CLASSES)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--gate-type", choices=GATE_SUBTYPES)
    g.add_argument("--cycle-length", type=int, choices=[3, 5])
    g.add_argument("--ffl-type", choices=["C1", "I1"])
    g.add_argument("--promoter-class", choices=["constitutive", "inducible"])
    g.add_argument("--library", default="builtin")
    g.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    g.set_defaults(func=_cmd_generate)

    v = sub.add_parser("verify", help="verify a circuit and print the reward breakdown")
    v.add_argument("circuit", help="path stem of circuit files (.doc/.script/.truth)")
    v.add_argument("--library", default="builtin")
    v.add_argument("--stage", type=int, default=4, choices=[1, 2, 3, 4])
    v.set_defaults(func=_cmd_verify)

    s = sub.add_parser("score", help="score a submission against a task record")
    s.add_argument("--task", help="task record file")
    s.add_argument("--submission", help="submission file")
    s.add_argument("--stage", type=int, default=4, choices=[1, 2, 3, 4])
    s.add_argument("--truth-table", action="store_true", help="print a circuit's table and margins")
    s.add_argument("--circuit", help="circuit stem for --truth-table")
    s.add_argument("--library", default="builtin")
    s.set_defaults(func=_cmd_score)

    m = sub.add_parser("metrics", help="TSR / delta_gen over results, or Pass@k")
    m.add_argument("--results", help="file of `result <id> <R> <tau> [group]` lines")
    m.add_argument("--pass-at-k", nargs=3, type=int, metavar=("N", "C", "K"))
    m.set_defaults(func=_cmd_metrics)

    a = sub.add_parser("assign", help="simulated-annealing gate assignment")
    a.add_argument("--topology", required=True)
    a.add_argument("--gates", required=True)
    a.add_argument("--truth-table", required=True)
    a.add_argument("--t0", type=float, default=1.0)
    a.add_argument("--beta", type=float, default=0.995)
    a.add_argument("--iters", type=int, default=2000)
    a.add_argument("--restarts", type=int, default=1)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=_cmd_assign)

    d = sub.add_parser("dedup", help="deduplicate a directory of circuits")
    d.add_argument("--dir", required=True)
    d.add_argument("--mode", choices=[m.value for m in IsoMode], default="role_labeled")
    d.set_defaults(func=_cmd_dedup)

    r = sub.add_parser("refine", help="pool-based quantitative refinement")
    r.add_argument("--pool-size", type=int, default=2000)
    r.add_argument("--elite-frac", type=float, default=0.15)
    r.add_argument("--mutation-rate", type=float, default=0.3)
    r.add_argument("--fresh-frac", type=float, default=0.10)
    r.add_argument("--iterations", type=int, default=8)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--fc-target", type=float, default=25.0)
    r.add_argument("--weights", help="surrogate weights file (default: seeded random)")
    r.add_argument("--weights-seed", type=int, default=0)
    r.add_argument("--save-weights", help="write the surrogate weights used")
    r.set_defaults(func=_cmd_refine)

    t = sub.add_parser("tasks", help="build task instances from generated circuits")
    t.add_argument("--circuits", required=True, help="directory with circuit files")
    t.add_argument("--task", required=True, choices=[k.value for k in TaskKind])
    t.add_argument("--count", type=int, default=10)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True)
    t.add_argument("--library", default="builtin")
    t.set_defaults(func=_cmd_tasks)

    if defaults:
        for sp in (g, v, s, m, a, d, r, t):
            known = {
                action.dest for action in sp._actions if action.dest != "func"
            }
            sp.set_defaults(**{k: val for k, val in defaults.items() if k in known})
    return parser


# --- command implementations --------------------------------------------------------


def _cmd_generate(args) -> int:
    library = load_parts_library(args.library)
    out = Path(args.out)
    if args.total is not None:
        config = DatasetConfig(
            total=args.total,
            classes=tuple(args.classes) if args.classes else COMPLEXITY_CLASSES,
        )
        ds = build_dataset(config, library, args.seed, jobs=max(args.jobs, 1))
        write_dataset(ds, out)
        print(f"dataset {len(ds.specs)} circuits -> {out}")
        for name in sorted(ds.splits):
            print(f"split {name} {len(ds.splits[name])}")
        for cls, n in sorted(ds.shortfalls.items()):
            print(f"shortfall {cls} {n}", file=sys.stderr)
        return 0
    if args.type is None:
        raise GenerationError("either --type or --total is required")
    ctype = CircuitType(args.type)
    specs = []
    seeds = []
    for i in range(args.count):
        seed = mix(args.seed, i)
        params = GenParams(
            ctype, seed,
            promoter_class=args.promoter_class,
            gate_type=args.gate_type,
            cycle_length=args.cycle_length,
            ffl_type=args.ffl_type,
        )
        specs.append(generate_circuit(params, library))
        seeds.append(seed)
    ds = Dataset(
        specs=specs, splits={"train": list(range(len(specs)))}, seeds=seeds,
        shortfalls={}, config=DatasetConfig(total=max(args.count, 1)), seed=args.seed,
    )
    write_dataset(ds, out)
    print(f"generated {len(specs)} {ctype.value} circuits -> {out}")
    return 0


def _cmd_verify(args) -> int:
    library = load_parts_library(args.library)
    spec = load_circuit(args.circuit)
    import dataclasses

    from .verify import assess_script

    assessment = assess_script(
        spec.script, spec.circuit_type, library, expected_counts_for_spec(spec)
    )
    f_task = 0.0
    if assessment.document is not None:
        # score the document the script actually built, against the stored truth
        probe = dataclasses.replace(
            spec, document=assessment.document, reference=spec.reference_document
        )
        f_task = self_function_score(probe, library)
    breakdown = hierarchical_reward(
        assessment.exec_score, assessment.valid_score, assessment.struct_score,
        assessment.sem_score, f_task, CurriculumState(stage=args.stage).weights,
    )
    print(f"level exec {breakdown.r_exec:.4f}")
    if assessment.exec_error is not None:
        print(f"exec_error {assessment.exec_error}")
    print(f"level valid {breakdown.r_valid:.4f}")
    if assessment.validity is not None:
        for diag in assessment.validity.diagnostics:
            print(f"validity_diag {diag}")
    for name, result in (("struct", assessment.structural), ("sem", assessment.semantic)):
        print(f"level {name} {getattr(breakdown, 'r_' + name):.4f}")
        if result is not None:
            for check in result.checks:
                status = "pass" if check.passed else "fail"
                detail = f" {check.detail}" if check.detail else ""
                print(f"check {name} {check.check_id} {status}{detail}")
    print(f"level func {breakdown.r_func:.4f}")
    print(f"f_task {breakdown.f_task:.4f}")
    print(f"weights {' '.join(f'{w:.2f}' for w in breakdown.weights)}")
    print(f"total {breakdown.total:.4f}")
    return 0


def _cmd_score(args) -> int:
    library = load_parts_library(args.library)
    if args.truth_table:
        if not args.circuit:
            raise TaskError("--truth-table needs --circuit")
        return _print_truth_table(args.circuit, library)
    if not args.task or not args.submission:
        raise TaskError("score needs --task and --submission (or --truth-table --circuit)")
    task = parse_task_record(Path(args.task).read_text(encoding="utf-8"))
    submission = parse_submission(Path(args.submission).read_text(encoding="utf-8"))
    breakdown, detail = total_reward(
        task, submission, CurriculumState(stage=args.stage), library
    )
    print(f"task {task.task.value}")
    print(f"tau {task.tau:g}")
    for name in ("exec", "valid", "struct", "sem", "func"):
        print(f"level {name} {getattr(breakdown, 'r_' + name):.4f}")
    print(f"f_task {breakdown.f_task:.4f}")
    for term in sorted(detail.terms):
        print(f"term {term} {detail.terms[term]:.4f}")
    for diag in detail.diagnostics:
        print(f"diag {diag}", file=sys.stderr)
    print(f"total {breakdown.total:.4f}")
    print(f"success {int(breakdown.total >= task.tau)}")
    return 0


def _print_truth_table(stem: str, library) -> int:
    spec = load_circuit(stem)
    gt = spec.ground_truth
    if gt.truth_table is None:
        raise EvalError("circuit has no steady-state truth table")
    table = full_truth_table(spec.document, library, gt.inputs)
    numeric = None
    if gt.nor_topology is not None and gt.gate_assignment is not None:
        bank = library.gate_bank()
        params = {n: bank[g] for n, g in gt.gate_assignment.items() if g in bank}
        numeric = (gt.nor_topology, params)
    for bits in sorted(table):
        key = "".join(str(b) for b in bits)
        line = f"row {key} {table[bits]}"
        if numeric is not None:
            from .logic import propagate_signals

            topo, params = numeric
            sensors = {
                s.id: (3.0 if b else 0.01)
                for s, b in zip(topo.sensors, bits)
            }
            result = propagate_signals(topo, params, sensors)
            line += f" rpu={result.state[topo.output.id]:.4f}"
        print(line)
    return 0


def _cmd_metrics(args) -> int:
    if args.pass_at_k:
        n, c, k = args.pass_at_k
        print(f"pass_at_k {n} {c} {k} {pass_at_k(n, c, k):.6f}")
        return 0
    if not args.results:
        raise TaskError("metrics needs --results or --pass-at-k")
    rows: list[tuple[float, float, str]] = []
    for lineno, raw in enumerate(Path(args.results).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if toks[0] != "result" or len(toks) not in (4, 5):
            raise TaskError(f"line {lineno}: expected `result <id> <R> <tau> [group]`")
        rows.append((float(toks[2]), float(toks[3]), toks[4] if len(toks) == 5 else "all"))
    print(f"tsr all {tsr([(r, t) for r, t, _ in rows]):.6f}")
    groups = sorted({g for _, _, g in rows})
    by_group = {}
    for g in groups:
        sub = [(r, t) for r, t, gg in rows if gg == g]
        by_group[g] = tsr(sub)
        if g != "all":
            print(f"tsr {g} {by_group[g]:.6f}")
    if "proc" in by_group and "real" in by_group:
        print(f"delta_gen {delta_gen(by_group['proc'], by_group['real']):.6f}")
    return 0


def _parse_topology_file(path: str) -> GateTopology:
    nodes = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("gencircuit-"):
            continue
        toks = line.split()
        if toks[0] != "topo_node" or len(toks) != 4:
            raise TaskError(f"line {lineno}: expected `topo_node <id> <ins|-> <flags|->`")
        _, nid, ins, flags = toks
        nodes.append(
            GateNode(
                nid,
                tuple(ins.split(",")) if ins != "-" else (),
                is_sensor="sensor" in flags,
                is_output="output" in flags,
            )
        )
    return GateTopology(tuple(nodes))


def _parse_gates_file(path: str) -> dict[str, HillParams]:
    bank = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("gencircuit-"):
            continue
        toks = line.split()
        if toks[0] != "gate" or len(toks) != 6:
            raise TaskError(f"line {lineno}: expected `gate <id> <ymin> <ymax> <K> <n>`")
        bank[toks[1]] = HillParams(*(float(v) for v in toks[2:]))
    return bank


def _parse_table_file(path: str) -> dict[tuple[int, ...], int]:
    table = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#") or line.startswith("gencircuit-"):
            continue
        toks = line.split()
        if toks[0] != "tt" or len(toks) != 3:
            raise TaskError(f"line {lineno}: expected `tt <bits> <out>`")
        table[tuple(int(c) for c in toks[1])] = int(toks[2])
    return table


def _cmd_assign(args) -> int:
    topology = _parse_topology_file(args.topology)
    bank = _parse_gates_file(args.gates)
    table = _parse_table_file(args.truth_table)
    best = None
    for restart in range(max(args.restarts, 1)):
        schedule = AnnealSchedule(
            t0=args.t0, beta=args.beta, iters=args.iters, seed=mix(args.seed, restart)
        )
        result = assign_gates(topology, bank, table, schedule)
        if best is None or result.score.objective > best.score.objective:
            best = result
    for node in sorted(best.assignment):
        print(f"assign {node} {best.assignment[node]}")
    print(f"min_on {best.score.min_on:.6g}")
    print(f"max_off {best.score.max_off:.6g}")
    print(f"objective {best.score.objective:.6g}")
    print(f"success {int(best.success)}")
    print(f"trace_final {best.trace[-1]:.6g}")
    print(f"evaluations {best.evaluations}")
    return 0


def _cmd_dedup(args) -> int:
    directory = Path(args.dir)
    stems = sorted(p.with_suffix("") for p in directory.glob("circuit_*.doc"))
    if not stems:
        raise DatasetError(f"no circuit files found in {directory}")
    specs = [load_circuit(stem) for stem in stems]
    result = deduplicate(specs, IsoMode(args.mode))
    for kept_idx in result.kept_indices:
        print(f"kept {stems[kept_idx].name}")
    for removed, keeper in result.removed_pairs:
        print(f"removed {stems[removed].name} duplicate_of {stems[keeper].name}")
    print(f"total {len(specs)} kept {len(result.kept)} removed {len(result.removed_pairs)}")
    return 0


def _cmd_refine(args) -> int:
    if args.weights:
        weights = load_weights(args.weights)
    else:
        weights = random_weights(args.weights_seed)
    if args.save_weights:
        save_weights(weights, args.save_weights)
    scorer = surrogate_scorer(weights, RewardThresholds(fc_target=args.fc_target))
    config = RefineConfig(
        pool_size=args.pool_size,
        elite_frac=args.elite_frac,
        mutation_rate=args.mutation_rate,
        fresh_frac=args.fresh_frac,
        iterations=args.iterations,
        seed=args.seed,
    )
    history = refine_pool(config, scorer)
    print("iter mean elite best")
    for row in history:
        print(f"{row.iteration} {row.mean_score:.6f} {row.elite_mean:.6f} {row.best_score:.6f}")
    final = history[-1]
    print("best_composition " + ",".join(str(c) for c in final.best))
    return 0


def _cmd_tasks(args) -> int:
    library = load_parts_library(args.library)
    directory = Path(args.circuits)
    stems = sorted(p.with_suffix("") for p in directory.glob("circuit_*.doc"))
    if not stems:
        raise DatasetError(f"no circuit files found in {directory}")
    kind = TaskKind(args.task)
    specs = [load_circuit(stem) for stem in stems]
    eligible = [s for s in specs if s.circuit_type in TASK_APPLICABILITY[kind]]
    if not eligible:
        raise TaskError(f"no circuit in {directory} supports task {kind.value}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    made = 0
    idx = 0
    attempts = 0
    while made < args.count and attempts < 20 * args.count:
        spec = eligible[idx % len(eligible)]
        idx += 1
        attempts += 1
        try:
            task = make_task(spec, kind, mix(args.seed, attempts), library)
        except TaskError:
            continue
        (out / f"task_{made:04d}.task").write_text(emit_task_record(task), encoding="utf-8")
        made += 1
    if made < args.count:
        print(f"built only {made}/{args.count} instances", file=sys.stderr)
    print(f"tasks {made} -> {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
