"""Reference-solution oracle: for every task kind, scoring the unflawed
script / reference answer yields f_task = 1 and R >= tau; the empty
submission yields R = 0."""

import pytest

from gencircuit.circuit_types import CircuitType
from gencircuit.generate import GenParams, generate_circuit
from gencircuit.rng import mix
from gencircuit.script import emit_script
from gencircuit.tasks import (
    CurriculumState,
    Submission,
    TASK_APPLICABILITY,
    TaskError,
    TaskKind,
    make_task,
    total_reward,
)

# circuit types used to host each task kind (all applicable per the matrix)
HOST_TYPES = {
    TaskKind.T1: (CircuitType.NOT_GATE, CircuitType.TOGGLE, CircuitType.CASSETTE),
    TaskKind.T2: (CircuitType.TOGGLE, CircuitType.FFL, CircuitType.CASSETTE),
    TaskKind.T3: (CircuitType.CASSETTE, CircuitType.NOT_GATE, CircuitType.OSCILLATOR),
    TaskKind.T4: (CircuitType.TWO_INPUT_GATE, CircuitType.BRANCHED, CircuitType.TOGGLE),
    TaskKind.T5: (CircuitType.TWO_INPUT_GATE, CircuitType.FFL, CircuitType.BRANCHED),
    TaskKind.T6: (CircuitType.TOGGLE, CircuitType.OSCILLATOR, CircuitType.FFL),
    TaskKind.T7: (CircuitType.OSCILLATOR, CircuitType.TOGGLE, CircuitType.TWO_INPUT_GATE),
    TaskKind.T8: (CircuitType.CASCADE,),
    TaskKind.T9: (CircuitType.CASCADE,),
    TaskKind.MASKED_PART: (CircuitType.CASSETTE, CircuitType.TOGGLE),
    TaskKind.MASKED_TYPE: (CircuitType.CASSETTE, CircuitType.NOT_GATE),
    TaskKind.MASKED_FUNCTION: (CircuitType.NOT_GATE, CircuitType.TOGGLE),
    TaskKind.DENOVO_ISO: (CircuitType.TOGGLE, CircuitType.FFL),
}


def reference_submission(task) -> Submission:
    spec = task.reference
    kind = task.task
    if kind in (TaskKind.T1, TaskKind.T6):
        return Submission(
            script=spec.script,
            flaw_type=task.flaw.flaw_type.value,
            location=task.flaw.location,
        )
    if kind is TaskKind.T3:
        return Submission(script=emit_script(spec.document))
    if kind is TaskKind.T5:
        return Submission(outputs=dict(spec.ground_truth.truth_table))
    if kind is TaskKind.T8:
        return Submission(assignment=dict(spec.ground_truth.gate_assignment))
    if kind is TaskKind.T9:
        return Submission(script=spec.script, location=task.flaw.location)
    if kind in (TaskKind.MASKED_PART, TaskKind.MASKED_TYPE, TaskKind.MASKED_FUNCTION):
        return Submission(ranking=(task.payload["answer"],))
    return Submission(script=spec.script)


@pytest.fixture(scope="module")
def circuit_pool(library):
    pool = {}
    for ctype in CircuitType:
        circuits = []
        seed = 0
        while len(circuits) < 12:
            try:
                circuits.append(generate_circuit(GenParams(ctype, seed=mix(400, seed)), library))
            except Exception:
                pass
            seed += 1
        pool[ctype] = circuits
    return pool


@pytest.mark.parametrize("kind", list(TaskKind))
def test_reference_solution_scores_perfect(kind, circuit_pool, library):
    state = CurriculumState(stage=4)
    built = 0
    attempts = 0
    while built < 100 and attempts < 400:
        ctype = HOST_TYPES[kind][attempts % len(HOST_TYPES[kind])]
        assert ctype in TASK_APPLICABILITY[kind]
        spec = circuit_pool[ctype][attempts % len(circuit_pool[ctype])]
        seed = mix(kind_value_hash(kind), attempts)
        attempts += 1
        try:
            task = make_task(spec, kind, seed, library)
        except TaskError:
            continue  # e.g. no applicable flaw for this particular circuit
        built += 1
        bd, detail = total_reward(task, reference_submission(task), state, library)
        assert detail.f_task == pytest.approx(1.0), (kind, detail.terms, detail.diagnostics)
        assert bd.total >= task.tau, (kind, bd.total)

        null_bd, _ = total_reward(task, Submission(), state, library)
        assert null_bd.total == 0.0
    assert built == 100, f"only built {built} instances for {kind}"


def kind_value_hash(kind: TaskKind) -> int:
    return sum(ord(c) for c in kind.value)
