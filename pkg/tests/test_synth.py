import pytest

from gencircuit.logic import eval_gate_topology
from gencircuit.rng import Rng
from gencircuit.synth import (
    BudgetError,
    DegenerateFunctionError,
    all_tables,
    is_degenerate,
    synthesize_nor_network,
    table_to_mask,
)

NOT2 = {(0,): 1, (1,): 0}
NOR2 = {(0, 0): 1, (0, 1): 0, (1, 0): 0, (1, 1): 0}
AND2 = {(0, 0): 0, (0, 1): 0, (1, 0): 0, (1, 1): 1}
XOR2 = {(0, 0): 0, (0, 1): 1, (1, 0): 1, (1, 1): 0}
XOR3 = {
    (a, b, c): (a ^ b ^ c)
    for a in (0, 1) for b in (0, 1) for c in (0, 1)
}
MAJ3 = {
    (a, b, c): int(a + b + c >= 2)
    for a in (0, 1) for b in (0, 1) for c in (0, 1)
}


def _check(topo, table):
    sensors = [s.id for s in topo.sensors]
    out = topo.output.id
    for bits, want in table.items():
        assert eval_gate_topology(topo, dict(zip(sensors, bits)))[out] == want


class TestExactSynthesis:
    def test_not_base_case(self):
        topo = synthesize_nor_network(NOT2)
        assert len(topo.gates) == 1
        assert topo.depth() == 1
        _check(topo, NOT2)

    def test_buffer_is_double_inversion(self):
        buf = {(0,): 0, (1,): 1}
        topo = synthesize_nor_network(buf)
        assert len(topo.gates) == 2
        _check(topo, buf)

    def test_nor2_single_gate(self):
        topo = synthesize_nor_network(NOR2)
        assert len(topo.gates) == 1
        _check(topo, NOR2)

    def test_and2_needs_exactly_three_gates(self):
        # the search is exhaustive by gate count, so 3 is provably minimal
        topo = synthesize_nor_network(AND2)
        assert len(topo.gates) == 3
        _check(topo, AND2)

    def test_all_two_input_functions(self):
        for table in all_tables(2):
            topo = synthesize_nor_network(table)
            _check(topo, table)
            assert len(topo.gates) <= 8

    def test_three_input_sample(self):
        rng = Rng(0)
        tables = all_tables(3)
        for _ in range(12):
            table = rng.choice(tables)
            topo = synthesize_nor_network(table, max_gates=8)
            _check(topo, table)

    def test_majority_within_budget(self):
        topo = synthesize_nor_network(MAJ3, max_gates=8)
        _check(topo, MAJ3)

    def test_budget_error_when_too_tight(self):
        with pytest.raises(BudgetError):
            synthesize_nor_network(XOR2, max_gates=2)

    def test_minimality_against_depth_sweep(self):
        # growing the budget never changes the returned gate count
        for table in (NOR2, AND2, XOR2):
            small = synthesize_nor_network(table, max_gates=6)
            large = synthesize_nor_network(table, max_gates=8)
            assert len(small.gates) == len(large.gates)


class TestDegenerate:
    def test_constant_rejected(self):
        with pytest.raises(DegenerateFunctionError):
            synthesize_nor_network({(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1})

    def test_single_variable_rejected(self):
        with pytest.raises(DegenerateFunctionError):
            synthesize_nor_network({(0, 0): 0, (0, 1): 0, (1, 0): 1, (1, 1): 1})

    def test_is_degenerate_matches_definition(self):
        mask, k = table_to_mask(XOR2)
        assert not is_degenerate(mask, k)
        const, _ = table_to_mask({(0, 0): 1, (0, 1): 1, (1, 0): 1, (1, 1): 1})
        assert is_degenerate(const, 2)


class TestGreedyFourInput:
    def test_four_input_function_synthesizes(self):
        table = {
            (a, b, c, d): int((a or b) and not (c and d))
            for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)
        }
        topo = synthesize_nor_network(table, max_gates=16)
        _check(topo, table)

    def test_four_input_respects_budget(self):
        table = {
            (a, b, c, d): (a ^ b) ^ (c ^ d)
            for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)
        }
        with pytest.raises(BudgetError):
            synthesize_nor_network(table, max_gates=4)

    def test_fan_in_three_chain(self):
        table = {
            (a, b, c, d): int((a or b or c) and not d)
            for a in (0, 1) for b in (0, 1) for c in (0, 1) for d in (0, 1)
        }
        topo = synthesize_nor_network(table, max_gates=16)
        _check(topo, table)
        assert all(len(g.inputs) <= 3 for g in topo.gates)
