import pytest

from gencircuit.anneal import (
    AnnealSchedule,
    AnnealError,
    CapacityError,
    assign_gates,
    exhaustive_best,
    score_assignment,
)
from gencircuit.library import HillParams
from gencircuit.logic import GateNode, GateTopology, hill
from gencircuit.rng import mix

GOOD = HillParams(y_min=0.02, y_max=2.5, K=0.3, n=2.5)
WEAK = HillParams(y_min=0.15, y_max=0.4, K=0.3, n=2.0)
NOT_TABLE = {(0,): 1, (1,): 0}


def _not_topology():
    return GateTopology(
        (GateNode("x0", (), is_sensor=True), GateNode("g1", ("x0",), is_output=True))
    )


def _chain_topology():
    return GateTopology(
        (
            GateNode("x0", (), is_sensor=True),
            GateNode("g1", ("x0",)),
            GateNode("g2", ("g1",), is_output=True),
        )
    )


class TestScoreAssignment:
    def test_well_separated_not(self):
        score = score_assignment(
            _not_topology(), {"g1": "good"}, {"good": GOOD}, NOT_TABLE
        )
        # closed form: ON row is hill(0.01), OFF row is hill(3.0)
        assert score.min_on == pytest.approx(hill(GOOD, 0.01))
        assert score.max_off == pytest.approx(hill(GOOD, 3.0))
        assert score.objective > 5
        assert score.margins_ok

    def test_weak_gate_objective_low(self):
        score = score_assignment(
            _not_topology(), {"g1": "weak"}, {"weak": WEAK}, NOT_TABLE
        )
        assert score.objective < 5
        assert not score.margins_ok

    def test_sensors_only_topology(self):
        topo = GateTopology((GateNode("x0", (), is_sensor=True, is_output=True),))
        score = score_assignment(topo, {}, {}, {(0,): 0, (1,): 1}, (0.01, 3.0))
        assert score.min_on == pytest.approx(3.0)
        assert score.max_off == pytest.approx(0.01)
        assert score.objective == pytest.approx(300.0)

    def test_missing_gate_rejected(self):
        with pytest.raises(AnnealError, match="no gate assigned"):
            score_assignment(_not_topology(), {}, {"good": GOOD}, NOT_TABLE)


class TestAssignGates:
    def test_single_node_matches_argmax(self, library):
        bank = library.gate_bank()
        topo = _not_topology()
        oracle_assign, oracle_score = exhaustive_best(topo, bank, NOT_TABLE)
        result = assign_gates(topo, bank, NOT_TABLE, AnnealSchedule(iters=150, seed=7))
        assert result.assignment == oracle_assign
        assert result.score.objective == pytest.approx(oracle_score.objective)

    def test_trace_is_nondecreasing(self, library):
        bank = library.gate_bank()
        result = assign_gates(
            _chain_topology(), bank, {(0,): 0, (1,): 1}, AnnealSchedule(iters=250, seed=3)
        )
        assert all(a <= b + 1e-12 for a, b in zip(result.trace, result.trace[1:]))

    def test_matches_oracle_on_buffer(self, library):
        bank = library.gate_bank()
        topo = _chain_topology()
        table = {(0,): 0, (1,): 1}
        _, oracle = exhaustive_best(topo, bank, table)
        hits = 0
        for r in range(40):
            result = assign_gates(
                topo, bank, table, AnnealSchedule(t0=1.0, beta=0.98, iters=250, seed=mix(11, r))
            )
            if abs(result.score.objective - oracle.objective) < 1e-9:
                hits += 1
        assert hits >= 38  # 95%

    def test_infeasible_library_flags_failure(self):
        # all gates saturate inside the dead zone: no assignment can pass margins
        bank = {
            "w1": HillParams(y_min=0.15, y_max=0.35, K=0.3, n=2.0),
            "w2": HillParams(y_min=0.2, y_max=0.45, K=0.4, n=2.0),
        }
        _, oracle = exhaustive_best(_not_topology(), bank, NOT_TABLE)
        assert not oracle.margins_ok
        result = assign_gates(_not_topology(), bank, NOT_TABLE, AnnealSchedule(iters=100, seed=1))
        assert not result.success
        assert result.score.objective <= oracle.objective + 1e-12

    def test_capacity_error(self):
        with pytest.raises(CapacityError):
            assign_gates(_chain_topology(), {"only": GOOD}, {(0,): 0, (1,): 1})

    def test_edge_incompatibility_breaks_the_downstream_margin(self, library):
        """A failing compatibility interval on an edge shows up as a violated
        margin in the exhaustive optimum for that two-gate bank."""
        from gencircuit.logic import check_gate_compatibility

        up = HillParams(y_min=0.011, y_max=0.09, K=0.3, n=2.0)
        down = HillParams(y_min=0.02, y_max=2.2, K=5.0, n=2.0)
        assert not check_gate_compatibility(up, down)
        bank = {"up": up, "down": down}
        _, best = exhaustive_best(_chain_topology(), bank, {(0,): 0, (1,): 1})
        assert not best.margins_ok


class TestSchedule:
    def test_validation(self):
        with pytest.raises(AnnealError):
            AnnealSchedule(t0=0.0)
        with pytest.raises(AnnealError):
            AnnealSchedule(beta=1.0)
        with pytest.raises(AnnealError):
            AnnealSchedule(iters=0)
