import dataclasses

import pytest

from gencircuit.circuit_types import CircuitType, expected_counts_for, expected_counts_for_spec
from gencircuit.generate import GenParams, generate_circuit
from gencircuit.model import CircuitDocument, Constraint
from gencircuit.verify import (
    ConfigError,
    STAGE_WEIGHTS,
    assess_script,
    hierarchical_reward,
    verify_semantic,
    verify_structural,
    verify_validity,
)


def _swap_constraint_roles(doc: CircuitDocument, cassette_id: str) -> CircuitDocument:
    """Rewire the promoter/RBS chain step so the chain starts with the RBS."""
    comps = dict(doc.components)
    cas = comps[cassette_id]
    p, r = cas.feature_ids()[0], cas.feature_ids()[1]
    new_constraints = []
    for con in cas.constraints:
        if (con.subject, con.object) == (p, r):
            new_constraints.append(Constraint(subject=r, object=p))
        elif con.subject == r:
            new_constraints.append(Constraint(subject=p, object=con.object))
        else:
            new_constraints.append(con)
    comps[cassette_id] = dataclasses.replace(cas, constraints=tuple(new_constraints))
    return CircuitDocument(doc.namespace, comps)


class TestValidity:
    def test_canonical_cassette_passes(self, specs):
        assert verify_validity(specs[CircuitType.CASSETTE].document).passed

    def test_all_generated_types_pass(self, specs):
        for spec in specs.values():
            result = verify_validity(spec.document)
            assert result.passed, (spec.circuit_type, result.diagnostics)


class TestStructural:
    def test_clean_not_gate_scores_one(self, specs, library):
        spec = specs[CircuitType.NOT_GATE]
        result = verify_structural(
            spec.document, spec.circuit_type, library, expected_counts_for_spec(spec)
        )
        assert result.score == 1.0

    def test_promoter_rbs_chain_swap_fails_only_c3(self, specs, library):
        spec = specs[CircuitType.NOT_GATE]
        swapped = _swap_constraint_roles(spec.document, "input_cassette")
        assert verify_validity(swapped).passed
        result = verify_structural(
            swapped, spec.circuit_type, library, expected_counts_for_spec(spec)
        )
        failed = [c.check_id for c in result.checks if not c.passed]
        assert failed == ["c3"]
        assert result.score == pytest.approx(0.8)

    def test_off_library_part_fails_only_c5(self, specs, library):
        spec = specs[CircuitType.NOT_GATE]
        comps = dict(spec.document.components)
        comps["out_cds"] = dataclasses.replace(comps["out_cds"], name="NotARealPart")
        doc = CircuitDocument(spec.document.namespace, comps)
        result = verify_structural(
            doc, spec.circuit_type, library, expected_counts_for_spec(spec)
        )
        failed = [c.check_id for c in result.checks if not c.passed]
        assert failed == ["c5"]
        assert result.score == pytest.approx(0.8)

    def test_expected_counts_table(self, library):
        table = {
            (CircuitType.CASSETTE, None): (1, 1),
            (CircuitType.NOT_GATE, None): (3, 2),
            (CircuitType.TWO_INPUT_GATE, "NOR"): (4, 3),
            (CircuitType.TWO_INPUT_GATE, "NAND"): (4, 3),
            (CircuitType.TWO_INPUT_GATE, "OR"): (5, 4),
            (CircuitType.TWO_INPUT_GATE, "AND"): (6, 5),
            (CircuitType.TOGGLE, None): (3, 2),
            (CircuitType.BRANCHED, None): (4, 3),
            (CircuitType.FFL, None): (4, 3),
        }
        for (ctype, gate), (regions, leaves) in table.items():
            got = expected_counts_for(ctype, gate_type=gate)
            assert (got.engineered_region_count, got.leaf_cassette_count) == (regions, leaves)
        for k in (3, 5):
            got = expected_counts_for(CircuitType.OSCILLATOR, cycle_length=k)
            assert (got.engineered_region_count, got.leaf_cassette_count) == (k + 1, k)


class TestSemantic:
    def test_clean_nor_scores_one(self, library):
        spec = generate_circuit(
            GenParams(CircuitType.TWO_INPUT_GATE, seed=9, gate_type="NOR"), library
        )
        assert verify_semantic(spec.document, spec.circuit_type, library).score == 1.0

    def test_non_cognate_repressor_fails_only_c4(self, specs, library):
        from gencircuit.circuit_types import FlawType
        from gencircuit.flaws import inject_flaw

        spec = specs[CircuitType.NOT_GATE]
        flawed = inject_flaw(spec, FlawType.MISMATCHED_PAIR, 5, library)
        result = verify_semantic(flawed.document, spec.circuit_type, library)
        failed = [c.check_id for c in result.checks if not c.passed]
        assert failed == ["c4"]
        assert result.score == pytest.approx(0.8)

    def test_cassette_interaction_checks_vacuous(self, specs, library):
        spec = specs[CircuitType.CASSETTE]
        result = verify_semantic(spec.document, spec.circuit_type, library)
        assert result.score == 1.0


class TestHierarchicalReward:
    def test_all_ones_stage1(self):
        bd = hierarchical_reward(1, 1, 1, 1, 1, STAGE_WEIGHTS[1])
        assert bd.total == pytest.approx(1.0)

    def test_exec_without_validity_stage1(self):
        bd = hierarchical_reward(1, 0, 1, 1, 1, STAGE_WEIGHTS[1])
        assert bd.r_struct == 0 and bd.r_sem == 0 and bd.r_func == 0
        assert bd.total == pytest.approx(0.40)

    def test_partial_struct_stage4(self):
        bd = hierarchical_reward(1, 1, 0.8, 1, 1, STAGE_WEIGHTS[4])
        assert bd.r_func == pytest.approx(0.8)
        assert bd.total == pytest.approx(0.05 + 0.05 + 0.12 + 0.15 + 0.48)
        assert bd.total == pytest.approx(0.85)

    def test_weight_sum_enforced(self):
        with pytest.raises(ConfigError):
            hierarchical_reward(1, 1, 1, 1, 1, (0.3, 0.3, 0.2, 0.1, 0.2))

    def test_linearity_in_each_level(self):
        weights = STAGE_WEIGHTS[3]
        base = hierarchical_reward(1, 1, 0.4, 0.6, 0.5, weights)
        bumped = hierarchical_reward(1, 1, 0.8, 0.6, 0.5, weights)
        # R is linear in the struct fraction holding the rest fixed
        slope = (bumped.total - base.total) / (0.8 - 0.4)
        third = hierarchical_reward(1, 1, 0.6, 0.6, 0.5, weights)
        assert third.total == pytest.approx(base.total + slope * 0.2)

    def test_stage_weight_rows(self):
        assert STAGE_WEIGHTS[1] == (0.40, 0.30, 0.20, 0.10, 0.00)
        assert STAGE_WEIGHTS[2] == (0.15, 0.15, 0.35, 0.25, 0.10)
        assert STAGE_WEIGHTS[3] == (0.10, 0.10, 0.20, 0.20, 0.40)
        assert STAGE_WEIGHTS[4] == (0.05, 0.05, 0.15, 0.15, 0.60)
        for row in STAGE_WEIGHTS.values():
            assert sum(row) == pytest.approx(1.0)


class TestMonotoneDamage:
    def test_single_flaws_never_increase_level_scores(self, specs, library):
        from gencircuit.flaws import applicable_flaws, inject_flaw

        for spec in specs.values():
            expected = expected_counts_for_spec(spec)
            clean = assess_script(spec.script, spec.circuit_type, library, expected)
            baseline = (
                clean.exec_score, clean.valid_score, clean.struct_score, clean.sem_score
            )
            for flaw in applicable_flaws(spec, library):
                flawed = inject_flaw(spec, flaw, 17, library)
                got = assess_script(flawed.script, spec.circuit_type, library, expected)
                levels = (got.exec_score, got.valid_score, got.struct_score, got.sem_score)
                assert all(g <= b + 1e-12 for g, b in zip(levels, baseline)), (
                    spec.circuit_type, flaw, levels
                )
