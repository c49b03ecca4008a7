import pytest

from gencircuit.circuit_types import CircuitType, FLAW_LEVELS, FlawType, expected_counts_for_spec
from gencircuit.flaws import (
    InapplicableFlawError,
    PerturbError,
    PerturbOperator,
    applicable_flaws,
    inject_flaw,
    perturb,
    perturb_chain,
)
from gencircuit.generate import GenParams, generate_circuit, self_function_score
from gencircuit.graphs import IsoMode, detect_motifs, extract_regulatory_graph, isomorphic
from gencircuit.logic import full_truth_table
from gencircuit.verify import assess_script


class TestInjectFlaw:
    def test_toggle_incomplete_feedback_symptom(self, specs, library):
        spec = specs[CircuitType.TOGGLE]
        flawed = inject_flaw(spec, FlawType.INCOMPLETE_FEEDBACK, 3, library)
        record = flawed.ground_truth.flaw
        assert record.symptom == "No oscillation / no bistability"
        assert record.level == 4
        graph = extract_regulatory_graph(flawed.document, library)
        assert not detect_motifs(graph).bistable

    def test_cassette_missing_terminator_symptom(self, specs, library):
        spec = specs[CircuitType.CASSETTE]
        flawed = inject_flaw(spec, FlawType.MISSING_TERMINATOR, 3, library)
        assert flawed.ground_truth.flaw.symptom == "Transcriptional read-through"
        assert flawed.ground_truth.flaw.level == 1

    def test_not_inverted_logic_flips_output(self, specs, library):
        spec = specs[CircuitType.NOT_GATE]
        flawed = inject_flaw(spec, FlawType.INVERTED_LOGIC, 3, library)
        table = full_truth_table(flawed.document, library, spec.ground_truth.inputs)
        assert table != spec.ground_truth.truth_table

    def test_inapplicable_flaw_rejected(self, specs, library):
        with pytest.raises(InapplicableFlawError):
            inject_flaw(specs[CircuitType.CASSETTE], FlawType.MISSING_INTERACTION, 1, library)

    def test_level12_break_execution_or_validity(self, specs, library):
        for spec in specs.values():
            expected = expected_counts_for_spec(spec)
            for flaw in applicable_flaws(spec, library):
                if FLAW_LEVELS[flaw] > 2:
                    continue
                flawed = inject_flaw(spec, flaw, 21, library)
                a = assess_script(flawed.script, spec.circuit_type, library, expected)
                assert a.exec_score * a.valid_score == 0.0, (spec.circuit_type, flaw)

    def test_level34_keep_execution_and_validity(self, specs, library):
        for spec in specs.values():
            expected = expected_counts_for_spec(spec)
            for flaw in applicable_flaws(spec, library):
                if FLAW_LEVELS[flaw] < 3:
                    continue
                flawed = inject_flaw(spec, flaw, 23, library)
                a = assess_script(flawed.script, spec.circuit_type, library, expected)
                assert a.exec_score == 1.0 and a.valid_score == 1.0, (spec.circuit_type, flaw)
                assert self_function_score(flawed, library) < 1.0, (spec.circuit_type, flaw)

    def test_flaw_location_points_at_something_real(self, specs, library):
        spec = specs[CircuitType.TOGGLE]
        for flaw in applicable_flaws(spec, library):
            flawed = inject_flaw(spec, flaw, 31, library)
            assert flawed.ground_truth.flaw.location


class TestPerturb:
    def test_toggle_iso_functional_swaps_pair(self, library):
        spec = generate_circuit(GenParams(CircuitType.TOGGLE, seed=6), library)
        out = perturb(spec, PerturbOperator.ISO_FUNCTIONAL, 1, 9, library)
        g_old = extract_regulatory_graph(spec.document, library)
        g_new = extract_regulatory_graph(out.document, library)
        assert isomorphic(g_old, g_new, IsoMode.ROLE_LABELED)
        assert not isomorphic(g_old, g_new, IsoMode.PART_AWARE)
        assert detect_motifs(g_new).bistable
        assert out.provenance[-1] == "perturb:iso_functional"

    def test_iso_functional_preserves_truth_tables(self, library):
        spec = generate_circuit(
            GenParams(CircuitType.TWO_INPUT_GATE, seed=6, gate_type="NOR"), library
        )
        out = perturb(spec, PerturbOperator.ISO_FUNCTIONAL, 1, 4, library)
        table = full_truth_table(out.document, library, out.ground_truth.inputs)
        assert table == spec.ground_truth.truth_table

    def test_toggle_ablation_destroys_bistability(self, library):
        spec = generate_circuit(GenParams(CircuitType.TOGGLE, seed=6), library)
        out = perturb(spec, PerturbOperator.TOPOLOGY_ABLATE, 1, 2, library)
        graph = extract_regulatory_graph(out.document, library)
        assert not detect_motifs(graph).bistable
        record = out.ground_truth.flaw
        assert record is not None
        assert record.flaw_type is FlawType.INCOMPLETE_FEEDBACK
        assert record.symptom == "No oscillation / no bistability"

    def test_cassette_class_preserving_flips_inducible(self, library):
        spec = None
        for seed in range(20):
            cand = generate_circuit(
                GenParams(CircuitType.CASSETTE, seed=seed, promoter_class="constitutive"),
                library,
            )
            spec = cand
            break
        out = perturb(spec, PerturbOperator.CLASS_PRESERVING, 1, 5, library)
        assert spec.ground_truth.inducible is False
        assert out.ground_truth.inducible is True

    def test_augment_adds_edge_and_stays_valid(self, library):
        spec = generate_circuit(GenParams(CircuitType.TOGGLE, seed=2), library)
        out = perturb(spec, PerturbOperator.TOPOLOGY_AUGMENT, 1, 7, library)
        g_old = extract_regulatory_graph(spec.document, library)
        g_new = extract_regulatory_graph(out.document, library)
        assert len(g_new.edges) == len(g_old.edges) + 1
        a = assess_script(out.script, out.circuit_type, library, expected_counts_for_spec(out))
        assert a.exec_score == 1.0 and a.valid_score == 1.0

    def test_chain_applies_multiple_steps(self, library):
        spec = generate_circuit(GenParams(CircuitType.TOGGLE, seed=3), library)
        out = perturb_chain(spec, 3, 11, library)
        assert len(out.provenance) == 3

    def test_ablate_requires_an_edge(self, specs, library):
        with pytest.raises(PerturbError):
            perturb(specs[CircuitType.CASSETTE], PerturbOperator.TOPOLOGY_ABLATE, 1, 1, library)

    def test_perturb_deterministic(self, library):
        spec = generate_circuit(GenParams(CircuitType.OSCILLATOR, seed=4, cycle_length=3), library)
        a = perturb(spec, PerturbOperator.ISO_FUNCTIONAL, 2, 13, library)
        b = perturb(spec, PerturbOperator.ISO_FUNCTIONAL, 2, 13, library)
        assert a.document == b.document
        assert a.script == b.script
