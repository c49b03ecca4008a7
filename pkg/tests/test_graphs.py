import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gencircuit.circuit_types import CircuitType
from gencircuit.generate import GenParams, generate_circuit
from gencircuit.graphs import (
    IsoMode,
    NodeRole,
    Polarity,
    RegEdge,
    RegGraph,
    RegNode,
    RingExpectation,
    build_ring,
    complexity,
    detect_motifs,
    emit_graph,
    extract_regulatory_graph,
    fingerprint,
    isomorphic,
    parse_graph,
)
from gencircuit.model import rename_components


class TestExtraction:
    def test_not_gate(self, specs, library):
        graph = extract_regulatory_graph(specs[CircuitType.NOT_GATE].document, library)
        assert len(graph.nodes) == 2
        assert len(graph.edges) == 1
        assert graph.edges[0].polarity is Polarity.REPRESSION

    def test_toggle_mutual_repression(self, specs, library):
        graph = extract_regulatory_graph(specs[CircuitType.TOGGLE].document, library)
        assert len(graph.nodes) == 2
        pairs = {(e.src, e.dst) for e in graph.edges}
        a, b = (n.id for n in graph.nodes)
        assert pairs == {(a, b), (b, a)}
        assert all(e.polarity is Polarity.REPRESSION for e in graph.edges)

    def test_cassette_no_edges(self, specs, library):
        graph = extract_regulatory_graph(specs[CircuitType.CASSETTE].document, library)
        assert len(graph.nodes) == 1
        assert graph.edges == ()


class TestComplexity:
    def test_cassette(self, specs, library):
        g = extract_regulatory_graph(specs[CircuitType.CASSETTE].document, library)
        assert complexity(g).as_tuple() == (0, 0, 0, 1)

    def test_repressilator(self, library):
        spec = generate_circuit(
            GenParams(CircuitType.OSCILLATOR, seed=3, cycle_length=3), library
        )
        g = extract_regulatory_graph(spec.document, library)
        assert complexity(g).as_tuple() == (3, 1, 1, 3)

    def test_two_input_nor(self, library):
        spec = generate_circuit(
            GenParams(CircuitType.TWO_INPUT_GATE, seed=3, gate_type="NOR"), library
        )
        g = extract_regulatory_graph(spec.document, library)
        assert complexity(g).as_tuple() == (1, 2, 0, 3)

    def test_toggle(self, specs, library):
        g = extract_regulatory_graph(specs[CircuitType.TOGGLE].document, library)
        assert complexity(g).as_tuple() == (2, 1, 1, 2)


class TestMotifs:
    def test_toggle_bistable(self, specs, library):
        g = extract_regulatory_graph(specs[CircuitType.TOGGLE].document, library)
        assert detect_motifs(g).bistable

    def test_even_ring_is_bifurcation_dependent(self):
        ring = build_ring(["a", "b", "c", "d"], [Polarity.REPRESSION] * 4)
        report = detect_motifs(ring)
        ring4 = [r for r in report.oscillator_rings if r.length == 4]
        assert ring4 and ring4[0].expected is RingExpectation.BIFURCATION_DEPENDENT

    def test_c1_ffl_detected(self, library):
        spec = generate_circuit(GenParams(CircuitType.FFL, seed=5, ffl_type="C1"), library)
        g = extract_regulatory_graph(spec.document, library)
        report = detect_motifs(g)
        assert any(f.type == "C1" for f in report.ffls)

    def test_i1_ffl_detected(self, library):
        spec = generate_circuit(GenParams(CircuitType.FFL, seed=5, ffl_type="I1"), library)
        g = extract_regulatory_graph(spec.document, library)
        assert any(f.type == "I1" for f in detect_motifs(g).ffls)

    @settings(max_examples=120, deadline=None)
    @given(
        length=st.integers(min_value=1, max_value=6),
        data=st.data(),
    )
    def test_ring_parity_matches_repression_count(self, length, data):
        pols = data.draw(
            st.lists(
                st.sampled_from([Polarity.ACTIVATION, Polarity.REPRESSION]),
                min_size=length, max_size=length,
            )
        )
        if length == 1 and pols[0] is Polarity.ACTIVATION:
            return  # activation self-loops are rejected by the model
        ring = build_ring([f"n{i}" for i in range(length)], pols)
        report = detect_motifs(ring)
        reps = sum(1 for p in pols if p is Polarity.REPRESSION)
        full = [r for r in report.oscillator_rings if r.length == length]
        assert full
        want = RingExpectation.YES if reps % 2 else RingExpectation.BIFURCATION_DEPENDENT
        assert full[0].expected is want


def _toggle(library, seed):
    return generate_circuit(GenParams(CircuitType.TOGGLE, seed=seed), library)


class TestIsomorphism:
    def test_part_swapped_toggles(self, library):
        # find two toggles over different repressor pairs
        a = _toggle(library, 1)
        b = None
        a_parts = {c.name for c in a.document.components.values()}
        for seed in range(2, 40):
            cand = _toggle(library, seed)
            if {c.name for c in cand.document.components.values()} != a_parts:
                b = cand
                break
        assert b is not None
        ga = extract_regulatory_graph(a.document, library)
        gb = extract_regulatory_graph(b.document, library)
        assert isomorphic(ga, gb, IsoMode.ROLE_LABELED)
        assert not isomorphic(ga, gb, IsoMode.PART_AWARE)

    def test_identity(self, specs, library):
        for spec in specs.values():
            g = extract_regulatory_graph(spec.document, library)
            assert isomorphic(g, g, IsoMode.ROLE_LABELED)
            assert isomorphic(g, g, IsoMode.PART_AWARE)

    def test_equivalence_relation_on_fixtures(self, library):
        graphs = []
        for ctype in (CircuitType.TOGGLE, CircuitType.NOT_GATE, CircuitType.OSCILLATOR):
            for seed in range(3):
                spec = generate_circuit(GenParams(ctype, seed=seed), library)
                graphs.append(extract_regulatory_graph(spec.document, library))
        for g1, g2 in itertools.combinations(graphs, 2):
            assert isomorphic(g1, g2, IsoMode.ROLE_LABELED) == isomorphic(
                g2, g1, IsoMode.ROLE_LABELED
            )
        for g1, g2, g3 in itertools.combinations(graphs, 3):
            if isomorphic(g1, g2, IsoMode.ROLE_LABELED) and isomorphic(
                g2, g3, IsoMode.ROLE_LABELED
            ):
                assert isomorphic(g1, g3, IsoMode.ROLE_LABELED)

    def test_polarity_matters(self):
        act = build_ring(["a", "b", "c"], [Polarity.REPRESSION, Polarity.REPRESSION, Polarity.ACTIVATION])
        rep = build_ring(["a", "b", "c"], [Polarity.REPRESSION] * 3)
        assert not isomorphic(act, rep, IsoMode.ROLE_LABELED)


class TestFingerprint:
    def test_renamed_ids_equal(self, specs):
        doc = specs[CircuitType.TOGGLE].document
        renamed = rename_components(doc, {cid: f"z_{cid}" for cid in doc.components})
        assert fingerprint(doc) == fingerprint(renamed)

    def test_toggle_vs_not_differ(self, specs):
        assert fingerprint(specs[CircuitType.TOGGLE].document) != fingerprint(
            specs[CircuitType.NOT_GATE].document
        )

    def test_serialization_round_trip_equal(self, specs):
        from gencircuit.model import deserialize_document, serialize_document

        doc = specs[CircuitType.FFL].document
        assert fingerprint(doc) == fingerprint(deserialize_document(serialize_document(doc)))

    def test_filter_soundness(self, library):
        """different fingerprints imply non-isomorphic (role-labeled)."""
        pool = []
        for ctype in CircuitType:
            for seed in range(4):
                try:
                    spec = generate_circuit(GenParams(ctype, seed=seed), library)
                except Exception:
                    continue
                pool.append(
                    (
                        fingerprint(spec.document),
                        extract_regulatory_graph(spec.document, library),
                    )
                )
        for (f1, g1), (f2, g2) in itertools.combinations(pool, 2):
            if f1 != f2:
                assert not isomorphic(g1, g2, IsoMode.ROLE_LABELED)


class TestCycleBound:
    def test_large_graphs_flagged_not_analyzed(self):
        n = 14  # above the 12-node enumeration bound
        ring = build_ring([f"n{i}" for i in range(n)], [Polarity.REPRESSION] * n)
        report = detect_motifs(ring)
        assert not report.cycles_analyzed
        assert report.oscillator_rings == ()
        # feedback detection itself still works above the bound
        assert complexity(ring).b == 1

    def test_small_graphs_analyzed(self):
        ring = build_ring(["a", "b", "c"], [Polarity.REPRESSION] * 3)
        assert detect_motifs(ring).cycles_analyzed


class TestGraphText:
    def test_round_trip(self, specs, library):
        g = extract_regulatory_graph(specs[CircuitType.TOGGLE].document, library)
        again = parse_graph(emit_graph(g))
        assert {(n.id, n.role) for n in again.nodes} == {(n.id, n.role) for n in g.nodes}
        assert {(e.src, e.dst, e.polarity) for e in again.edges} == {
            (e.src, e.dst, e.polarity) for e in g.edges
        }

    def test_activation_self_loop_rejected(self):
        from gencircuit.graphs import GraphError

        with pytest.raises(GraphError, match="self-loop"):
            RegGraph(
                nodes=(RegNode("a", NodeRole.CASSETTE),),
                edges=(RegEdge("a", "a", Polarity.ACTIVATION),),
            )
