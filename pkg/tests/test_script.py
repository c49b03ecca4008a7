import pytest

from gencircuit.model import CircuitDocument
from gencircuit.script import (
    ExecErrorKind,
    ParseError,
    emit_script,
    parse_script,
    run_script,
)

# the grammar's documented example: an 8-statement GFP cassette skeleton
GFP_SKELETON = """\
namespace https://gencircuit.dev/
component promoter_1 dna
roles promoter_1 promoter
component gfp_1 dna
roles gfp_1 cds
component cas dna
roles cas engineered_region
sub cas promoter_1
"""

# mirrors the canonical expression-cassette construction pattern
CANONICAL_CASSETTE = """\
namespace https://gencircuit.dev/
component promoter_1 dna
roles promoter_1 promoter
name promoter_1 J23100
component rbs_1 dna
roles rbs_1 rbs
name rbs_1 B0032
component cds_1 dna
roles cds_1 cds
name cds_1 GFP
component term_1 dna
roles term_1 terminator
name term_1 DT
component gfp_cassette dna
roles gfp_cassette engineered_region
sub gfp_cassette promoter_1
sub gfp_cassette rbs_1
sub gfp_cassette cds_1
sub gfp_cassette term_1
precedes gfp_cassette promoter_1 rbs_1
precedes gfp_cassette rbs_1 cds_1
precedes gfp_cassette cds_1 term_1
"""

# the code-repair classic: a constraint borrowing another cassette's feature
CROSS_CASSETTE_CONSTRAINT = """\
namespace https://gencircuit.dev/
component p_in dna
roles p_in promoter
component term_in dna
roles term_in terminator
component p_out dna
roles p_out promoter
component gfp dna
roles gfp cds
component input_cassette dna
roles input_cassette engineered_region
component output_cassette dna
roles output_cassette engineered_region
sub input_cassette p_in
sub input_cassette term_in
sub output_cassette p_out
sub output_cassette gfp
precedes input_cassette p_in term_in
precedes output_cassette gfp term_in
"""


class TestParse:
    def test_skeleton_statement_count(self):
        script = parse_script(GFP_SKELETON)
        assert len(script.statements) == 8

    def test_empty_input(self):
        with pytest.raises(ParseError, match="empty script"):
            parse_script("")

    def test_typo_names_line(self):
        bad = "namespace https://x/\nconstrant cas a b\n"
        with pytest.raises(ParseError, match="line 2"):
            parse_script(bad)

    def test_wrong_arity(self):
        with pytest.raises(ParseError, match="entity type"):
            parse_script("component thing\n")

    def test_malformed_identifier(self):
        with pytest.raises(ParseError, match="malformed identifier"):
            parse_script("component 9bad dna\n")


class TestExecute:
    def test_canonical_cassette(self):
        outcome = run_script(CANONICAL_CASSETTE)
        assert outcome.ok
        doc = outcome.document
        assert len(doc.components) == 5
        assert len(doc.components["gfp_cassette"].constraints) == 3

    def test_cross_cassette_constraint_is_dangling(self):
        outcome = run_script(CROSS_CASSETTE_CONSTRAINT)
        assert not outcome.ok
        assert outcome.error.kind is ExecErrorKind.DANGLING
        assert "is not a feature of 'output_cassette'" in outcome.error.message

    def test_duplicate_id(self):
        text = "component a dna\ncomponent a dna\n"
        outcome = run_script(text)
        assert outcome.error.kind is ExecErrorKind.DUPLICATE_ID

    def test_undefined_reference(self):
        outcome = run_script("roles nothing promoter\n")
        assert outcome.error.kind is ExecErrorKind.UNDEFINED_REF

    def test_totality_on_garbage(self):
        for text in ("", "w@t", "component", "sub a", "precedes x y"):
            outcome = run_script(text)
            assert outcome.error is not None
            assert not outcome.ok


class TestEmit:
    def test_empty_document_gives_namespace_only(self):
        doc = CircuitDocument(namespace="https://x.test/", components={})
        assert emit_script(doc) == "namespace https://x.test/\n"

    def test_round_trip_all_types(self, specs):
        for spec in specs.values():
            outcome = run_script(emit_script(spec.document))
            assert outcome.ok
            assert outcome.document == spec.document

    def test_toggle_round_trip_keeps_both_inhibitions(self, specs):
        from gencircuit.circuit_types import CircuitType
        from gencircuit.model import InteractionType

        doc = run_script(specs[CircuitType.TOGGLE].script).document
        inhibitions = [
            i for _, i in doc.interactions_all() if i.itype is InteractionType.INHIBITION
        ]
        assert len(inhibitions) == 2

    def test_prefix_locality(self, specs):
        """Any prefix of a clean emitted script executes without error."""
        for spec in specs.values():
            lines = spec.script.splitlines()
            for cut in range(1, len(lines) + 1, max(1, len(lines) // 10)):
                outcome = run_script("\n".join(lines[:cut]) + "\n")
                assert outcome.ok, f"prefix of {spec.circuit_type} failed at line {cut}"
