import pytest

from gencircuit.library import (
    LibraryError,
    PartKind,
    Tier,
    emit_parts_file,
    load_parts_library,
    parse_parts_file,
)
from gencircuit.model import (
    CircuitDocument,
    Component,
    Constraint,
    DocumentError,
    EntityType,
    Role,
    SubComponent,
    deserialize_document,
    serialize_document,
    validate_document,
)


class TestBuiltinLibrary:
    def test_catalog_counts(self, library):
        assert len(library.parts) == 48
        assert len(library.of_kind(PartKind.PROMOTER)) == 17
        assert len(library.of_kind(PartKind.RBS)) == 4
        assert len(library.of_kind(PartKind.CDS)) == 14
        assert len(library.of_kind(PartKind.TERMINATOR)) == 3
        assert len(library.of_kind(PartKind.OPERATOR)) == 10
        assert len(library.cognate_pairs) == 10

    def test_training_tier_pairs(self, library):
        training = library.filter_tier(Tier.TRAINING)
        reps = {training.parts[r].name for r, _ in training.cognate_pairs}
        assert reps == {"LacI", "TetR", "cI", "PhlF", "SrpR"}

    def test_held_out_tier_pairs(self, library):
        held = library.filter_tier(Tier.HELD_OUT)
        reps = {held.parts[r].name for r, _ in held.cognate_pairs}
        assert reps == {"BM3R1", "AmtR", "QacR", "BetI", "AmeR"}

    def test_tier_partition(self, library):
        training = {p.id for p in library.parts.values() if p.tier is Tier.TRAINING}
        held = {p.id for p in library.parts.values() if p.tier is Tier.HELD_OUT}
        assert training | held == set(library.parts)
        assert not (training & held)

    def test_synthetic_hybrids_outside_core(self, library):
        assert len(library.synthetic) == 4
        assert all(p.has("synthetic_hybrid") for p in library.synthetic.values())
        assert not set(library.synthetic) & set(library.parts)

    def test_every_repressible_promoter_has_cognate(self, library):
        for part in library.parts.values():
            if part.kind is PartKind.PROMOTER and part.cognate_repressors():
                for rep_id in part.cognate_repressors():
                    rep = library.parts[rep_id]
                    assert rep.kind is PartKind.CDS

    def test_hill_fixtures_within_documented_ranges(self, library):
        assert len(library.hill) == 10
        for h in library.hill.values():
            assert 0.01 <= h.y_min <= 0.1
            assert 1.0 <= h.y_max <= 5.0
            assert 0.1 <= h.K <= 1.0
            assert 1.5 <= h.n <= 4.0

    def test_parts_file_round_trip(self, library, tmp_path):
        text = emit_parts_file(library)
        path = tmp_path / "parts.txt"
        path.write_text(text)
        again = load_parts_library(path)
        assert set(again.parts) == set(library.parts)
        assert again.cognate_pairs == tuple(sorted(library.cognate_pairs))
        assert again.hill == library.hill

    def test_broken_cognate_pair_is_integrity_error(self):
        text = (
            "gencircuit-parts v1\n"
            "part-def promX promoter tier=training props=repressible "
            "cognate=repY mode=repressible strength=1.0 name=promX\n"
        )
        with pytest.raises(LibraryError, match="promX"):
            parse_parts_file(text)

    def test_malformed_file_names_line(self):
        text = "gencircuit-parts v1\npart-def broken\n"
        with pytest.raises(LibraryError, match="line 2"):
            parse_parts_file(text)


def _gfp_cassette_doc() -> CircuitDocument:
    parts = {
        "p": ("J23100", Role.PROMOTER),
        "r": ("B0032", Role.RBS),
        "g": ("GFP", Role.CDS),
        "t": ("DT", Role.TERMINATOR),
    }
    comps = {
        cid: Component(id=cid, entity_type=EntityType.DNA, roles=(role,), name=name)
        for cid, (name, role) in parts.items()
    }
    comps["cas"] = Component(
        id="cas",
        entity_type=EntityType.DNA,
        roles=(Role.ENGINEERED_REGION,),
        name="cas",
        features=tuple(SubComponent(c) for c in ("p", "r", "g", "t")),
        constraints=(
            Constraint("p", "r"),
            Constraint("r", "g"),
            Constraint("g", "t"),
        ),
    )
    return CircuitDocument(namespace="https://gencircuit.dev/", components=comps)


class TestSerialization:
    def test_empty_document_bytes_stable(self):
        doc = CircuitDocument(namespace="https://x.test/", components={})
        assert serialize_document(doc) == serialize_document(doc)
        assert serialize_document(doc) == b"gencircuit-doc v1\nnamespace https://x.test/\n"

    def test_cassette_round_trip(self):
        doc = _gfp_cassette_doc()
        assert deserialize_document(serialize_document(doc)) == doc

    def test_component_insertion_order_does_not_matter(self):
        doc = _gfp_cassette_doc()
        reordered = CircuitDocument(
            namespace=doc.namespace,
            components={cid: doc.components[cid] for cid in reversed(list(doc.components))},
        )
        assert serialize_document(doc) == serialize_document(reordered)
        assert doc == reordered

    def test_generated_documents_round_trip(self, specs):
        for spec in specs.values():
            data = serialize_document(spec.document)
            assert deserialize_document(data) == spec.document

    def test_dangling_reference_rejected(self):
        payload = (
            "gencircuit-doc v1\n"
            "component cas dna roles=engineered_region name=cas\n"
            "sub cas missing\n"
        ).encode()
        with pytest.raises(DocumentError, match="missing"):
            deserialize_document(payload)

    def test_duplicate_id_rejected(self):
        payload = (
            "gencircuit-doc v1\n"
            "component a dna roles=promoter name=x\n"
            "component a dna roles=promoter name=x\n"
        ).encode()
        with pytest.raises(DocumentError, match="duplicate"):
            deserialize_document(payload)


class TestValidation:
    def test_canonical_cassette_valid(self):
        assert validate_document(_gfp_cassette_doc()) == []

    def test_empty_feature_component_named(self):
        doc = _gfp_cassette_doc()
        comps = dict(doc.components)
        comps["ghost"] = Component(id="ghost", entity_type=EntityType.DNA)
        cas = comps["cas"]
        comps["cas"] = Component(
            id=cas.id, entity_type=cas.entity_type, roles=cas.roles, name=cas.name,
            features=cas.features + (SubComponent("ghost"),), constraints=cas.constraints,
        )
        diags = validate_document(CircuitDocument(doc.namespace, comps))
        assert any("ghost" in d for d in diags)

    def test_containment_cycle_detected(self):
        comps = {
            "a": Component(
                id="a", entity_type=EntityType.DNA, roles=(Role.ENGINEERED_REGION,),
                features=(SubComponent("b"),),
            ),
            "b": Component(
                id="b", entity_type=EntityType.DNA, roles=(Role.ENGINEERED_REGION,),
                features=(SubComponent("a"),),
            ),
        }
        diags = validate_document(CircuitDocument("ns", comps))
        assert any("containment cycle" in d for d in diags)
