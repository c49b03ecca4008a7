import pytest

from gencircuit.circuit_types import CircuitType
from gencircuit.dataset import (
    CLASS_OF_TYPE,
    DatasetConfig,
    DatasetError,
    build_dataset,
    deduplicate,
    load_circuit,
    write_dataset,
)
from gencircuit.flaws import PerturbOperator, perturb
from gencircuit.generate import GenParams, generate_circuit
from gencircuit.graphs import IsoMode
from gencircuit.model import rename_components


class TestDeduplicate:
    def test_planted_renamed_duplicate_removed(self, library):
        spec = generate_circuit(GenParams(CircuitType.TOGGLE, seed=1), library)
        clone_doc = rename_components(
            spec.document, {cid: f"copy_{cid}" for cid in spec.document.components}
        )
        import dataclasses

        clone = dataclasses.replace(spec, document=clone_doc)
        result = deduplicate([spec, clone], IsoMode.ROLE_LABELED)
        assert result.kept_indices == [0]
        assert result.removed_pairs == [(1, 0)]

    def test_part_aware_keeps_part_swapped_variant(self, library):
        spec = generate_circuit(GenParams(CircuitType.TOGGLE, seed=1), library)
        swapped = perturb(spec, PerturbOperator.ISO_FUNCTIONAL, 1, 3, library)
        role = deduplicate([spec, swapped], IsoMode.ROLE_LABELED)
        aware = deduplicate([spec, swapped], IsoMode.PART_AWARE)
        assert len(role.kept) == 1
        assert len(aware.kept) == 2

    def test_all_distinct_kept(self, specs):
        pool = [specs[CircuitType.TOGGLE], specs[CircuitType.NOT_GATE], specs[CircuitType.FFL]]
        result = deduplicate(pool, IsoMode.ROLE_LABELED)
        assert result.kept == pool
        assert result.removed_pairs == []


class TestBuildDataset:
    def test_minimal_only_override(self, library):
        config = DatasetConfig(total=10, classes=("minimal",))
        ds = build_dataset(config, library, seed=4)
        assert len(ds.specs) == 10
        assert all(s.circuit_type is CircuitType.CASSETTE for s in ds.specs)
        seen = [i for idxs in ds.splits.values() for i in idxs]
        assert sorted(seen) == list(range(10))  # splits partition the set

    def test_manifest_deterministic(self, library):
        config = DatasetConfig(total=30)
        a = build_dataset(config, library, seed=6)
        b = build_dataset(config, library, seed=6)
        assert a.manifest() == b.manifest()

    def test_jobs_do_not_change_output(self, library):
        config = DatasetConfig(total=20)
        a = build_dataset(config, library, seed=2, jobs=1)
        b = build_dataset(config, library, seed=2, jobs=2)
        assert a.manifest() == b.manifest()

    def test_class_counts_largest_remainder(self, library):
        ds = build_dataset(DatasetConfig(total=40), library, seed=3)
        counts = {}
        for s in ds.specs:
            cls = CLASS_OF_TYPE[s.circuit_type]
            counts[cls] = counts.get(cls, 0) + 1
        assert counts == {"minimal": 4, "simple": 6, "moderate": 12, "cascaded": 8, "feedback": 10}

    def test_part_aware_distinct_within_dataset(self, library):
        ds = build_dataset(DatasetConfig(total=50), library, seed=8)
        result = deduplicate(ds.specs, IsoMode.PART_AWARE)
        assert result.removed_pairs == []

    def test_config_validation(self):
        with pytest.raises(DatasetError):
            DatasetConfig(total=0)
        with pytest.raises(DatasetError):
            DatasetConfig(split={"train": 0.5, "val": 0.2, "test": 0.2})


class TestDiskLayout:
    def test_write_and_load_round_trip(self, library, tmp_path):
        ds = build_dataset(DatasetConfig(total=12), library, seed=5)
        write_dataset(ds, tmp_path)
        assert (tmp_path / "manifest.txt").exists()
        for idx, spec in enumerate(ds.specs):
            loaded = load_circuit(tmp_path / f"circuit_{idx:04d}")
            assert loaded.document == spec.document
            assert loaded.script == spec.script
            assert loaded.circuit_type == spec.circuit_type
            assert loaded.ground_truth == spec.ground_truth
            assert loaded.kappa == spec.kappa
