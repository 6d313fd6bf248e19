"""JSON round trips and input validation for every on-disk format."""

import hashlib
import json
import math

import numpy as np
import pytest

from secrecy_forge.dequantize import random_instrument_tree, verify_equivalence
from secrecy_forge.embeddings import PhaseAssignment
from secrecy_forge.errors import UsageError
from secrecy_forge.io import (
    dump_dist,
    dump_json,
    dump_phases,
    dump_state,
    dump_tree,
    json_text,
    load_dist,
    load_phases,
    load_state,
    load_tree,
    sha256_file,
)
from secrecy_forge.qlinalg import QState


class TestDist:
    def test_dense_round_trip(self, tmp_path, make_dist):
        d = make_dist((2, 3, 2), sparsity=0.3)
        path = tmp_path / "d.json"
        dump_json(dump_dist(d), path)
        back = load_dist(path)
        assert back.dims == d.dims
        np.testing.assert_allclose(back.p, d.p, rtol=1e-11, atol=1e-15)

    def test_sparse_load(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({
            "dims": [2, 2, 2],
            "entries": [
                {"x": 0, "y": 0, "z": 0, "p": 0.5},
                {"x": 1, "y": 1, "z": 1, "p": 0.5},
            ],
        }))
        d = load_dist(path)
        assert d.p[0, 0, 0] == 0.5
        assert d.p[1, 1, 1] == 0.5
        assert d.p.sum() == 1.0

    def test_sparse_rejects_duplicate_cell(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({
            "dims": [2, 2, 2],
            "entries": [
                {"x": 0, "y": 0, "z": 0, "p": 0.5},
                {"x": 0, "y": 0, "z": 0, "p": 0.5},
            ],
        }))
        with pytest.raises(UsageError):
            load_dist(path)

    def test_sparse_rejects_out_of_range_index(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({
            "dims": [2, 2, 2],
            "entries": [{"x": 2, "y": 0, "z": 0, "p": 1.0}],
        }))
        with pytest.raises(UsageError):
            load_dist(path)

    def test_rejects_unnormalized_mass(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"dims": [1, 1, 1], "p": [[[0.7]]]}))
        with pytest.raises(UsageError):
            load_dist(path)

    def test_rejects_shape_mismatch(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"dims": [2, 2, 2], "p": [[[0.5]]]}))
        with pytest.raises(UsageError):
            load_dist(path)

    def test_rejects_missing_payload(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(json.dumps({"dims": [2, 2, 2]}))
        with pytest.raises(UsageError):
            load_dist(path)

    def test_rejects_invalid_json(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text("{not json")
        with pytest.raises(UsageError):
            load_dist(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            load_dist(tmp_path / "absent.json")


class TestPhases:
    def test_round_trip(self, tmp_path):
        phases = PhaseAssignment.from_entries(
            (2, 2, 2),
            [{"x": 0, "y": 1, "z": 0, "phi": math.pi},
             {"x": 1, "y": 0, "z": 1, "phi": 0.25}],
        )
        path = tmp_path / "phi.json"
        dump_json(dump_phases(phases), path)
        back = load_phases(path, (2, 2, 2))
        np.testing.assert_allclose(back.phi, phases.phi, rtol=1e-11, atol=1e-15)

    def test_rejects_dims_mismatch(self, tmp_path):
        path = tmp_path / "phi.json"
        path.write_text(json.dumps({
            "dims": [2, 2, 2],
            "entries": [{"x": 0, "y": 0, "z": 0, "phi": 1.0}],
        }))
        with pytest.raises(UsageError):
            load_phases(path, (2, 2, 3))


class TestState:
    def test_round_trip_complex(self, tmp_path, make_density):
        st = make_density((2, 2))
        path = tmp_path / "rho.json"
        dump_json(dump_state(st), path)
        back = load_state(path)
        assert back.dims == (2, 2)
        np.testing.assert_allclose(back.rho, st.rho, rtol=1e-11, atol=1e-13)

    def test_imaginary_part_optional(self, tmp_path):
        path = tmp_path / "rho.json"
        path.write_text(json.dumps({
            "dims": [2], "re": [[0.5, 0.0], [0.0, 0.5]],
        }))
        st = load_state(path)
        np.testing.assert_allclose(st.rho, np.eye(2) / 2)

    def test_rejects_dims_product_mismatch(self, tmp_path):
        path = tmp_path / "rho.json"
        path.write_text(json.dumps({
            "dims": [2, 2], "re": [[0.5, 0.0], [0.0, 0.5]],
        }))
        with pytest.raises(UsageError):
            load_state(path)

    def test_rejects_non_state_matrix(self, tmp_path):
        path = tmp_path / "rho.json"
        path.write_text(json.dumps({
            "dims": [2], "re": [[1.5, 0.0], [0.0, -0.5]],
        }))
        with pytest.raises(UsageError):
            load_state(path)


class TestTree:
    def test_round_trip_keeps_equivalence(self, tmp_path, rng, make_dist):
        tree = random_instrument_tree(2, 2, rounds=2, outcomes=2,
                                      kraus_each=2, rng=rng)
        path = tmp_path / "tree.json"
        dump_json(dump_tree(tree), path)
        back = load_tree(path)
        assert back.rounds == tree.rounds
        assert back.histories() == tree.histories()
        assert verify_equivalence(back, make_dist((2, 2, 2))) <= 1e-9

    def test_dump_is_idempotent_after_reload(self, tmp_path, rng):
        tree = random_instrument_tree(2, 2, rounds=2, outcomes=2, rng=rng)
        first = tmp_path / "a.json"
        second = tmp_path / "b.json"
        dump_json(dump_tree(tree), first)
        dump_json(dump_tree(load_tree(first)), second)
        assert first.read_bytes() == second.read_bytes()

    def test_rejects_non_trace_preserving_node(self, tmp_path):
        doc = {
            "rounds": 2, "dim_a": 2, "dim_b": 2,
            "nodes": {"": [[{"re": [[0.9, 0.0], [0.0, 0.9]]}]],
                      "0": [[{"re": [[1.0, 0.0], [0.0, 1.0]]}]]},
            "leaf_a": {"0,0": [{"re": [[1.0, 0.0], [0.0, 1.0]]}]},
            "leaf_b": {"0,0": [{"re": [[1.0, 0.0], [0.0, 1.0]]}]},
        }
        path = tmp_path / "tree.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(UsageError):
            load_tree(path)

    def test_rejects_malformed_history_key(self, tmp_path):
        doc = {
            "rounds": 0, "dim_a": 2, "dim_b": 2, "nodes": {},
            "leaf_a": {"x": [{"re": [[1.0, 0.0], [0.0, 1.0]]}]},
            "leaf_b": {"": [{"re": [[1.0, 0.0], [0.0, 1.0]]}]},
        }
        path = tmp_path / "tree.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(UsageError):
            load_tree(path)


class TestJsonText:
    def test_sorted_keys_and_trailing_newline(self):
        text = json_text({"b": 1, "a": QState(np.eye(2) / 2, (2,)).rho[0, 0].real})
        assert text.endswith("\n")
        assert text.index('"a"') < text.index('"b"')

    def test_floats_trimmed_to_twelve_digits(self):
        text = json_text({"v": 1 / 3})
        assert "0.333333333333" in text
        assert "0.3333333333333333" not in text

    def test_numpy_scalars_serializable(self, tmp_path):
        doc = {"i": np.int64(3), "f": np.float64(0.5),
               "arr": np.arange(3), "c": True, "n": None}
        path = tmp_path / "doc.json"
        dump_json(doc, path)
        assert json.loads(path.read_text()) == {
            "i": 3, "f": 0.5, "arr": [0, 1, 2], "c": True, "n": None,
        }


class TestSha256:
    def test_matches_hashlib(self, tmp_path):
        path = tmp_path / "blob.bin"
        path.write_bytes(b"abc123")
        assert sha256_file(path) == hashlib.sha256(b"abc123").hexdigest()

    def test_missing_file(self, tmp_path):
        with pytest.raises(UsageError):
            sha256_file(tmp_path / "absent.bin")
