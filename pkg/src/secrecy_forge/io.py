"""JSON file formats for distributions, phases, states, and protocol trees.

Every loader raises UsageError on malformed input so the CLI can map the
whole family to exit code 2.  Writers emit plain JSON trees with floats
rounded to 12 significant digits, which keeps golden files stable across
platforms without hiding real numeric drift.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from .dequantize import History, InstrumentTree
from .distributions import Dist3
from .embeddings import PhaseAssignment
from .errors import SecrecyForgeError, UsageError
from .qlinalg import QState

__all__ = [
    "jsonable",
    "json_text",
    "load_json",
    "dump_json",
    "load_dist",
    "dump_dist",
    "load_phases",
    "dump_phases",
    "load_state",
    "dump_state",
    "load_tree",
    "dump_tree",
    "sha256_file",
]

SIG_DIGITS = 12


def jsonable(obj: Any) -> Any:
    """Convert to plain JSON types, rounding floats to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(f"{float(obj):.{SIG_DIGITS}g}")
    if obj is None or isinstance(obj, str):
        return obj
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def json_text(obj: Any) -> str:
    return json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n"


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from exc


def dump_json(obj: Any, path: str | Path) -> None:
    Path(path).write_text(json_text(obj), encoding="utf-8")


def sha256_file(path: str | Path) -> str:
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from exc


def _require(cond: bool, path: str | Path, msg: str) -> None:
    if not cond:
        raise UsageError(f"{path}: {msg}")


def _int_list(doc: Any, path: str | Path, key: str, length: int) -> list[int]:
    val = doc.get(key) if isinstance(doc, dict) else None
    ok = (
        isinstance(val, list)
        and len(val) == length
        and all(isinstance(v, int) and v >= 1 for v in val)
    )
    _require(ok, path, f"'{key}' must be a list of {length} positive integers")
    return list(val)


# ---------------------------------------------------------------------------
# distributions and phases


def load_dist(path: str | Path) -> Dist3:
    """Dense {"dims", "p"} or sparse {"dims", "entries"}; unlisted entries zero."""
    doc = load_json(path)
    _require(isinstance(doc, dict), path, "top level must be an object")
    dims = _int_list(doc, path, "dims", 3)
    if "p" in doc:
        try:
            p = np.asarray(doc["p"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise UsageError(f"{path}: 'p' is not a numeric array ({exc})") from exc
        _require(
            p.shape == tuple(dims), path, f"'p' has shape {p.shape}, dims say {dims}"
        )
    elif "entries" in doc:
        entries = doc["entries"]
        _require(isinstance(entries, list), path, "'entries' must be a list")
        p = np.zeros(dims)
        seen: set[tuple[int, int, int]] = set()
        for e in entries:
            try:
                key = (int(e["x"]), int(e["y"]), int(e["z"]))
                val = float(e["p"])
            except (KeyError, TypeError, ValueError) as exc:
                raise UsageError(f"{path}: bad entry {e!r}") from exc
            _require(key not in seen, path, f"duplicate entry at {key}")
            ok = all(0 <= k < dim for k, dim in zip(key, dims))
            _require(ok, path, f"entry {key} outside dims {dims}")
            seen.add(key)
            p[key] = val
    else:
        raise UsageError(f"{path}: need either 'p' or 'entries'")
    try:
        return Dist3(p)
    except SecrecyForgeError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def dump_dist(d: Dist3) -> dict:
    return {"dims": list(d.dims), "p": d.p}


def load_phases(path: str | Path, dims: tuple[int, int, int]) -> PhaseAssignment:
    """Sparse {"entries": [{"x","y","z","phi"}]}; dims come from the distribution."""
    doc = load_json(path)
    _require(isinstance(doc, dict), path, "top level must be an object")
    if "dims" in doc:
        file_dims = _int_list(doc, path, "dims", 3)
        _require(
            tuple(file_dims) == tuple(dims),
            path,
            f"phase dims {file_dims} do not match distribution dims {list(dims)}",
        )
    entries = doc.get("entries")
    _require(isinstance(entries, list), path, "'entries' must be a list")
    try:
        return PhaseAssignment.from_entries(tuple(dims), entries)
    except SecrecyForgeError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def dump_phases(phases: PhaseAssignment) -> dict:
    return phases.to_json()


# ---------------------------------------------------------------------------
# states


def _matrix(doc: Any, path: str | Path, where: str) -> np.ndarray:
    _require(isinstance(doc, dict) and "re" in doc, path, f"{where}: need 're'")
    try:
        re = np.asarray(doc["re"], dtype=float)
        im = np.asarray(doc.get("im", np.zeros_like(re)), dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"{path}: {where}: not numeric ({exc})") from exc
    _require(re.ndim == 2, path, f"{where}: 're' must be a matrix")
    _require(im.shape == re.shape, path, f"{where}: 'im' shape differs from 're'")
    return re + 1j * im


def load_state(path: str | Path) -> QState:
    """Density matrix as {"dims", "re", "im"}; "im" may be omitted."""
    doc = load_json(path)
    _require(isinstance(doc, dict), path, "top level must be an object")
    dims = doc.get("dims")
    ok = (
        isinstance(dims, list)
        and len(dims) >= 1
        and all(isinstance(v, int) and v >= 1 for v in dims)
    )
    _require(ok, path, "'dims' must be a list of positive integers")
    rho = _matrix(doc, path, "state")
    dim = int(np.prod(dims))
    _require(
        rho.shape == (dim, dim),
        path,
        f"state is {rho.shape[0]}x{rho.shape[1]}, dims {dims} require {dim}x{dim}",
    )
    try:
        return QState(rho, tuple(dims))
    except SecrecyForgeError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def dump_state(state: QState) -> dict:
    return {
        "dims": list(state.dims),
        "re": np.real(state.rho),
        "im": np.imag(state.rho),
    }


# ---------------------------------------------------------------------------
# instrument trees


def _parse_history(key: str, path: str | Path) -> History:
    if key == "":
        return ()
    try:
        return tuple(int(part) for part in key.split(","))
    except ValueError as exc:
        raise UsageError(f"{path}: bad history key {key!r}") from exc


def _history_key(h: History) -> str:
    return ",".join(str(m) for m in h)


def _kraus_list(doc: Any, path: str | Path, where: str) -> tuple[np.ndarray, ...]:
    _require(isinstance(doc, list) and doc, path, f"{where}: need a list of matrices")
    return tuple(_matrix(m, path, where) for m in doc)


def load_tree(path: str | Path) -> InstrumentTree:
    """Nodes keyed by comma-joined history strings (root ""), Kraus as re/im."""
    doc = load_json(path)
    _require(isinstance(doc, dict), path, "top level must be an object")
    for key in ("rounds", "dim_a", "dim_b"):
        _require(
            isinstance(doc.get(key), int), path, f"'{key}' must be an integer"
        )
    for key in ("nodes", "leaf_a", "leaf_b"):
        _require(isinstance(doc.get(key), dict), path, f"'{key}' must be an object")
    instruments: dict[History, tuple[tuple[np.ndarray, ...], ...]] = {}
    for key, node in doc["nodes"].items():
        h = _parse_history(key, path)
        where = f"nodes[{key!r}]"
        _require(isinstance(node, list) and node, path, f"{where}: need outcomes")
        instruments[h] = tuple(
            _kraus_list(outcome, path, f"{where}[{i}]")
            for i, outcome in enumerate(node)
        )
    leaves: dict[str, dict[History, tuple[np.ndarray, ...]]] = {}
    for key in ("leaf_a", "leaf_b"):
        leaves[key] = {
            _parse_history(k, path): _kraus_list(v, path, f"{key}[{k!r}]")
            for k, v in doc[key].items()
        }
    try:
        return InstrumentTree(
            rounds=doc["rounds"],
            dim_a=doc["dim_a"],
            dim_b=doc["dim_b"],
            instruments=instruments,
            leaf_a=leaves["leaf_a"],
            leaf_b=leaves["leaf_b"],
        )
    except SecrecyForgeError as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _dump_matrix(op: np.ndarray) -> dict:
    return {"re": np.real(op), "im": np.imag(op)}


def dump_tree(tree: InstrumentTree) -> dict:
    return {
        "rounds": tree.rounds,
        "dim_a": tree.dim_a,
        "dim_b": tree.dim_b,
        "nodes": {
            _history_key(h): [[_dump_matrix(k) for k in outcome] for outcome in node]
            for h, node in tree.instruments.items()
        },
        "leaf_a": {
            _history_key(h): [_dump_matrix(k) for k in ops]
            for h, ops in tree.leaf_a.items()
        },
        "leaf_b": {
            _history_key(h): [_dump_matrix(k) for k in ops]
            for h, ops in tree.leaf_b.items()
        },
    }
