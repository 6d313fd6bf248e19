"""Finite-dimensional density-operator primitives.

States carry an explicit tuple of subsystem dimensions; every operation
that addresses subsystems does so by index into that tuple.  Entropies
are in bits.  Validation tolerances follow ``config.STATE_TOL``; the
total dimension is capped (``caps.rho_dim``) so a misconstructed tensor
power fails fast instead of allocating gigabytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from . import config
from .errors import DimensionCapExceeded, InvalidState, SecrecyForgeError

__all__ = [
    "QState",
    "PureState",
    "tensor",
    "partial_trace",
    "dephase",
    "hermitian_eigs",
    "von_neumann_entropy",
    "trace_distance",
    "cond_mutual_info_q",
]

EIG_CLIP = 1e-12
EIG_NEGATIVE_ERROR = -1e-8


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


def _check_dims(dims: Sequence[int], total: int) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InvalidState(f"bad subsystem dimensions {dims}")
    if math.prod(dims) != total:
        raise InvalidState(
            f"dimensions {dims} do not match operator size {total}"
        )
    cap = config.load_caps().rho_dim
    if total > cap:
        raise DimensionCapExceeded(f"density operator dimension {total} > cap {cap}")
    return dims


@dataclass(frozen=True)
class QState:
    """Density operator with named subsystem dimensions."""

    rho: np.ndarray
    dims: tuple[int, ...]
    tol: float = config.STATE_TOL

    def __post_init__(self) -> None:
        rho = _frozen(self.rho)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise InvalidState(f"density operator must be square, got {rho.shape}")
        dims = _check_dims(self.dims, rho.shape[0])
        if np.abs(rho - rho.conj().T).max() > self.tol:
            raise InvalidState("density operator is not Hermitian")
        tr = complex(np.trace(rho))
        if abs(tr - 1.0) > self.tol:
            raise InvalidState(f"trace is {tr}, expected 1")
        w = np.linalg.eigvalsh(rho)
        if w.min() < EIG_NEGATIVE_ERROR:
            raise InvalidState(f"negative eigenvalue {w.min():.3e}")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def eigenvalues(self) -> np.ndarray:
        w = np.linalg.eigvalsh(self.rho)[::-1]
        return np.clip(w, 0.0, None)


@dataclass(frozen=True)
class PureState:
    """State vector with named subsystem dimensions."""

    amp: np.ndarray
    dims: tuple[int, ...]
    tol: float = config.STATE_TOL

    def __post_init__(self) -> None:
        amp = _frozen(self.amp).ravel()
        dims = _check_dims(self.dims, amp.size)
        nrm = float(np.linalg.norm(amp))
        if abs(nrm - 1.0) > self.tol:
            raise InvalidState(f"norm is {nrm}, expected 1")
        object.__setattr__(self, "amp", amp)
        object.__setattr__(self, "dims", dims)

    def density(self) -> QState:
        return QState(np.outer(self.amp, self.amp.conj()), self.dims)


def tensor(*states: QState) -> QState:
    """Tensor product in the order given."""
    if not states:
        raise SecrecyForgeError("tensor() needs at least one state")
    rho = reduce(np.kron, (s.rho for s in states))
    dims = tuple(d for s in states for d in s.dims)
    return QState(rho, dims)


def _subsystem_letters(n: int) -> tuple[list[str], list[str]]:
    letters = "abcdefghijklmnopqrstuvwxyz"
    if 2 * n > len(letters):
        raise SecrecyForgeError(f"too many subsystems ({n})")
    return list(letters[:n]), list(letters[n : 2 * n])


def partial_trace(state: QState, keep: Sequence[int]) -> QState:
    """Trace out everything except ``keep``, reordered as listed."""
    n = len(state.dims)
    keep = tuple(int(k) for k in keep)
    if len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise SecrecyForgeError(f"bad subsystem list {keep} for {n} subsystems")
    rows, cols = _subsystem_letters(n)
    for k in range(n):
        if k not in keep:
            cols[k] = rows[k]
    src = "".join(rows) + "".join(cols)
    dst = "".join(rows[k] for k in keep) + "".join(cols[k] for k in keep)
    r = state.rho.reshape(state.dims + state.dims)
    out = np.einsum(f"{src}->{dst}", r)
    d_out = math.prod(state.dims[k] for k in keep) if keep else 1
    return QState(out.reshape(d_out, d_out), tuple(state.dims[k] for k in keep) or (1,))


def dephase(state: QState, subsystem: int) -> QState:
    """Kill coherences of one subsystem in the computational basis."""
    n = len(state.dims)
    if subsystem < 0 or subsystem >= n:
        raise SecrecyForgeError(f"bad subsystem {subsystem} for {n} subsystems")
    dk = state.dims[subsystem]
    shape = [1] * (2 * n)
    shape[subsystem] = dk
    shape[n + subsystem] = dk
    mask = np.eye(dk).reshape(shape)
    r = state.rho.reshape(state.dims + state.dims) * mask
    return QState(r.reshape(state.dim, state.dim), state.dims)


def hermitian_eigs(h: np.ndarray, tol: float = config.STATE_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and matching eigenvector columns.

    The decomposition is verified by reconstruction to 1e-9.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SecrecyForgeError(f"expected a square matrix, got {h.shape}")
    if np.abs(h - h.conj().T).max() > tol:
        raise SecrecyForgeError("matrix is not Hermitian")
    w, v = np.linalg.eigh(h)
    w, v = w[::-1], v[:, ::-1]
    err = np.abs((v * w) @ v.conj().T - h).max()
    if err > 1e-9:
        raise SecrecyForgeError(f"eigendecomposition reconstruction error {err:.3e}")
    return w, v


def von_neumann_entropy(state: QState) -> float:
    """S(rho) in bits; eigenvalues below 1e-12 count as zero."""
    w = np.linalg.eigvalsh(state.rho)
    if w.min() < EIG_NEGATIVE_ERROR:
        raise InvalidState(f"negative eigenvalue {w.min():.3e}")
    w = w[w > EIG_CLIP]
    return float(-(w * np.log2(w)).sum())


def trace_distance(a: QState, b: QState) -> float:
    """Half the trace norm of the difference."""
    if a.dims != b.dims:
        raise SecrecyForgeError(f"dimension mismatch: {a.dims} vs {b.dims}")
    w = np.linalg.eigvalsh(a.rho - b.rho)
    return float(0.5 * np.abs(w).sum())


def cond_mutual_info_q(
    state: QState,
    sys_a: Sequence[int],
    sys_b: Sequence[int],
    sys_e: Sequence[int] = (),
) -> float:
    """I(A:B|E) = S(AE) + S(BE) - S(ABE) - S(E) in bits; E may be empty."""
    groups = [tuple(sys_a), tuple(sys_b), tuple(sys_e)]
    flat = [k for g in groups for k in g]
    if len(set(flat)) != len(flat):
        raise SecrecyForgeError(f"subsystem groups overlap: {groups}")
    a, b, e = groups
    s_ae = von_neumann_entropy(partial_trace(state, a + e))
    s_be = von_neumann_entropy(partial_trace(state, b + e))
    s_abe = von_neumann_entropy(partial_trace(state, a + b + e))
    s_e = von_neumann_entropy(partial_trace(state, e)) if e else 0.0
    return s_ae + s_be - s_abe - s_e
