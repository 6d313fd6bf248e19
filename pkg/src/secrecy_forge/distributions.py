"""Finite tripartite distributions and Shannon-information primitives.

A tripartite distribution p(x, y, z) is held dense as a float64 array with
axes ordered (x, y, z): Alice's symbol, Bob's symbol, Eve's symbol.  All
entropic quantities are in bits (log base 2) with the convention
0 * log 0 = 0.

The information functions at the bottom operate on plain arrays of any
rank so that callers can append derived variables (block labels, public
messages) as extra axes and group axes freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import config
from .errors import DimensionCapExceeded, InvalidChannel, InvalidDistribution

__all__ = [
    "Dist1",
    "Dist2",
    "Dist3",
    "Channel",
    "validate_pmf",
    "entropy_bits",
    "binary_entropy",
    "joint_marginal",
    "mutual_information",
    "conditional_mutual_information",
    "marginal",
    "conditional_xy_given_z",
    "product_power",
    "apply_channel_z",
]

_AXIS_NAMES = "xyz"


def validate_pmf(p: np.ndarray, tol: float = config.VALIDATION_TOL) -> list[str]:
    """Return a list of violation descriptions; empty means valid."""
    violations: list[str] = []
    arr = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(arr)):
        violations.append("non-finite entry")
        return violations
    low = arr.min(initial=0.0)
    if low < -tol:
        violations.append(f"negative entry {low!r}")
    total = float(arr.sum())
    if abs(total - 1.0) > tol:
        violations.append(f"sum {total!r} differs from 1 by more than tol={tol!r}")
    return violations


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


def _check(p: np.ndarray, ndim: int, tol: float) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != ndim:
        raise InvalidDistribution(f"expected a rank-{ndim} array, got rank {arr.ndim}")
    if min(arr.shape) < 1:
        raise InvalidDistribution("empty alphabet")
    violations = validate_pmf(arr, tol)
    if violations:
        raise InvalidDistribution("; ".join(violations))
    return _frozen(np.clip(arr, 0.0, None))


@dataclass(frozen=True)
class Dist1:
    """Distribution of a single variable."""

    p: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _check(self.p, 1, config.VALIDATION_TOL))

    @property
    def dim(self) -> int:
        return self.p.shape[0]

    def entropy(self) -> float:
        return entropy_bits(self.p)


@dataclass(frozen=True)
class Dist2:
    """Joint distribution of two variables, axes (x, y)."""

    p: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _check(self.p, 2, config.VALIDATION_TOL))

    @property
    def dims(self) -> tuple[int, int]:
        return self.p.shape  # type: ignore[return-value]

    def entropy(self) -> float:
        return entropy_bits(self.p)

    def mutual_information(self) -> float:
        return mutual_information(self.p, (0,), (1,))


@dataclass(frozen=True)
class Dist3:
    """Joint distribution of (x, y, z) = (Alice, Bob, Eve)."""

    p: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", _check(self.p, 3, config.VALIDATION_TOL))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.p.shape  # type: ignore[return-value]

    def entropy(self) -> float:
        return entropy_bits(self.p)

    def marginal(self, keep: str) -> "Dist1 | Dist2 | Dist3":
        return marginal(self, keep)

    def conditional_xy_given_z(self, z: int) -> Dist2:
        return conditional_xy_given_z(self, z)

    def cond_mutual_info_xy_given_z(self) -> float:
        """I(X:Y|Z) in bits."""
        return conditional_mutual_information(self.p, (0,), (1,), (2,))


@dataclass(frozen=True)
class Channel:
    """Row-stochastic map applied to Eve's symbol, k[z, zbar]."""

    k: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.k, dtype=float)
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise InvalidChannel("channel matrix must be 2-d and non-empty")
        if not np.all(np.isfinite(arr)):
            raise InvalidChannel("non-finite entry")
        if arr.min() < -config.VALIDATION_TOL:
            raise InvalidChannel(f"negative entry {arr.min()!r}")
        rows = arr.sum(axis=1)
        bad = np.abs(rows - 1.0).max()
        if bad > 1e-10:
            raise InvalidChannel(f"row sums deviate from 1 by {bad!r}")
        object.__setattr__(self, "k", _frozen(np.clip(arr, 0.0, None)))

    @property
    def in_dim(self) -> int:
        return self.k.shape[0]

    @property
    def out_dim(self) -> int:
        return self.k.shape[1]

    @classmethod
    def identity(cls, n: int) -> "Channel":
        return cls(np.eye(n))

    @classmethod
    def deterministic(cls, assignment: Sequence[int], out_dim: int | None = None) -> "Channel":
        """Channel z -> assignment[z]."""
        assignment = list(assignment)
        if out_dim is None:
            out_dim = max(assignment) + 1
        k = np.zeros((len(assignment), out_dim))
        for z, zbar in enumerate(assignment):
            if not 0 <= zbar < out_dim:
                raise InvalidChannel(f"output symbol {zbar} outside alphabet")
            k[z, zbar] = 1.0
        return cls(k)

    def is_deterministic(self) -> bool:
        return bool(np.all((self.k == 0.0) | (self.k == 1.0)))

    def assignment(self) -> list[int]:
        if not self.is_deterministic():
            raise InvalidChannel("channel is not deterministic")
        return [int(np.argmax(row)) for row in self.k]


# ---------------------------------------------------------------------------
# entropic quantities


def entropy_bits(p: Iterable[float] | np.ndarray) -> float:
    """Shannon entropy in bits of an arbitrary-shape probability array."""
    arr = np.asarray(p, dtype=float).ravel()
    pos = arr[arr > 0.0]
    if pos.size == 0:
        return 0.0
    return float(-np.dot(pos, np.log2(pos)))


def binary_entropy(x: float) -> float:
    """h(x) = -x log2 x - (1-x) log2 (1-x) on [0, 1]."""
    if not 0.0 <= x <= 1.0:
        raise InvalidDistribution(f"binary_entropy argument {x!r} outside [0, 1]")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def joint_marginal(p: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Marginalize a joint array onto the given axes (kept in listed order)."""
    arr = np.asarray(p, dtype=float)
    axes = tuple(axes)
    drop = tuple(a for a in range(arr.ndim) if a not in axes)
    out = arr.sum(axis=drop) if drop else arr
    # arr.sum keeps remaining axes in original order; permute to listed order.
    kept_sorted = tuple(sorted(axes))
    if kept_sorted != axes:
        out = np.transpose(out, [kept_sorted.index(a) for a in axes])
    return out


def _grouped_entropy(p: np.ndarray, groups: Sequence[Sequence[int]]) -> float:
    axes = tuple(a for g in groups for a in g)
    if len(set(axes)) != len(axes):
        raise InvalidDistribution("axis groups overlap")
    if not axes:
        return 0.0
    return entropy_bits(joint_marginal(p, tuple(sorted(axes))))


def mutual_information(p: np.ndarray, a_axes: Sequence[int], b_axes: Sequence[int]) -> float:
    """I(A:B) over an arbitrary grouping of axes of a joint array."""
    return conditional_mutual_information(p, a_axes, b_axes, ())


def conditional_mutual_information(
    p: np.ndarray,
    a_axes: Sequence[int],
    b_axes: Sequence[int],
    c_axes: Sequence[int],
) -> float:
    """I(A:B|C) = H(AC) + H(BC) - H(ABC) - H(C), axes grouped freely."""
    h_ac = _grouped_entropy(p, (a_axes, c_axes))
    h_bc = _grouped_entropy(p, (b_axes, c_axes))
    h_abc = _grouped_entropy(p, (a_axes, b_axes, c_axes))
    h_c = _grouped_entropy(p, (c_axes,))
    return h_ac + h_bc - h_abc - h_c


# ---------------------------------------------------------------------------
# structural operations


def marginal(d: Dist3, keep: str) -> Dist1 | Dist2 | Dist3:
    """Marginal onto a subset of {x, y, z}, e.g. keep="xy" or keep="z"."""
    keep = keep.lower()
    if not keep or any(c not in _AXIS_NAMES for c in keep) or len(set(keep)) != len(keep):
        raise InvalidDistribution(f"bad marginal axes {keep!r}")
    axes = tuple(_AXIS_NAMES.index(c) for c in sorted(keep, key=_AXIS_NAMES.index))
    arr = joint_marginal(d.p, axes)
    if arr.ndim == 1:
        return Dist1(arr)
    if arr.ndim == 2:
        return Dist2(arr)
    return Dist3(arr)


def conditional_xy_given_z(
    d: Dist3, z: int, support_eps: float = config.SUPPORT_EPS
) -> Dist2:
    """p(x, y | z) as a Dist2; requires p_Z(z) > support_eps."""
    if not 0 <= z < d.dims[2]:
        raise InvalidDistribution(f"z={z} outside alphabet of size {d.dims[2]}")
    slice_ = d.p[:, :, z]
    mass = float(slice_.sum())
    if mass <= support_eps:
        raise InvalidDistribution(f"conditioning on z={z} with p_Z(z)={mass!r}")
    return Dist2(slice_ / mass)


def product_power(d: Dist3, n: int, cap: int | None = None) -> Dist3:
    """i.i.d. power p^(x^n, y^n, z^n); joint alphabet capped for safety.

    Composite symbols are mixed-radix encoded most-significant copy first,
    e.g. for n=2 the x-symbol (x1, x2) becomes x1 * dx + x2.
    """
    if n < 1:
        raise InvalidDistribution("power must be >= 1")
    if cap is None:
        cap = config.load_caps().product_states
    dx, dy, dz = d.dims
    total = (dx * dy * dz) ** n
    if total > cap:
        raise DimensionCapExceeded(
            f"product power would hold {total} joint states, cap is {cap}"
        )
    out = d.p
    for _ in range(n - 1):
        out = np.einsum("abc,def->adbecf", out, d.p).reshape(
            out.shape[0] * dx, out.shape[1] * dy, out.shape[2] * dz
        )
    return Dist3(out)


def apply_channel_z(d: Dist3, ch: Channel) -> Dist3:
    """Push Eve's symbol through a stochastic channel: q(x,y,zbar)."""
    if ch.in_dim != d.dims[2]:
        raise InvalidChannel(
            f"channel input alphabet {ch.in_dim} does not match |Z|={d.dims[2]}"
        )
    return Dist3(np.einsum("xyz,zw->xyw", d.p, ch.k))
