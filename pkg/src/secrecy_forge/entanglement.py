"""Entanglement measures for small bipartite states.

Closed forms where they exist (pure-state entropy, two-qubit concurrence
and formation), numerical upper bounds elsewhere:

* entanglement of formation via gradient descent over pure-state
  ensembles in the purification-isometry parametrization;
* relative entropy of entanglement via a parametrized separable state
  (mixture of product vectors) minimized with L-BFGS;
* squashed entanglement only as the classical-extension upper bound
  (1/2) sum_zbar p(zbar) I(A:B) per block.

Every result is tagged exact / upper_bound / lower_bound; optimizer
outputs are never tagged exact.  Values are in bits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .distributions import binary_entropy
from .errors import EnsembleMismatch, InvalidState, SecrecyForgeError
from .qlinalg import (
    PureState,
    QState,
    partial_trace,
    von_neumann_entropy,
)

__all__ = [
    "MeasureResult",
    "entanglement_entropy",
    "concurrence_2q",
    "eof_2q",
    "eof_ensemble_value",
    "eof_numeric",
    "esq_classical_extension_bound",
    "rel_ent_upper",
    "negativity_log",
]

LN2 = math.log(2.0)
EIG_FLOOR = 1e-30
OPT_DIM_CAP = 16


@dataclass(frozen=True)
class MeasureResult:
    """A named entanglement quantity with its epistemic status."""

    name: str
    value: float
    kind: str  # exact | upper_bound | lower_bound | inconclusive
    method: str
    diagnostics: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.value < -1e-12:
            raise SecrecyForgeError(f"negative measure value {self.value}")
        object.__setattr__(self, "value", max(0.0, float(self.value)))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "value": self.value,
            "kind": self.kind,
            "method": self.method,
            "diagnostics": self.diagnostics,
        }


def _require_bipartite(dims: tuple[int, ...], what: str) -> tuple[int, int]:
    if len(dims) != 2:
        raise SecrecyForgeError(f"{what} expects a bipartite state, got dims {dims}")
    return dims[0], dims[1]


def _schmidt_entropy(amp: np.ndarray, da: int, db: int) -> float:
    s = np.linalg.svd(amp.reshape(da, db), compute_uv=False)
    w = s * s
    w = w[w > 1e-12]
    return float(-(w * np.log2(w)).sum())


def entanglement_entropy(s: PureState) -> MeasureResult:
    """Reduced-state entropy of a bipartite pure state (exact)."""
    da, db = _require_bipartite(s.dims, "entanglement_entropy")
    return MeasureResult(
        name="E_entropy",
        value=_schmidt_entropy(s.amp, da, db),
        kind="exact",
        method="schmidt",
    )


_PAULI_YY = np.array(
    [
        [0, 0, 0, -1],
        [0, 0, 1, 0],
        [0, 1, 0, 0],
        [-1, 0, 0, 0],
    ],
    dtype=complex,
)


def concurrence_2q(rho: QState) -> MeasureResult:
    """Two-qubit concurrence C = max(0, l1-l2-l3-l4) (exact)."""
    if rho.dims != (2, 2):
        raise SecrecyForgeError(f"concurrence needs dims (2,2), got {rho.dims}")
    r = rho.rho
    m = r @ _PAULI_YY @ r.conj() @ _PAULI_YY
    w = np.linalg.eigvals(m)
    lam = np.sqrt(np.clip(np.real(w), 0.0, None))
    lam.sort()
    c = lam[3] - lam[2] - lam[1] - lam[0]
    return MeasureResult(
        name="concurrence",
        value=max(0.0, float(c)),
        kind="exact",
        method="wootters-spectrum",
    )


def eof_2q(rho: QState) -> MeasureResult:
    """Two-qubit entanglement of formation from the concurrence (exact)."""
    c = concurrence_2q(rho).value
    val = binary_entropy((1.0 + math.sqrt(max(0.0, 1.0 - c * c))) / 2.0)
    return MeasureResult(
        name="E_F",
        value=val,
        kind="exact",
        method="wootters",
        diagnostics={"concurrence": c},
    )


def eof_ensemble_value(
    rho: QState, ensemble: list[tuple[float, PureState]]
) -> MeasureResult:
    """Average entanglement of a supplied pure-state ensemble (upper bound)."""
    da, db = _require_bipartite(rho.dims, "eof_ensemble_value")
    mix = np.zeros_like(rho.rho)
    total = 0.0
    value = 0.0
    for p, psi in ensemble:
        if p < -1e-12:
            raise EnsembleMismatch(f"negative ensemble weight {p}")
        if psi.dims != rho.dims:
            raise EnsembleMismatch(f"member dims {psi.dims} != state dims {rho.dims}")
        mix += p * np.outer(psi.amp, psi.amp.conj())
        total += p
        value += p * _schmidt_entropy(psi.amp, da, db)
    if abs(total - 1.0) > 1e-9 or np.abs(mix - rho.rho).max() > 1e-9:
        raise EnsembleMismatch("ensemble does not average to the given state")
    return MeasureResult(
        name="E_F", value=value, kind="upper_bound", method="given-ensemble"
    )


def _ensemble_energy_grad(
    u: np.ndarray, w: np.ndarray, da: int, db: int
) -> tuple[float, np.ndarray]:
    """Average ensemble entanglement and its euclidean Wirtinger gradient.

    u: (m, r) isometry; w: (d, r) square-root eigenvector matrix of rho.
    Member j of the ensemble is c_j = w @ conj(u[j]); the value is
    sum_j [ -tr K_j log2 K_j + p_j log2 p_j ] with K_j = M_j M_j^dag,
    M_j the (da, db) reshape of c_j and p_j = tr K_j.
    """
    m = u.shape[0]
    c = u.conj() @ w.T  # rows are unnormalized member vectors
    mats = c.reshape(m, da, db)
    k = mats @ mats.conj().transpose(0, 2, 1)
    ev, vec = np.linalg.eigh(k)
    ev = np.clip(ev, 0.0, None)
    p = ev.sum(axis=1)
    p_safe = np.maximum(p, EIG_FLOOR)
    ev_safe = np.maximum(ev, EIG_FLOOR)
    value = float((-ev * np.log2(ev_safe)).sum() + (p * np.log2(p_safe)).sum())
    # G_j = (log2(p_j) I - log2 K_j) M_j, via the eigenbasis of K_j
    scale = np.log2(p_safe)[:, None] - np.log2(ev_safe)
    inner = vec.conj().transpose(0, 2, 1) @ mats
    g = vec @ (scale[:, :, None] * inner)
    g_flat = g.reshape(m, da * db)
    grad_u = g_flat.conj() @ w  # d E / d conj(U)
    return value, grad_u


def _stiefel_project(u: np.ndarray, g: np.ndarray) -> np.ndarray:
    s = u.conj().T @ g
    return g - u @ ((s + s.conj().T) / 2.0)


def _qr_retract(u: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(u)
    ph = np.diagonal(r).copy()
    ph = np.where(np.abs(ph) < 1e-14, 1.0, ph / np.abs(ph))
    return q * ph


def eof_numeric(
    rho: QState,
    restarts: int = 32,
    max_iter: int = 400,
    seed: int = 0,
    ensemble_size: int | None = None,
    conv_tol: float = 1e-8,
) -> MeasureResult:
    """Entanglement of formation by ensemble optimization (upper bound).

    Decompositions of rho are parametrized as isometries applied to the
    eigen-ensemble; each restart runs projected gradient descent on the
    isometry manifold with Armijo backtracking and QR retraction.  Unless
    ``ensemble_size`` is given, restarts alternate between rank-sized and
    rank-squared ensembles: the small manifold converges tightly when few
    decomposition members suffice, the large one keeps the general
    attainability guarantee.  Deterministic for a fixed seed.
    """
    da, db = _require_bipartite(rho.dims, "eof_numeric")
    if da * db > OPT_DIM_CAP:
        raise SecrecyForgeError(f"dimension {da * db} exceeds optimizer cap {OPT_DIM_CAP}")
    ev, vec = np.linalg.eigh(rho.rho)
    keep = ev > 1e-12
    r = int(keep.sum())
    w = vec[:, keep] * np.sqrt(ev[keep])  # d x r
    if r == 1:
        return MeasureResult(
            name="E_F",
            value=_schmidt_entropy(w[:, 0], da, db),
            kind="exact",
            method="pure-state",
            diagnostics={"rank": 1},
        )
    m = ensemble_size or r * r
    if m < r:
        raise SecrecyForgeError(f"ensemble size {m} below rank {r}")
    sizes = (m,) if (ensemble_size or m == r) else (r, m)
    rng = np.random.default_rng(seed)
    best = math.inf
    best_restart = -1
    total_iters = 0
    converged = False
    for restart in range(restarts):
        mr = sizes[restart % len(sizes)]
        if restart == 0:
            u = np.eye(mr, r, dtype=complex)
        else:
            g = rng.normal(size=(mr, r)) + 1j * rng.normal(size=(mr, r))
            u = _qr_retract(g)
        val, grad = _ensemble_energy_grad(u, w, da, db)
        step = 1.0
        this_converged = False
        for it in range(max_iter):
            total_iters += 1
            tang = _stiefel_project(u, grad)
            sq = float(np.real(np.vdot(tang, tang)))
            if sq < 1e-18:
                this_converged = True
                break
            # Armijo backtracking on the retracted step
            accepted = False
            for _ in range(30):
                cand = _qr_retract(u - step * tang)
                cval, cgrad = _ensemble_energy_grad(cand, w, da, db)
                if cval <= val - 0.1 * step * sq:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                this_converged = True
                break
            moved = val - cval
            u, val, grad = cand, cval, cgrad
            step = min(step * 2.0, 1.0)
            if moved < conv_tol:
                this_converged = True
                break
        if val < best:
            best = val
            best_restart = restart
        converged = converged or this_converged
    return MeasureResult(
        name="E_F",
        value=best,
        kind="upper_bound",
        method="isometry-ensemble-descent",
        diagnostics={
            "restarts": restarts,
            "seed": seed,
            "ensemble_size": m,
            "rank": r,
            "best_restart": best_restart,
            "iterations": total_iters,
            "converged": converged,
        },
    )


def esq_classical_extension_bound(
    sigma: QState, tol: float = 1e-10
) -> MeasureResult:
    """(1/2) sum_zbar p(zbar) I(A:B) over the classical third register.

    Upper-bounds the squashed entanglement of tr_Zbar sigma.
    """
    if len(sigma.dims) != 3:
        raise SecrecyForgeError(
            f"extension bound expects dims (A, B, Zbar), got {sigma.dims}"
        )
    da, db, dz = sigma.dims
    n = da * db
    r = sigma.rho.reshape(da, db, dz, da, db, dz)
    off = r.copy()
    for z in range(dz):
        off[:, :, z, :, :, z] = 0.0
    if np.abs(off).max() > tol:
        raise InvalidState("third register is not classical (off-diagonal blocks)")
    value = 0.0
    weights = []
    for z in range(dz):
        block = r[:, :, z, :, :, z].reshape(n, n)
        pz = float(np.real(np.trace(block)))
        weights.append(pz)
        if pz <= 1e-12:
            continue
        st = QState(block / pz, (da, db))
        mi = (
            von_neumann_entropy(partial_trace(st, (0,)))
            + von_neumann_entropy(partial_trace(st, (1,)))
            - von_neumann_entropy(st)
        )
        value += 0.5 * pz * mi
    return MeasureResult(
        name="E_sq",
        value=value,
        kind="upper_bound",
        method="classical-extension",
        diagnostics={"block_weights": weights},
    )


# ---------------------------------------------------------------------------
# relative entropy of entanglement, upper bound via product-vector mixtures


def _unpack(params: np.ndarray, k: int, da: int, db: int):
    theta = params[:k]
    na, nb = k * da, k * db
    off = k
    a = params[off : off + na] + 1j * params[off + na : off + 2 * na]
    off += 2 * na
    b = params[off : off + nb] + 1j * params[off + nb : off + 2 * nb]
    return theta, a.reshape(k, da), b.reshape(k, db)


def _rel_ent_objective(
    params: np.ndarray, rho: np.ndarray, k: int, da: int, db: int, mix: float
) -> tuple[float, np.ndarray]:
    """S(rho || sigma(params)) in bits minus the constant tr rho log2 rho,
    plus that constant; returns (value, gradient) for L-BFGS."""
    d = da * db
    theta, a, b = _unpack(params, k, da, db)
    t = theta - theta.max()
    q = np.exp(t)
    q /= q.sum()
    norm_a = np.einsum("ki,ki->k", a.conj(), a).real
    norm_b = np.einsum("ki,ki->k", b.conj(), b).real
    norm_a = np.maximum(norm_a, 1e-300)
    norm_b = np.maximum(norm_b, 1e-300)
    av = a / np.sqrt(norm_a)[:, None]
    bv = b / np.sqrt(norm_b)[:, None]
    prod = np.einsum("ki,kj->kij", av, bv).reshape(k, d)
    sigma = (1.0 - mix) * np.einsum("k,ki,kj->ij", q, prod, prod.conj()) + (
        mix / d
    ) * np.eye(d)
    s, v = np.linalg.eigh(sigma)
    s = np.maximum(s, 1e-300)
    vrv = v.conj().T @ rho @ v
    cross = float(np.real(np.diagonal(vrv) @ np.log(s))) / LN2
    ew = np.linalg.eigvalsh(rho)
    ew = ew[ew > 1e-12]
    value = float((ew * np.log2(ew)).sum()) - cross

    # Frechet derivative of -tr[rho log2 sigma] wrt sigma
    ls = np.log(s)
    diff_s = s[:, None] - s[None, :]
    same = np.abs(diff_s) < 1e-14
    lmat = np.where(same, 1.0 / np.maximum(s[None, :], 1e-300), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (ls[:, None] - ls[None, :]) / np.where(same, 1.0, diff_s)
    lmat = np.where(same, lmat, ratio)
    p_mat = -(v @ (vrv * lmat) @ v.conj().T) / LN2  # Hermitian

    pr = p_mat.reshape(da, db, da, db)
    vals = np.einsum("ki,kj,ijab,ka,kb->k", av.conj(), bv.conj(), pr, av, bv)
    g_q = (1.0 - mix) * np.real(vals)
    g_theta = q * (g_q - float(q @ g_q))

    bmat = np.einsum("kj,kb->kjb", bv, bv.conj())
    ka_mats = np.einsum("ijab,kjb->kia", pr, bmat) * ((1.0 - mix) * q)[:, None, None]
    amat = np.einsum("ki,ka->kia", av, av.conj())
    kb_mats = np.einsum("ijab,kia->kjb", pr, amat) * ((1.0 - mix) * q)[:, None, None]

    ka_a = np.einsum("kia,ka->ki", ka_mats, a)
    quad_a = np.einsum("ki,ki->k", a.conj(), ka_a).real
    g_a = ka_a / norm_a[:, None] - (quad_a / (norm_a * norm_a))[:, None] * a
    kb_b = np.einsum("kjb,kb->kj", kb_mats, b)
    quad_b = np.einsum("kj,kj->k", b.conj(), kb_b).real
    g_b = kb_b / norm_b[:, None] - (quad_b / (norm_b * norm_b))[:, None] * b

    grad = np.concatenate(
        [
            g_theta,
            2.0 * g_a.real.ravel(),
            2.0 * g_a.imag.ravel(),
            2.0 * g_b.real.ravel(),
            2.0 * g_b.imag.ravel(),
        ]
    )
    return value, grad


def rel_ent_upper(
    rho: QState,
    k_terms: int | None = None,
    restarts: int = 4,
    seed: int = 0,
    max_iter: int = 500,
    mix: float = 1e-6,
) -> MeasureResult:
    """Relative entropy of entanglement, upper bound.

    Minimizes S(rho || sigma) over sigma = mixtures of k product vectors
    (softmax weights, L-BFGS with analytic gradients).  sigma is blended
    with the maximally mixed state at weight `mix` so the relative
    entropy stays finite; the blend is itself separable, so every value
    reported is a valid upper bound.  Deterministic for a fixed seed.
    """
    da, db = _require_bipartite(rho.dims, "rel_ent_upper")
    d = da * db
    if d > OPT_DIM_CAP:
        raise SecrecyForgeError(f"dimension {d} exceeds optimizer cap {OPT_DIM_CAP}")
    k = k_terms or 2 * d
    if k < 1:
        raise SecrecyForgeError("need at least one product term")
    rng = np.random.default_rng(seed)
    diag = np.clip(np.real(np.diag(rho.rho)), 0.0, None)

    def basis_start() -> np.ndarray:
        theta = np.full(k, -6.0)
        a = np.zeros((k, da), dtype=complex)
        b = np.zeros((k, db), dtype=complex)
        idx = 0
        for i in range(da):
            for j in range(db):
                if idx >= k:
                    break
                theta[idx] = math.log(max(diag[i * db + j], 1e-8))
                a[idx, i] = 1.0
                b[idx, j] = 1.0
                idx += 1
        while idx < k:
            a[idx] = rng.normal(size=da) + 1j * rng.normal(size=da)
            b[idx] = rng.normal(size=db) + 1j * rng.normal(size=db)
            idx += 1
        return _pack(theta, a, b)

    def random_start() -> np.ndarray:
        theta = rng.normal(size=k)
        a = rng.normal(size=(k, da)) + 1j * rng.normal(size=(k, da))
        b = rng.normal(size=(k, db)) + 1j * rng.normal(size=(k, db))
        return _pack(theta, a, b)

    def _pack(theta, a, b) -> np.ndarray:
        return np.concatenate(
            [theta, a.real.ravel(), a.imag.ravel(), b.real.ravel(), b.imag.ravel()]
        )

    best = math.inf
    best_restart = -1
    nit = 0
    for restart in range(restarts):
        x0 = basis_start() if restart == 0 else random_start()
        res = minimize(
            _rel_ent_objective,
            x0,
            args=(rho.rho, k, da, db, mix),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iter, "ftol": 1e-12, "gtol": 1e-10},
        )
        nit += int(res.nit)
        if res.fun < best:
            best = float(res.fun)
            best_restart = restart
    return MeasureResult(
        name="E_r",
        value=max(0.0, best),
        kind="upper_bound",
        method="product-mixture-lbfgs",
        diagnostics={
            "k_terms": k,
            "restarts": restarts,
            "seed": seed,
            "mixing": mix,
            "best_restart": best_restart,
            "iterations": nit,
        },
    )


def negativity_log(rho: QState) -> MeasureResult:
    """Logarithmic negativity log2 ||rho^{T_B}||_1 (entanglement witness)."""
    da, db = _require_bipartite(rho.dims, "negativity_log")
    pt = rho.rho.reshape(da, db, da, db).transpose(0, 3, 2, 1).reshape(da * db, da * db)
    w = np.linalg.eigvalsh(pt)
    return MeasureResult(
        name="neg",
        value=max(0.0, float(np.log2(np.abs(w).sum()))),
        kind="lower_bound",
        method="partial-transpose",
    )
