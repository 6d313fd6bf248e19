"""Round-based public-communication protocols on incoherent inputs.

A protocol is a tree of local instruments: Alice acts in the odd-numbered
rounds, Bob in the even ones, every node is conditioned on the full public
transcript so far, and after the last round each party applies a final
local channel conditioned on the whole transcript.  On an incoherent input
(the diagonal embedding of a distribution) any such protocol is matched by
a purely classical one whose broadcast kernels are trace ratios of the
acting party's accumulated CP map and whose output channels are the
diagonals of the leaf states.  Both sides are evaluated here by exact
dense enumeration so their outputs can be compared in trace distance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import config
from .distributions import Dist3, product_power
from .errors import DimensionCapExceeded, InvalidChannel, InvalidProtocol
from .qlinalg import QState, dephase, trace_distance

__all__ = [
    "History",
    "InstrumentTree",
    "ClassicalProtocol",
    "simulate_quantum",
    "dephase_output",
    "dequantize",
    "simulate_classical",
    "verify_equivalence",
    "trivial_tree",
    "computational_announce_tree",
    "random_instrument_tree",
]

History = tuple[int, ...]

# Trace preservation required of every node and leaf channel.
NODE_TOL = 1e-10

# Row-stochasticity required of classical kernels.
KERNEL_TOL = 1e-12


def _as_kraus(ops, din: int, where: str) -> tuple[np.ndarray, ...]:
    """Normalize one CP map to a tuple of frozen complex (dout, din) arrays."""
    ops = tuple(ops)
    if not ops:
        raise InvalidProtocol(f"{where}: CP map with no Kraus operators")
    out: list[np.ndarray] = []
    dout = None
    for op in ops:
        arr = np.array(op, dtype=complex, copy=True)
        if arr.ndim != 2 or arr.shape[1] != din:
            raise InvalidProtocol(
                f"{where}: Kraus operator shape {arr.shape}, expected (*, {din})"
            )
        if not np.all(np.isfinite(arr.view(float))):
            raise InvalidProtocol(f"{where}: non-finite Kraus entry")
        if dout is None:
            dout = arr.shape[0]
        elif arr.shape[0] != dout:
            raise InvalidProtocol(f"{where}: Kraus operators disagree on output dim")
        arr.setflags(write=False)
        out.append(arr)
    return tuple(out)


def _completeness_defect(maps: tuple[tuple[np.ndarray, ...], ...], din: int) -> float:
    total = np.zeros((din, din), dtype=complex)
    for kraus in maps:
        for op in kraus:
            total += op.conj().T @ op
    return float(np.abs(total - np.eye(din)).max())


@dataclass(frozen=True)
class InstrumentTree:
    """Protocol tree of local instruments plus per-transcript leaf channels.

    ``instruments`` maps each transcript prefix ``i_<k`` to the node applied
    in round ``k = len(prefix) + 1``; odd rounds act on Alice's space, even
    rounds on Bob's.  A node is a tuple of CP maps (one per broadcast
    outcome), each a tuple of Kraus operators.  ``leaf_a`` / ``leaf_b`` map
    every full transcript to the party's final trace-preserving channel.
    Output dimensions may differ from input dimensions but must agree
    across leaves.
    """

    rounds: int
    dim_a: int
    dim_b: int
    instruments: dict[History, tuple[tuple[np.ndarray, ...], ...]] = field(
        default_factory=dict
    )
    leaf_a: dict[History, tuple[np.ndarray, ...]] = field(default_factory=dict)
    leaf_b: dict[History, tuple[np.ndarray, ...]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rounds < 0 or self.rounds % 2 != 0:
            raise InvalidProtocol(f"rounds must be even and >= 0, got {self.rounds}")
        if self.dim_a < 1 or self.dim_b < 1:
            raise InvalidProtocol(f"bad local dims ({self.dim_a}, {self.dim_b})")
        out_a, out_b = self._normalize_and_check()
        object.__setattr__(self, "out_a", out_a)
        object.__setattr__(self, "out_b", out_b)

    def _normalize_and_check(self) -> tuple[int, int]:
        """Walk every path, normalizing Kraus data and checking invariants."""
        instruments = dict(self.instruments)
        leaf_a = dict(self.leaf_a)
        leaf_b = dict(self.leaf_b)
        out_dims: dict[str, int] = {}
        # Stack entries carry the acting dims reached along the path.
        stack: list[tuple[History, int, int]] = [((), self.dim_a, self.dim_b)]
        while stack:
            h, da, db = stack.pop()
            if len(h) == self.rounds:
                for reg, leaves, din in (("a", leaf_a, da), ("b", leaf_b, db)):
                    if h not in leaves:
                        raise InvalidProtocol(f"missing leaf_{reg} for transcript {h}")
                    kraus = _as_kraus(leaves[h], din, f"leaf_{reg}{h}")
                    defect = _completeness_defect((kraus,), din)
                    if defect > NODE_TOL:
                        raise InvalidChannel(
                            f"leaf_{reg}{h} not trace preserving (defect {defect:.2e})"
                        )
                    leaves[h] = kraus
                    dout = kraus[0].shape[0]
                    if out_dims.setdefault(reg, dout) != dout:
                        raise InvalidProtocol(
                            f"leaf_{reg} output dims disagree across transcripts"
                        )
                continue
            if h not in instruments:
                raise InvalidProtocol(f"missing instrument for transcript {h}")
            din = da if len(h) % 2 == 0 else db
            node = tuple(
                _as_kraus(cp, din, f"node{h}[{m}]")
                for m, cp in enumerate(instruments[h])
            )
            if not node:
                raise InvalidProtocol(f"node{h}: instrument with no outcomes")
            defect = _completeness_defect(node, din)
            if defect > NODE_TOL:
                raise InvalidChannel(
                    f"node{h} not trace preserving (defect {defect:.2e})"
                )
            instruments[h] = node
            for m, cp in enumerate(node):
                dout = cp[0].shape[0]
                if len(h) % 2 == 0:
                    stack.append((h + (m,), dout, db))
                else:
                    stack.append((h + (m,), da, dout))
        object.__setattr__(self, "instruments", instruments)
        object.__setattr__(self, "leaf_a", leaf_a)
        object.__setattr__(self, "leaf_b", leaf_b)
        return out_dims["a"], out_dims["b"]

    def histories(self) -> tuple[History, ...]:
        """All full transcripts in lexicographic (broadcast) order."""
        hs: list[History] = [()]
        for _ in range(self.rounds):
            hs = [h + (m,) for h in hs for m in range(len(self.instruments[h]))]
        return tuple(hs)


@dataclass(frozen=True)
class ClassicalProtocol:
    """Broadcast kernels and final local channels extracted from a tree.

    ``kernels`` maps each transcript prefix to a row-stochastic table
    Pr[i_k | transcript, s] whose rows range over the acting party's
    original symbol.  ``final_a`` / ``final_b`` map full transcripts to the
    output laws Pr[x' | transcript, x] and Pr[y' | transcript, y].
    """

    rounds: int
    dim_a: int
    dim_b: int
    out_a: int
    out_b: int
    kernels: dict[History, np.ndarray] = field(default_factory=dict)
    final_a: dict[History, np.ndarray] = field(default_factory=dict)
    final_b: dict[History, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.rounds < 0 or self.rounds % 2 != 0:
            raise InvalidProtocol(f"rounds must be even and >= 0, got {self.rounds}")
        kernels = dict(self.kernels)
        final_a = dict(self.final_a)
        final_b = dict(self.final_b)
        stack: list[History] = [()]
        while stack:
            h = stack.pop()
            if len(h) == self.rounds:
                for reg, tables, rows, cols in (
                    ("a", final_a, self.dim_a, self.out_a),
                    ("b", final_b, self.dim_b, self.out_b),
                ):
                    if h not in tables:
                        raise InvalidProtocol(f"missing final_{reg} for transcript {h}")
                    tables[h] = _check_stochastic(
                        tables[h], rows, cols, f"final_{reg}{h}"
                    )
                continue
            if h not in kernels:
                raise InvalidProtocol(f"missing kernel for transcript {h}")
            rows = self.dim_a if len(h) % 2 == 0 else self.dim_b
            table = _check_stochastic(kernels[h], rows, None, f"kernel{h}")
            kernels[h] = table
            for m in range(table.shape[1]):
                stack.append(h + (m,))
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "final_a", final_a)
        object.__setattr__(self, "final_b", final_b)

    def histories(self) -> tuple[History, ...]:
        hs: list[History] = [()]
        for _ in range(self.rounds):
            hs = [h + (m,) for h in hs for m in range(self.kernels[h].shape[1])]
        return tuple(hs)


def _check_stochastic(
    table: np.ndarray, rows: int, cols: int | None, where: str
) -> np.ndarray:
    arr = np.array(table, dtype=float, copy=True)
    bad_shape = arr.ndim != 2 or arr.shape[0] != rows
    if cols is not None:
        bad_shape = bad_shape or arr.shape[1] != cols
    if bad_shape:
        raise InvalidProtocol(
            f"{where}: shape {arr.shape}, expected ({rows}, {cols or '*'})"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidProtocol(f"{where}: non-finite entry")
    if arr.min() < -KERNEL_TOL:
        raise InvalidProtocol(f"{where}: negative entry {arr.min()!r}")
    defect = float(np.abs(arr.sum(axis=1) - 1.0).max())
    if defect > KERNEL_TOL:
        raise InvalidProtocol(f"{where}: rows sum away from 1 by {defect:.2e}")
    arr = np.clip(arr, 0.0, None)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# exact simulation


def _basis_stack(dim: int) -> np.ndarray:
    """Stack of computational basis projectors, shape (dim, dim, dim)."""
    eye = np.eye(dim)
    return np.einsum("xi,xj->xij", eye, eye).astype(complex)


def _apply_cp(kraus: tuple[np.ndarray, ...], stack: np.ndarray) -> np.ndarray:
    """Apply sum_j K_j rho K_j^dag to every matrix in a stack."""
    out = None
    for op in kraus:
        term = np.einsum("oi,xij,pj->xop", op, stack, op.conj())
        out = term if out is None else out + term
    return out


def _leaf_states(
    tree: InstrumentTree,
) -> tuple[dict[History, np.ndarray], dict[History, np.ndarray]]:
    """Per full transcript, each party's composed map on basis inputs.

    The returned stacks are unnormalized: the trace of entry s is the
    probability of the transcript given original symbol s.
    """
    fin_a: dict[History, np.ndarray] = {}
    fin_b: dict[History, np.ndarray] = {}
    stack = [((), _basis_stack(tree.dim_a), _basis_stack(tree.dim_b))]
    while stack:
        h, sa, sb = stack.pop()
        if len(h) == tree.rounds:
            fin_a[h] = _apply_cp(tree.leaf_a[h], sa)
            fin_b[h] = _apply_cp(tree.leaf_b[h], sb)
            continue
        node = tree.instruments[h]
        if len(h) % 2 == 0:
            for m, cp in enumerate(node):
                stack.append((h + (m,), _apply_cp(cp, sa), sb))
        else:
            for m, cp in enumerate(node):
                stack.append((h + (m,), sa, _apply_cp(cp, sb)))
    return fin_a, fin_b


def _check_caps(
    tree_dims: tuple[int, int], out_dims: tuple[int, int], dzn: int, n_hist: int,
    caps: config.Caps,
) -> None:
    branch_amp = (out_dims[0] * out_dims[1] * dzn) ** 2
    if branch_amp > caps.product_states:
        raise DimensionCapExceeded(
            f"branch state holds {branch_amp} amplitudes, cap is {caps.product_states}"
        )
    total_dim = out_dims[0] * out_dims[1] * dzn * n_hist
    if total_dim > caps.rho_dim:
        raise DimensionCapExceeded(
            f"output density matrix dimension {total_dim}, cap is {caps.rho_dim}"
        )
    terms = tree_dims[0] * tree_dims[1] * dzn * n_hist
    if terms > caps.branch_terms:
        raise DimensionCapExceeded(
            f"simulation sums {terms} terms, cap is {caps.branch_terms}"
        )


def simulate_quantum(
    tree: InstrumentTree, d: Dist3, n: int = 1, caps: config.Caps | None = None
) -> QState:
    """Run the tree on the diagonal embedding of ``d**n``.

    Returns the joint output over subsystems (A', B', E, M) where E holds
    Eve's untouched symbol and M the broadcast transcript, indexed in
    ``tree.histories()`` order.
    """
    if caps is None:
        caps = config.load_caps()
    pn = product_power(d, n, cap=caps.product_states)
    if pn.dims[:2] != (tree.dim_a, tree.dim_b):
        raise InvalidProtocol(
            f"tree dims ({tree.dim_a}, {tree.dim_b}) do not match "
            f"distribution power dims {pn.dims[:2]}"
        )
    hist = tree.histories()
    dzn = pn.dims[2]
    _check_caps(pn.dims[:2], (tree.out_a, tree.out_b), dzn, len(hist), caps)
    fin_a, fin_b = _leaf_states(tree)
    a_stack = np.stack([fin_a[h] for h in hist])
    b_stack = np.stack([fin_b[h] for h in hist])
    # block[h, z, a, b, a', b'] with E and M diagonal by construction.
    block = np.einsum("xyz,hxac,hybd->hzabcd", pn.p, a_stack, b_stack)
    oa, ob = tree.out_a, tree.out_b
    rho = np.zeros((oa, ob, dzn, len(hist)) * 2, dtype=complex)
    for hi in range(len(hist)):
        for z in range(dzn):
            rho[:, :, z, hi, :, :, z, hi] = block[hi, z]
    dim = oa * ob * dzn * len(hist)
    return QState(rho.reshape(dim, dim), (oa, ob, dzn, len(hist)))


def dephase_output(state: QState) -> QState:
    """Kill coherences of the first two subsystems (the A' and B' outputs)."""
    if len(state.dims) < 2:
        raise InvalidProtocol(f"expected >= 2 subsystems, got dims {state.dims}")
    return dephase(dephase(state, 0), 1)


def _infer_copies(tree: InstrumentTree, d: Dist3) -> int:
    dx, dy = d.dims[0], d.dims[1]
    for n in range(1, 64):
        if dx**n == tree.dim_a and dy**n == tree.dim_b:
            return n
        if dx**n > tree.dim_a and dy**n > tree.dim_b:
            break
    raise InvalidProtocol(
        f"tree dims ({tree.dim_a}, {tree.dim_b}) are no i.i.d. power of "
        f"distribution dims {d.dims[:2]}"
    )


def _ratio_rows(table: np.ndarray) -> np.ndarray:
    """Normalize rows to probabilities; zero-mass rows become uniform."""
    table = np.clip(table, 0.0, None)
    sums = table.sum(axis=1, keepdims=True)
    out = np.where(sums > 0.0, table / np.where(sums > 0.0, sums, 1.0),
                   1.0 / table.shape[1])
    return out


def dequantize(tree: InstrumentTree, d: Dist3) -> ClassicalProtocol:
    """Extract the classical protocol with the same output law on ``d``.

    Broadcast kernels are the trace ratios of the acting party's
    accumulated CP map on basis inputs; final channels are the normalized
    diagonals of the leaf states.  Rows conditioned on unreachable
    transcripts are set uniform; they never influence the output law.
    """
    _infer_copies(tree, d)
    kernels: dict[History, np.ndarray] = {}
    final_a: dict[History, np.ndarray] = {}
    final_b: dict[History, np.ndarray] = {}
    stack = [((), _basis_stack(tree.dim_a), _basis_stack(tree.dim_b))]
    while stack:
        h, sa, sb = stack.pop()
        if len(h) == tree.rounds:
            for reg, tables, leaves, cur in (
                ("a", final_a, tree.leaf_a, sa),
                ("b", final_b, tree.leaf_b, sb),
            ):
                fin = _apply_cp(leaves[h], cur)
                diag = np.einsum("xii->xi", fin).real
                tables[h] = _ratio_rows(diag)
            continue
        node = tree.instruments[h]
        alice = len(h) % 2 == 0
        cur = sa if alice else sb
        children = [_apply_cp(cp, cur) for cp in node]
        traces = np.stack(
            [np.einsum("xii->x", child).real for child in children], axis=1
        )
        kernels[h] = _ratio_rows(traces)
        for m, child in enumerate(children):
            if alice:
                stack.append((h + (m,), child, sb))
            else:
                stack.append((h + (m,), sa, child))
    return ClassicalProtocol(
        rounds=tree.rounds,
        dim_a=tree.dim_a,
        dim_b=tree.dim_b,
        out_a=tree.out_a,
        out_b=tree.out_b,
        kernels=kernels,
        final_a=final_a,
        final_b=final_b,
    )


def simulate_classical(
    proto: ClassicalProtocol, d: Dist3, n: int = 1, caps: config.Caps | None = None
) -> QState:
    """Forward-chain the protocol on ``d**n``; diagonal joint over (A',B',E,M)."""
    if caps is None:
        caps = config.load_caps()
    pn = product_power(d, n, cap=caps.product_states)
    if pn.dims[:2] != (proto.dim_a, proto.dim_b):
        raise InvalidProtocol(
            f"protocol dims ({proto.dim_a}, {proto.dim_b}) do not match "
            f"distribution power dims {pn.dims[:2]}"
        )
    hist = proto.histories()
    dzn = pn.dims[2]
    _check_caps(pn.dims[:2], (proto.out_a, proto.out_b), dzn, len(hist), caps)
    index = {h: i for i, h in enumerate(hist)}
    joint = np.zeros((proto.out_a, proto.out_b, dzn, len(hist)))
    stack = [((), np.ones(proto.dim_a), np.ones(proto.dim_b))]
    while stack:
        h, wa, wb = stack.pop()
        if len(h) == proto.rounds:
            ta = wa[:, None] * proto.final_a[h]
            tb = wb[:, None] * proto.final_b[h]
            joint[:, :, :, index[h]] = np.einsum("xyz,xa,yb->abz", pn.p, ta, tb)
            continue
        table = proto.kernels[h]
        for m in range(table.shape[1]):
            if len(h) % 2 == 0:
                stack.append((h + (m,), wa * table[:, m], wb))
            else:
                stack.append((h + (m,), wa, wb * table[:, m]))
    return QState(np.diag(joint.ravel()), (proto.out_a, proto.out_b, dzn, len(hist)))


def verify_equivalence(
    tree: InstrumentTree, d: Dist3, n: int = 1, caps: config.Caps | None = None
) -> float:
    """Trace distance between the dephased tree output and its classical twin."""
    quantum = dephase_output(simulate_quantum(tree, d, n, caps=caps))
    classical = simulate_classical(dequantize(tree, d), d, n, caps=caps)
    return trace_distance(quantum, classical)


# ---------------------------------------------------------------------------
# tree constructors


def _identity_kraus(dim: int) -> tuple[np.ndarray, ...]:
    return (np.eye(dim, dtype=complex),)


def trivial_tree(dim_a: int, dim_b: int) -> InstrumentTree:
    """Zero rounds, identity leaves: the protocol that does nothing."""
    return InstrumentTree(
        rounds=0,
        dim_a=dim_a,
        dim_b=dim_b,
        leaf_a={(): _identity_kraus(dim_a)},
        leaf_b={(): _identity_kraus(dim_b)},
    )


def computational_announce_tree(dim_a: int, dim_b: int) -> InstrumentTree:
    """Alice measures and broadcasts her symbol; Bob overwrites his with it.

    Needs dim_b >= dim_a so Bob can store the announced value.  Round 2 is
    a trivial single-outcome broadcast to keep the round count even.
    """
    if dim_b < dim_a:
        raise InvalidProtocol(f"need dim_b >= dim_a, got ({dim_a}, {dim_b})")
    eye_a = np.eye(dim_a, dtype=complex)
    instruments: dict[History, tuple[tuple[np.ndarray, ...], ...]] = {
        (): tuple((np.outer(eye_a[x], eye_a[x]),) for x in range(dim_a))
    }
    leaf_a: dict[History, tuple[np.ndarray, ...]] = {}
    leaf_b: dict[History, tuple[np.ndarray, ...]] = {}
    eye_b = np.eye(dim_b, dtype=complex)
    for x in range(dim_a):
        instruments[(x,)] = (_identity_kraus(dim_b),)
        leaf_a[(x, 0)] = _identity_kraus(dim_a)
        # Overwrite channel: every input goes to basis state x.
        leaf_b[(x, 0)] = tuple(np.outer(eye_b[x], eye_b[j]) for j in range(dim_b))
    return InstrumentTree(
        rounds=2, dim_a=dim_a, dim_b=dim_b,
        instruments=instruments, leaf_a=leaf_a, leaf_b=leaf_b,
    )


def _random_instrument(
    rng: np.random.Generator, din: int, outcomes: int, kraus_each: int
) -> tuple[tuple[np.ndarray, ...], ...]:
    """Instrument from a Haar-ish isometry so completeness holds exactly.

    The QR of a Ginibre matrix gives an isometry V: C^din -> C^(m*din);
    its row blocks K_1..K_m satisfy sum K^dag K = V^dag V = I.
    """
    blocks = outcomes * kraus_each
    g = rng.normal(size=(blocks * din, din)) + 1j * rng.normal(size=(blocks * din, din))
    q, _ = np.linalg.qr(g)
    ops = [q[i * din : (i + 1) * din] for i in range(blocks)]
    return tuple(
        tuple(ops[m * kraus_each + j] for j in range(kraus_each))
        for m in range(outcomes)
    )


def random_instrument_tree(
    dim_a: int,
    dim_b: int,
    rounds: int = 2,
    outcomes: int = 2,
    kraus_each: int = 1,
    rng: np.random.Generator | None = None,
) -> InstrumentTree:
    """Random tree with the given branching; trace preserving by construction."""
    if rng is None:
        rng = np.random.default_rng()
    if rounds < 0 or rounds % 2 != 0:
        raise InvalidProtocol(f"rounds must be even and >= 0, got {rounds}")
    instruments: dict[History, tuple[tuple[np.ndarray, ...], ...]] = {}
    leaf_a: dict[History, tuple[np.ndarray, ...]] = {}
    leaf_b: dict[History, tuple[np.ndarray, ...]] = {}
    level: list[History] = [()]
    for k in range(rounds):
        nxt: list[History] = []
        din = dim_a if k % 2 == 0 else dim_b
        for h in level:
            instruments[h] = _random_instrument(rng, din, outcomes, kraus_each)
            nxt.extend(h + (m,) for m in range(outcomes))
        level = nxt
    for h in level:
        leaf_a[h] = _random_instrument(rng, dim_a, 1, kraus_each)[0]
        leaf_b[h] = _random_instrument(rng, dim_b, 1, kraus_each)[0]
    return InstrumentTree(
        rounds=rounds, dim_a=dim_a, dim_b=dim_b,
        instruments=instruments, leaf_a=leaf_a, leaf_b=leaf_b,
    )
