"""Key-rate formulas, inequality-chain verification, and advantage reports.

The class-conditional formulas are exact: a distribution that is uniform
block independent after public discussion (UBI-PD) has key rate equal to
the conditional common-block entropy H(J|Z); one that reaches UBI-PD
only after a channel on Eve's symbol inherits the formula on the
degraded distribution.  Everything else is reported as an interval.

verify_chain and advantage_report compare those classical rates against
entanglement quantities of the coherent embedding.  The class equalities
for the embedding hold only when the phase assignment keeps every
per-(z, block) amplitude submatrix rank one; phases that break this can
make the embedded state strictly more valuable to Alice and Bob, so the
pinning logic checks block compatibility before applying them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import config
from .classify import YES, ClassReport, classify, set_partitions
from .common_info import cond_common_entropy, conditional_common_function
from .distributions import (
    Channel,
    Dist3,
    apply_channel_z,
    conditional_mutual_information,
    mutual_information,
)
from .embeddings import (
    PhaseAssignment,
    embed_ccq,
    embed_cqq,
    embed_qqq,
    extension_sigma,
)
from .entanglement import (
    MeasureResult,
    eof_2q,
    eof_numeric,
    esq_classical_extension_bound,
    rel_ent_upper,
)
from .errors import InvalidDistribution, SecrecyForgeError
from .qlinalg import (
    QState,
    cond_mutual_info_q,
    partial_trace,
    trace_distance,
    von_neumann_entropy,
)

__all__ = [
    "TargetKeyState",
    "ChainCheck",
    "ChainReport",
    "AdvantageReport",
    "binary_eve_family",
    "independent_eve_example",
    "two_block_uniform_example",
    "one_sided_coherence_example",
    "kd_class",
    "kd_independent_eve",
    "verify_chain",
    "advantage_report",
    "lemma_example_rates",
]

EQ_TOL = 1e-9


@dataclass(frozen=True)
class TargetKeyState:
    """The ideal key state: r uniformly random bits shared by two parties."""

    r: int

    def __post_init__(self) -> None:
        if self.r < 0:
            raise SecrecyForgeError(f"key length must be nonnegative, got {self.r}")

    @property
    def n_values(self) -> int:
        return 2**self.r

    def state(self) -> QState:
        s = self.n_values
        rho = np.zeros((s * s, s * s), dtype=complex)
        for i in range(s):
            rho[i * s + i, i * s + i] = 1.0 / s
        return QState(rho, (s, s))


# ---------------------------------------------------------------------------
# bundled example distributions


def binary_eve_family(lam: float) -> Dist3:
    """Perfectly correlated bits with a two-valued eavesdropper flag.

    Under flag z=0 (probability 1/2) the shared bit is uniform; under
    z=1 it equals 0 with probability ``lam``.  The block labels are the
    bit itself, so the exact key rate is [1 + h(lam)]/2.
    """
    if not 0.0 <= lam <= 1.0:
        raise InvalidDistribution(f"mixing weight {lam} outside [0, 1]")
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = p[1, 1, 0] = 0.25
    p[0, 0, 1] = lam / 2.0
    p[1, 1, 1] = (1.0 - lam) / 2.0
    return Dist3(p)


def independent_eve_example() -> Dist3:
    """Correlated pair with a trivial (point-mass) eavesdropper symbol.

    p(x=0,y=0) = 1/2 and p(x=1, y) = 1/4 for both y; Eve's variable is
    constant, so the key rate equals I(X:Y) = h(1/4) - 1/2.
    """
    p = np.zeros((2, 2, 1))
    p[0, 0, 0] = 0.5
    p[1, 0, 0] = 0.25
    p[1, 1, 0] = 0.25
    return Dist3(p)


def two_block_uniform_example() -> Dist3:
    """X = Y uniform on four symbols; Eve sees only the high bit."""
    p = np.zeros((4, 4, 2))
    for x in range(4):
        p[x, x, x // 2] = 0.25
    return Dist3(p)


def one_sided_coherence_example() -> tuple[Dist3, PhaseAssignment]:
    """A 4x4x3 distribution whose embedding hides entanglement in phases.

    Sector z=0 is a perfectly correlated pair on {0,1}; sectors z=1 and
    z=2 are independent uniform products across the {0,1} and {2,3}
    halves.  The two flipped signs put each product sector into a
    maximally entangled branch while leaving the pmf unchanged.
    """
    p = np.zeros((4, 4, 3))
    p[0, 0, 0] = p[1, 1, 0] = 1.0 / 6.0
    for x in (0, 1):
        for y in (2, 3):
            p[x, y, 1] = 1.0 / 12.0
    for x in (2, 3):
        for y in (0, 1):
            p[x, y, 2] = 1.0 / 12.0
    phases = PhaseAssignment.from_entries(
        (4, 4, 3),
        [
            {"x": 1, "y": 3, "z": 1, "phi": math.pi},
            {"x": 3, "y": 1, "z": 2, "phi": math.pi},
        ],
    )
    return Dist3(p), phases


# ---------------------------------------------------------------------------
# class-conditional key rates


def _certificate_channel(report: ClassReport) -> Channel | None:
    cert = report.certificates.get("ubi_pd_down", {})
    if cert.get("status") != YES or "channel" not in cert:
        return None
    return Channel.deterministic(cert["channel"], cert["out_dim"])


def _coarse_graining_bound(
    d: Dist3, budget: int
) -> tuple[float, tuple[int, ...], int]:
    """min over deterministic channels on Z of I(X:Y|Zbar); sound upper
    bound on the key rate (the all-merge channel gives plain I(X:Y))."""
    best = math.inf
    best_rgs: tuple[int, ...] = ()
    tested = 0
    for rgs in set_partitions(d.dims[2]):
        if tested >= budget:
            break
        tested += 1
        dbar = apply_channel_z(d, Channel.deterministic(rgs))
        val = conditional_mutual_information(dbar.p, (0,), (1,), (2,))
        if val < best:
            best = val
            best_rgs = rgs
    return best, best_rgs, tested


def kd_class(
    d: Dist3,
    report: ClassReport | None = None,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
    budget: int = 64,
) -> MeasureResult:
    """Distillable key rate from the classification, when a formula applies.

    UBI-PD: exact H(J|Z).  Only UBI-PD-down with certificate channel:
    exact H(J|Zbar) on the degraded distribution.  Otherwise the result
    kind is ``inconclusive``; ``value`` then carries the best cheap
    upper bound and ``diagnostics`` the certified interval.
    """
    if report is None:
        report = classify(d, tol, support_eps, budget)
    if report.ubi_pd == YES:
        value = cond_common_entropy(d, support_eps)
        return MeasureResult(
            name="K_D",
            value=value,
            kind="exact",
            method="common-block-entropy",
            diagnostics={"class": "ubi_pd"},
        )
    ch = _certificate_channel(report)
    if report.ubi_pd_down == YES and ch is not None:
        dbar = apply_channel_z(d, ch)
        value = cond_common_entropy(dbar, support_eps)
        return MeasureResult(
            name="K_D",
            value=value,
            kind="exact",
            method="common-block-entropy-degraded",
            diagnostics={"class": "ubi_pd_down", "channel": ch.assignment()},
        )
    upper, rgs, tested = _coarse_graining_bound(d, budget)
    return MeasureResult(
        name="K_D",
        value=upper,
        kind="inconclusive",
        method="interval",
        diagnostics={
            "class": "unresolved",
            "lower_bound": 0.0,
            "upper_bound": upper,
            "upper_bound_channel": list(rgs),
            "channels_tested": tested,
        },
    )


def kd_independent_eve(d: Dist3, tol: float = config.ENTROPY_TOL) -> MeasureResult:
    """Key rate when Eve's symbol is independent of (X, Y): exactly I(X:Y)."""
    leak = mutual_information(d.p, (0, 1), (2,))
    if leak > tol:
        raise InvalidDistribution(
            f"eavesdropper symbol is correlated with the pair (I={leak:.3g})"
        )
    return MeasureResult(
        name="K_D",
        value=mutual_information(d.p, (0,), (1,)),
        kind="exact",
        method="mutual-information",
        diagnostics={"pair_eve_mutual_info": leak},
    )


# ---------------------------------------------------------------------------
# chain verification


def _phases_block_compatible(
    d: Dist3,
    phases: PhaseAssignment | None,
    support_eps: float = config.SUPPORT_EPS,
) -> bool:
    """True when every per-(z, block) amplitude submatrix has rank one.

    This is the premise under which the embedding's branch states factor
    across blocks and the class equalities transfer to the quantum side.
    """
    if phases is None:
        return True
    amp = np.sqrt(d.p) * np.exp(1j * phases.phi)
    ccf = conditional_common_function(d, support_eps)
    for z, part in ccf.per_z.items():
        for xs, ys in part.blocks:
            sub = amp[np.ix_(list(xs), list(ys), [z])][:, :, 0]
            s = np.linalg.svd(sub, compute_uv=False)
            if s.size > 1 and s[1] > 1e-9 * max(s[0], 1.0):
                return False
    return True


@dataclass(frozen=True)
class ChainCheck:
    """One verified ordering between two named quantities."""

    name: str
    lhs_name: str
    lhs: float
    rhs_name: str
    rhs: float
    direction: str  # geq | abs_leq
    tol: float
    slack: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lhs": {"name": self.lhs_name, "value": self.lhs},
            "rhs": {"name": self.rhs_name, "value": self.rhs},
            "direction": self.direction,
            "tol": self.tol,
            "slack": self.slack,
            "passed": self.passed,
        }


def _check_geq(name: str, ln: str, lv: float, rn: str, rv: float, tol: float) -> ChainCheck:
    slack = lv - rv
    return ChainCheck(name, ln, lv, rn, rv, "geq", tol, slack, slack >= -tol)


def _check_close(name: str, ln: str, lv: float, rn: str, rv: float, tol: float) -> ChainCheck:
    slack = lv - rv
    return ChainCheck(name, ln, lv, rn, rv, "abs_leq", tol, slack, abs(slack) <= tol)


@dataclass(frozen=True)
class ChainReport:
    """Named quantities plus every ordering checked, with slacks."""

    values: dict
    checks: tuple[ChainCheck, ...]
    classification: ClassReport
    measures: dict = field(repr=False)
    phases_block_compatible: bool = True

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "values": self.values,
            "checks": [c.to_json() for c in self.checks],
            "all_passed": self.all_passed,
            "phases_block_compatible": self.phases_block_compatible,
            "classification": self.classification.to_json(),
            "measures": {k: m.to_json() for k, m in self.measures.items()},
        }


def verify_chain(
    d: Dist3,
    phases: PhaseAssignment | None = None,
    seed: int = 0,
    report: ClassReport | None = None,
    restarts: int = 32,
    er_restarts: int = 4,
    tol: float = config.ENTROPY_TOL,
    chain_tol: float = config.CHAIN_TOL,
    support_eps: float = config.SUPPORT_EPS,
    budget: int = 64,
) -> ChainReport:
    """Compute every available rate and bound for d and check the orderings.

    Checks, by class of d: UBI-PD-down certified -> key rate at least the
    classical-extension squashed-entanglement bound (tight tolerance);
    UBI-PD -> key rate at least the numeric formation bound (chain
    tolerance); additionally semi-unambiguous -> all quantities agree
    within the chain tolerance.
    """
    if report is None:
        report = classify(d, tol, support_eps, budget)
    kd = kd_class(d, report, tol, support_eps, budget)
    hjz = cond_common_entropy(d, support_eps)
    compatible = _phases_block_compatible(d, phases, support_eps)

    psi = embed_qqq(d, phases)
    rho_ab = partial_trace(psi.density(), (0, 1))

    measures: dict[str, MeasureResult] = {"K_D_class": kd}
    ef = eof_numeric(rho_ab, restarts=restarts, seed=seed)
    measures["E_F_numeric"] = ef
    if rho_ab.dims == (2, 2):
        measures["E_F_2q"] = eof_2q(rho_ab)
    ch = _certificate_channel(report) or Channel.identity(d.dims[2])
    esq = esq_classical_extension_bound(extension_sigma(d, ch, phases, support_eps))
    measures["E_sq_bound"] = esq
    er = rel_ent_upper(rho_ab, restarts=er_restarts, seed=seed)
    measures["E_r_bound"] = er

    values: dict[str, float] = {
        "K_D_class_formula": kd.value,
        "K_D_kind": kd.kind,
        "H_J_given_Z": hjz,
        "E_F_numeric": ef.value,
        "E_sq_bound": esq.value,
        "E_r_bound": er.value,
    }
    if "E_F_2q" in measures:
        values["E_F_2q"] = measures["E_F_2q"].value
    purity = float(np.real(np.trace(rho_ab.rho @ rho_ab.rho)))
    if purity >= 1.0 - EQ_TOL:
        values["E_entropy"] = von_neumann_entropy(partial_trace(rho_ab, (1,)))

    checks: list[ChainCheck] = []
    if kd.kind == "exact":
        if report.ubi_pd_down == YES:
            checks.append(
                _check_geq(
                    "key_rate_vs_extension_bound",
                    "K_D_class_formula", kd.value,
                    "E_sq_bound", esq.value,
                    EQ_TOL,
                )
            )
        if report.ubi_pd == YES:
            checks.append(
                _check_geq(
                    "key_rate_vs_formation",
                    "K_D_class_formula", kd.value,
                    "E_F_numeric", ef.value,
                    chain_tol,
                )
            )
        if report.ubi_pd == YES and report.semi_unambiguous == YES:
            for name in ("E_F_numeric", "E_sq_bound", "E_r_bound", "H_J_given_Z"):
                checks.append(
                    _check_close(
                        f"equality_band_{name}",
                        "K_D_class_formula", kd.value,
                        name, values[name],
                        chain_tol,
                    )
                )
    return ChainReport(
        values=values,
        checks=tuple(checks),
        classification=report,
        measures=measures,
        phases_block_compatible=compatible,
    )


# ---------------------------------------------------------------------------
# classical-versus-quantum advantage


@dataclass(frozen=True)
class AdvantageReport:
    """Pinned rates or certified intervals for both sides, plus a label.

    Labels: eve_advantage (coherent eavesdropper strictly lowers the
    rate), ab_advantage (coherent embedding strictly raises it),
    balanced (both pinned and equal), indeterminate (bounds too loose).
    """

    label: str
    classical: MeasureResult
    classical_interval: tuple[float, float]
    quantum_interval: tuple[float, float]
    quantum_value: float | None
    gap: float | None
    phases_block_compatible: bool
    classification: ClassReport
    measures: dict = field(repr=False)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "classical": self.classical.to_json(),
            "classical_interval": list(self.classical_interval),
            "quantum_interval": list(self.quantum_interval),
            "quantum_value": self.quantum_value,
            "gap": self.gap,
            "phases_block_compatible": self.phases_block_compatible,
            "classification": self.classification.to_json(),
            "measures": {k: m.to_json() for k, m in self.measures.items()},
        }


def advantage_report(
    d: Dist3,
    phases: PhaseAssignment | None = None,
    seed: int = 0,
    report: ClassReport | None = None,
    er_restarts: int = 4,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
    budget: int = 64,
) -> AdvantageReport:
    """Compare the classical key rate of d against its coherent embedding.

    The quantum side is pinned exactly when the embedded pair state is
    pure (rate = reduced entropy) or when the class equalities apply
    (reversible + semi-unambiguous, block-compatible phases); otherwise
    it is bracketed by certified bounds and the label only fires when
    the brackets separate strictly.
    """
    if report is None:
        report = classify(d, tol, support_eps, budget)
    kd = kd_class(d, report, tol, support_eps, budget)
    if kd.kind != "exact" and mutual_information(d.p, (0, 1), (2,)) <= tol:
        kd = kd_independent_eve(d, tol)
    if kd.kind == "exact":
        c_lo = c_hi = kd.value
    else:
        c_lo = kd.diagnostics["lower_bound"]
        c_hi = kd.diagnostics["upper_bound"]

    compatible = _phases_block_compatible(d, phases, support_eps)
    psi = embed_qqq(d, phases)
    rho_ab = partial_trace(psi.density(), (0, 1))
    purity = float(np.real(np.trace(rho_ab.rho @ rho_ab.rho)))

    measures: dict[str, MeasureResult] = {"K_D_classical": kd}
    uppers: list[float] = []
    esq_id = esq_classical_extension_bound(
        extension_sigma(d, Channel.identity(d.dims[2]), phases, support_eps)
    )
    measures["E_sq_bound_identity"] = esq_id
    uppers.append(esq_id.value)
    cert = _certificate_channel(report)
    if cert is not None and not np.array_equal(
        cert.k, Channel.identity(d.dims[2]).k
    ):
        esq_cert = esq_classical_extension_bound(
            extension_sigma(d, cert, phases, support_eps)
        )
        measures["E_sq_bound_certificate"] = esq_cert
        uppers.append(esq_cert.value)
    er = rel_ent_upper(rho_ab, restarts=er_restarts, seed=seed)
    measures["E_r_bound"] = er
    uppers.append(er.value)
    if rho_ab.dims == (2, 2):
        ef = eof_2q(rho_ab)
        measures["E_F_2q"] = ef
        uppers.append(ef.value)

    q_value: float | None = None
    if purity >= 1.0 - EQ_TOL:
        q_value = von_neumann_entropy(partial_trace(rho_ab, (1,)))
    elif (
        compatible
        and kd.kind == "exact"
        and report.ubi_pd_down == YES
        and report.semi_unambiguous == YES
    ):
        q_value = kd.value
    q_hi = min(uppers + ([q_value] if q_value is not None else []))
    q_lo = q_value if q_value is not None else 0.0

    gap: float | None = None
    if kd.kind == "exact" and q_value is not None:
        gap = kd.value - q_value
        if abs(gap) <= EQ_TOL:
            label = "balanced"
        elif gap > 0:
            label = "eve_advantage"
        else:
            label = "ab_advantage"
    elif c_lo > q_hi + EQ_TOL:
        label = "eve_advantage"
    elif q_lo > c_hi + EQ_TOL:
        label = "ab_advantage"
    else:
        label = "indeterminate"
    return AdvantageReport(
        label=label,
        classical=kd,
        classical_interval=(c_lo, c_hi),
        quantum_interval=(q_lo, q_hi),
        quantum_value=q_value,
        gap=gap,
        phases_block_compatible=compatible,
        classification=report,
        measures=measures,
    )


# ---------------------------------------------------------------------------
# the bundled one-sided-coherence rates


def _branch_key_value(sigma: QState) -> float:
    """Key content of one conditional branch against a flag-holding Eve.

    A coherent (pure) branch is worth its reduced entropy; a dephased
    branch carries classical correlation worth its mutual information.
    Only meaningful for branches that are pure or basis-diagonal on the
    dephased side, which is all this module ever feeds it.
    """
    purity = float(np.real(np.trace(sigma.rho @ sigma.rho)))
    if purity >= 1.0 - EQ_TOL:
        return von_neumann_entropy(partial_trace(sigma, (0,)))
    return cond_mutual_info_q(sigma, (0,), (1,))


_PM = np.array(
    [
        [1 / math.sqrt(2), 1 / math.sqrt(2), 0, 0],
        [1 / math.sqrt(2), -1 / math.sqrt(2), 0, 0],
        [0, 0, 1, 0],
        [0, 0, 0, 1],
    ]
)


def _measured_key_value(sigma: QState, support_eps: float = 1e-12) -> float:
    """Mutual information after the subspace-adapted local measurements.

    Each side measures computationally if its own support lies in the
    upper {2,3} half; otherwise it switches to the +/- basis exactly
    when the opposite side's support lies in that half.
    """
    da, db = sigma.dims
    diag_a = np.real(np.diag(partial_trace(sigma, (0,)).rho))
    diag_b = np.real(np.diag(partial_trace(sigma, (1,)).rho))

    def basis(own: np.ndarray, other: np.ndarray) -> np.ndarray:
        own_low = own[0] + own[1] > support_eps
        other_low = other[0] + other[1] > support_eps
        if own_low and not other_low:
            return _PM
        return np.eye(4)

    ua = basis(diag_a, diag_b)
    ub = basis(diag_b, diag_a)
    joint = np.zeros((da, db))
    for a in range(da):
        for b in range(db):
            v = np.kron(ua[a], ub[b])
            joint[a, b] = max(0.0, float(np.real(v.conj() @ sigma.rho @ v)))
    total = joint.sum()
    if abs(total - 1.0) > 1e-9:
        raise SecrecyForgeError(f"measurement outcomes sum to {total}")
    return mutual_information(joint / total, (0,), (1,))


def lemma_example_rates() -> dict:
    """Key rates of the bundled one-sided-coherence state and its dephasings.

    Builds the coherent embedding and two progressively decohered forms,
    splits each on Eve's flag, and evaluates every branch two independent
    ways: the branch key value, and the mutual information left after the
    subspace-adapted measurement protocol.  The two routes must agree to
    1e-9 on every branch; the headline values are exactly (1, 2/3, 1/3).

    The middle state is not the literal one-sided dephasing of the
    coherent embedding.  In the flag-1 branch Alice's symbol lives
    entirely in her phases, so her dephasing already levels that branch,
    and the middle state drops the branch's remaining one-sided coherence
    as well, leaving it fully mixed; the flag-2 branch keeps Bob's
    coherence untouched.  Each entry reports the trace distance to the
    literal dephasing alongside the rates (zero except for the middle
    state).
    """
    d, phases = one_sided_coherence_example()
    dx, dy, dz = d.dims
    n = dx * dy
    dim = n * dz

    def flag_diagonal(state: QState, level_flags: tuple[int, ...]) -> QState:
        """Flag-block-diagonal part, with the listed branches fully dephased."""
        r = state.rho.reshape(dx, dy, dz, dx, dy, dz)
        out = np.zeros_like(r)
        for z in range(dz):
            block = r[:, :, z, :, :, z].reshape(n, n)
            if z in level_flags:
                block = np.diag(np.diag(block))
            out[:, :, z, :, :, z] = block.reshape(dx, dy, dx, dy)
        return QState(out.reshape(dim, dim), (dx, dy, dz))

    literal = {
        "qqq": embed_qqq(d, phases).density(),
        "cqq": embed_cqq(d, phases),
        "ccq": embed_ccq(d, phases),
    }
    states = {
        "qqq": literal["qqq"],
        "cqq": flag_diagonal(literal["cqq"], (1,)),
        "ccq": flag_diagonal(literal["ccq"], ()),
    }
    out: dict = {}
    for name, st in states.items():
        r = st.rho.reshape(dx, dy, dz, dx, dy, dz)
        branch_vals: list[float] = []
        measured_vals: list[float] = []
        half_cmi = 0.0
        weights: list[float] = []
        for z in range(dz):
            block = r[:, :, z, :, :, z].reshape(n, n)
            pz = float(np.real(np.trace(block)))
            weights.append(pz)
            branch = QState(block / pz, (dx, dy))
            v = _branch_key_value(branch)
            m = _measured_key_value(branch)
            if abs(v - m) > EQ_TOL:
                raise SecrecyForgeError(
                    f"{name} branch z={z}: key value {v} != measured value {m}"
                )
            branch_vals.append(v)
            measured_vals.append(m)
            half_cmi += 0.5 * pz * cond_mutual_info_q(branch, (0,), (1,))
        value = float(np.dot(weights, branch_vals))
        out[name] = {
            "value": value,
            "measured_value": float(np.dot(weights, measured_vals)),
            "per_branch": branch_vals,
            "branch_weights": weights,
            "half_cmi_extension_bound": half_cmi,
            "literal_dephasing_distance": trace_distance(st, literal[name]),
        }
    out["ordering"] = {
        "qqq_gt_cqq": out["qqq"]["value"] > out["cqq"]["value"] + EQ_TOL,
        "cqq_gt_ccq": out["cqq"]["value"] > out["ccq"]["value"] + EQ_TOL,
    }
    return out
