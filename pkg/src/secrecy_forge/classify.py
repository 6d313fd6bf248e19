"""Structural taxonomy of tripartite distributions.

The classes checked here, from coarsest to finest:

* block independent (BI): given Eve's symbol and the block label of the
  per-z maximal common partition, Alice and Bob are independent.
* uniform block independent (UBI): BI, and the per-z block labels can be
  relabelled into a single function computable from x alone and from y
  alone while staying maximal for every z.
* UBI with public discussion (UBI-PD): BI, and one round of public
  messages (each a function of one party's symbol) turns the distribution
  UBI without leaking anything about the block label to Eve.
* UBI-PD after Eve degrading (UBI-PD down): some channel on Eve's symbol
  produces a UBI-PD distribution whose block label stays independent of
  the original symbol given the degraded one.
* semi-unambiguous: Eve's symbol is determined by the pair (x, y).
* unambiguous: semi-unambiguous, and (x, y) is determined by Eve's
  symbol together with the block label.

The UBI-PD check runs one fixed, canonical protocol (each party announces
the common part it shares with Eve), so a failure is reported as
``inconclusive`` rather than ``no``: the definition quantifies over all
protocols.  The same caveat applies to the channel search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from . import config
from .common_info import (
    CommonPartition,
    CondCommonFunction,
    conditional_common_function,
    maximal_common_partition,
)
from .distributions import (
    Channel,
    Dist2,
    Dist3,
    apply_channel_z,
    conditional_mutual_information,
    entropy_bits,
    joint_marginal,
)
from .errors import SecrecyForgeError

__all__ = [
    "ClassReport",
    "PDCertificate",
    "PDDownResult",
    "is_block_independent",
    "is_ubi",
    "is_semi_unambiguous",
    "is_unambiguous",
    "is_ubi_pd",
    "is_ubi_pd_down",
    "classify",
    "set_partitions",
]

YES = "yes"
NO = "no"
INCONCLUSIVE = "inconclusive"


# ---------------------------------------------------------------------------
# entropic helpers on the block decomposition


def _blockwise(d: Dist3, ccf: CondCommonFunction):
    """Yield (z, block, submatrix, mass) over supported (z, block) cells."""
    for z, part in ccf.per_z.items():
        pz = float(ccf.z_probs[z])
        for b, (bxs, bys) in enumerate(part.blocks):
            sub = d.p[np.ix_(bxs, bys, [z])][:, :, 0]
            mass = float(sub.sum())
            if mass > 0.0:
                yield z, b, sub / mass, mass


def cmi_xy_given_blocks(d: Dist3, ccf: CondCommonFunction) -> float:
    """I(X:Y | block label, Z) in bits.

    The (z, block) cells partition the support, so the conditional mutual
    information is the mass-weighted sum of per-cell mutual informations.
    """
    total = 0.0
    for _, _, sub, mass in _blockwise(d, ccf):
        hx = entropy_bits(sub.sum(axis=1))
        hy = entropy_bits(sub.sum(axis=0))
        hxy = entropy_bits(sub)
        total += mass * (hx + hy - hxy)
    return total


def h_xy_given_blocks(d: Dist3, ccf: CondCommonFunction) -> float:
    """H(XY | block label, Z) in bits."""
    return sum(mass * entropy_bits(sub) for _, _, sub, mass in _blockwise(d, ccf))


# ---------------------------------------------------------------------------
# elementary class checks


def is_block_independent(
    d: Dist3,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
) -> bool:
    ccf = conditional_common_function(d, support_eps)
    return cmi_xy_given_blocks(d, ccf) <= tol


def is_ubi(
    d: Dist3,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
) -> bool:
    """BI plus a per-z-injective cross-z merge labelling.

    The merge labelling is a function of x alone and of y alone by
    construction, so injectivity per z is the only extra obstruction.
    """
    ccf = conditional_common_function(d, support_eps)
    if cmi_xy_given_blocks(d, ccf) > tol:
        return False
    return ccf.per_z_injective


def is_semi_unambiguous(
    d: Dist3, support_eps: float = config.SUPPORT_EPS
) -> bool:
    """Every supported (x, y) pair occurs with exactly one z."""
    counts = (d.p > support_eps).sum(axis=2)
    pair_supported = d.p.sum(axis=2) > support_eps
    return bool(np.all(counts[pair_supported] == 1))


def is_unambiguous(
    d: Dist3,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
) -> bool:
    if not is_semi_unambiguous(d, support_eps):
        return False
    ccf = conditional_common_function(d, support_eps)
    return h_xy_given_blocks(d, ccf) <= tol


# ---------------------------------------------------------------------------
# canonical public-discussion check


def _common_part_maps(
    d: Dist3, support_eps: float
) -> tuple[dict[int, int], dict[int, int]]:
    """Common part of X with Z as a map on x, and of Y with Z as a map on y."""
    pxz = Dist2(joint_marginal(d.p, (0, 2)))
    pyz = Dist2(joint_marginal(d.p, (1, 2)))
    part_xz = maximal_common_partition(pxz, support_eps)
    part_yz = maximal_common_partition(pyz, support_eps)
    return dict(part_xz.block_of_x), dict(part_yz.block_of_x)


@dataclass(frozen=True)
class PDCertificate:
    """Canonical message construction used by the UBI-PD check."""

    message_of_x: Mapping[int, int]
    message_of_y: Mapping[int, int]
    n_messages: int
    cmi_message_blocks_given_z: float
    extension_ubi: bool

    def to_json(self) -> dict:
        return {
            "message_of_x": {str(k): v for k, v in sorted(self.message_of_x.items())},
            "message_of_y": {str(k): v for k, v in sorted(self.message_of_y.items())},
            "n_messages": self.n_messages,
            "cmi_message_blocks_given_z": self.cmi_message_blocks_given_z,
            "extension_ubi": self.extension_ubi,
        }


def _pd_canonical(
    d: Dist3, tol: float, support_eps: float
) -> tuple[str, PDCertificate]:
    """Run the canonical protocol; returns (yes|inconclusive, certificate)."""
    ma, mb = _common_part_maps(d, support_eps)
    dx, dy, dz = d.dims

    entries = [
        (x, y, z, float(d.p[x, y, z]))
        for x, y, z in zip(*np.nonzero(d.p > support_eps))
    ]
    pairs = sorted({(ma[x], mb[y]) for x, y, _, _ in entries})
    m_index = {pair: i for i, pair in enumerate(pairs)}
    nm = len(pairs)

    # extended distribution over ((M, X), (M, Y), (Z, M))
    q = np.zeros((nm * dx, nm * dy, dz * nm))
    for x, y, z, w in entries:
        m = m_index[(ma[x], mb[y])]
        q[m * dx + x, m * dy + y, z * nm + m] = w
    q /= q.sum()
    ext = Dist3(q)
    ext_ubi = is_ubi(ext, tol, support_eps)

    # does the announced message leak anything about the block label?
    ccf = conditional_common_function(d, support_eps)
    max_blocks = max((len(p) for p in ccf.per_z.values()), default=1)
    joint = np.zeros((dz, nm, max_blocks))
    for x, y, z, w in entries:
        b = ccf.per_z[z].block_of_x[x]
        joint[z, m_index[(ma[x], mb[y])], b] += w
    leak = conditional_mutual_information(joint, (1,), (2,), (0,))

    cert = PDCertificate(ma, mb, nm, leak, ext_ubi)
    status = YES if (ext_ubi and leak <= tol) else INCONCLUSIVE
    return status, cert


def is_ubi_pd(
    d: Dist3,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
) -> tuple[str, PDCertificate | None]:
    """Canonical-protocol UBI-PD check: yes, no (not BI), or inconclusive."""
    if not is_block_independent(d, tol, support_eps):
        return NO, None
    return _pd_canonical(d, tol, support_eps)


# ---------------------------------------------------------------------------
# search over deterministic channels on Eve's symbol


def set_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """All set partitions of range(n) as restricted growth strings.

    Emitted in ascending lexicographic order: the all-merge string
    (0,...,0) first, the identity (0,1,...,n-1) last.
    """

    def extend(prefix: list[int], top: int) -> Iterator[tuple[int, ...]]:
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for v in range(top + 2):
            prefix.append(v)
            yield from extend(prefix, max(top, v))
            prefix.pop()

    yield from extend([0], 0)


@dataclass(frozen=True)
class PDDownResult:
    """Outcome of the deterministic-channel search."""

    status: str  # yes | inconclusive
    channel: Channel | None
    tested: int
    reason: str
    certificate: PDCertificate | None = None
    extra_cmi: float | None = None

    def to_json(self) -> dict:
        out: dict = {"status": self.status, "tested": self.tested, "reason": self.reason}
        if self.channel is not None:
            out["channel"] = self.channel.assignment()
            out["out_dim"] = self.channel.out_dim
        if self.certificate is not None:
            out["certificate"] = self.certificate.to_json()
        if self.extra_cmi is not None:
            out["residual_leak_cmi"] = self.extra_cmi
        return out


def _pd_down_extra_cmi(
    d: Dist3, ch: Channel, dbar: Dist3, support_eps: float
) -> float:
    """I(Z : block label of the degraded distribution | message, Zbar)."""
    assignment = ch.assignment()
    ccf_bar = conditional_common_function(dbar, support_eps)
    ma, mb = _common_part_maps(dbar, support_eps)
    dz = d.dims[2]
    dzbar = ch.out_dim
    max_blocks = max((len(p) for p in ccf_bar.per_z.values()), default=1)
    pairs = sorted({(a, b) for a in set(ma.values()) for b in set(mb.values())})
    m_index = {pair: i for i, pair in enumerate(pairs)}
    joint = np.zeros((dz, dzbar, len(pairs), max_blocks))
    for x, y, z in zip(*np.nonzero(d.p > support_eps)):
        zbar = assignment[z]
        b = ccf_bar.per_z[zbar].block_of_x[x]
        m = m_index[(ma[x], mb[y])]
        joint[z, zbar, m, b] += d.p[x, y, z]
    return conditional_mutual_information(joint, (0,), (3,), (1, 2))


def is_ubi_pd_down(
    d: Dist3,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
    budget: int = 64,
) -> PDDownResult:
    """Search deterministic channels on Z, coarsest first, for a UBI-PD image.

    Channels are enumerated as set partitions of the z-alphabet (one
    representative per output relabelling) in lexicographic restricted
    growth order, and the first passing channel is returned.  A passing
    channel must make the degraded distribution UBI-PD under the canonical
    protocol and leave the original symbol independent of the new block
    label given the message and the degraded symbol.
    """
    dz = d.dims[2]
    tested = 0
    for rgs in set_partitions(dz):
        if tested >= budget:
            return PDDownResult(INCONCLUSIVE, None, tested, "budget exhausted")
        tested += 1
        ch = Channel.deterministic(rgs)
        dbar = apply_channel_z(d, ch)
        status, cert = is_ubi_pd(dbar, tol, support_eps)
        if status != YES:
            continue
        extra = _pd_down_extra_cmi(d, ch, dbar, support_eps)
        if extra <= tol:
            return PDDownResult(YES, ch, tested, "channel found", cert, extra)
    return PDDownResult(INCONCLUSIVE, None, tested, "search space exhausted")


# ---------------------------------------------------------------------------
# combined report


@dataclass(frozen=True)
class ClassReport:
    """Verdicts for every class plus certificates and numeric diagnostics."""

    bi: str
    ubi: str
    ubi_pd: str
    ubi_pd_down: str
    semi_unambiguous: str
    unambiguous: str
    certificates: dict = field(repr=False)
    diagnostics: dict = field(repr=False)
    tolerances: dict = field(repr=False)

    def __post_init__(self) -> None:
        if self.ubi == YES and (
            self.bi != YES or self.ubi_pd != YES or self.ubi_pd_down != YES
        ):
            raise SecrecyForgeError("class nesting violated: UBI without PD chain")
        if self.unambiguous == YES and self.semi_unambiguous != YES:
            raise SecrecyForgeError(
                "class nesting violated: unambiguous but not semi-unambiguous"
            )

    def to_json(self) -> dict:
        return {
            "bi": self.bi,
            "ubi": self.ubi,
            "ubi_pd": self.ubi_pd,
            "ubi_pd_down": self.ubi_pd_down,
            "semi_unambiguous": self.semi_unambiguous,
            "unambiguous": self.unambiguous,
            "certificates": self.certificates,
            "diagnostics": self.diagnostics,
            "tolerances": self.tolerances,
        }


def classify(
    d: Dist3,
    tol: float = config.ENTROPY_TOL,
    support_eps: float = config.SUPPORT_EPS,
    budget: int = 64,
    channel_search: bool = True,
) -> ClassReport:
    """Run every class check and assemble a consistent report.

    ``channel_search=False`` skips the UBI-PD-down enumeration (useful on
    large Eve alphabets); the verdict is then inconclusive unless implied
    by a finer class.
    """
    ccf = conditional_common_function(d, support_eps)
    cmi = cmi_xy_given_blocks(d, ccf)
    h_resid = h_xy_given_blocks(d, ccf)
    bi = YES if cmi <= tol else NO
    ubi = YES if (bi == YES and ccf.per_z_injective) else NO
    semi = YES if is_semi_unambiguous(d, support_eps) else NO
    unamb = YES if (semi == YES and h_resid <= tol) else NO

    certificates: dict = {}
    if ubi == YES:
        labels_x: dict[int, int] = {}
        labels_y: dict[int, int] = {}
        for z, part in ccf.per_z.items():
            for x, b in part.block_of_x.items():
                labels_x[x] = ccf.global_labels[(z, b)]
            for y, b in part.block_of_y.items():
                labels_y[y] = ccf.global_labels[(z, b)]
        certificates["ubi"] = {
            "label_of_x": {str(k): v for k, v in sorted(labels_x.items())},
            "label_of_y": {str(k): v for k, v in sorted(labels_y.items())},
        }

    if bi == NO:
        pd_status: str = NO
        pd_cert = None
    else:
        pd_status, pd_cert = _pd_canonical(d, tol, support_eps)
    if pd_cert is not None:
        certificates["ubi_pd"] = pd_cert.to_json()

    if channel_search:
        down = is_ubi_pd_down(d, tol, support_eps, budget)
    else:
        down = PDDownResult(INCONCLUSIVE, None, 0, "search skipped")
    if down.status != YES and pd_status == YES:
        # the identity channel always certifies a UBI-PD distribution, even
        # when the search stopped short of it
        ch = Channel.identity(d.dims[2])
        down = PDDownResult(YES, ch, down.tested, "implied by UBI-PD (identity)", pd_cert, 0.0)
    certificates["ubi_pd_down"] = down.to_json()

    report = ClassReport(
        bi=bi,
        ubi=ubi,
        ubi_pd=pd_status,
        ubi_pd_down=down.status,
        semi_unambiguous=semi,
        unambiguous=unamb,
        certificates=certificates,
        diagnostics={
            "cmi_xy_given_blocks": cmi,
            "h_xy_given_blocks": h_resid,
            "per_z_injective": ccf.per_z_injective,
            "n_block_labels": ccf.n_labels,
        },
        tolerances={"entropy": tol, "support": support_eps},
    )
    return report
