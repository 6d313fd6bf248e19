"""Maximal common partitionings of bipartite supports.

Two parties holding X and Y can agree, without communication, on the label
of the connected component of the support graph that their symbols fall
into: the vertex set is supp(X) . supp(Y) and (x, y) is an edge whenever
p(x, y) > 0.  That component label is the maximal common function of X and
Y; its entropy is their common information.

For a tripartite distribution the same construction applies slice-wise
given each z.  The per-z partitions are then stitched together by merging
block instances across z that share an x or a y symbol, which yields the
finest labelling that can be written both as a function of x alone and as
a function of y alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import config
from .distributions import Dist2, Dist3, entropy_bits
from .errors import InvalidDistribution

__all__ = [
    "UnionFind",
    "CommonPartition",
    "CondCommonFunction",
    "maximal_common_partition",
    "common_information",
    "conditional_common_function",
    "cond_common_entropy",
]


class UnionFind:
    """Disjoint sets over range(n) with path compression."""

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class CommonPartition:
    """Blocks (X_i, Y_i) of a bipartite support, ordered by smallest x.

    Symbols of probability zero carry no label and appear in no block.
    """

    blocks: tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]
    block_of_x: Mapping[int, int] = field(repr=False)
    block_of_y: Mapping[int, int] = field(repr=False)

    def __len__(self) -> int:
        return len(self.blocks)

    def probabilities(self, d2: Dist2) -> np.ndarray:
        """Probability mass of each block under a compatible Dist2."""
        out = np.zeros(len(self.blocks))
        for i, (xs, ys) in enumerate(self.blocks):
            out[i] = d2.p[np.ix_(xs, ys)].sum()
        return out

    def to_json(self) -> dict:
        return {
            "blocks": [
                {"x": list(xs), "y": list(ys)} for xs, ys in self.blocks
            ]
        }


def maximal_common_partition(
    d2: Dist2, support_eps: float = config.SUPPORT_EPS
) -> CommonPartition:
    """Connected components of the bipartite support graph of a Dist2."""
    dx, dy = d2.dims
    uf = UnionFind(dx + dy)
    xs, ys = np.nonzero(d2.p > support_eps)
    for x, y in zip(xs.tolist(), ys.tolist()):
        uf.union(x, dx + y)

    supp_x = sorted(set(xs.tolist()))
    supp_y = sorted(set(ys.tolist()))
    roots: dict[int, int] = {}
    members_x: list[list[int]] = []
    members_y: list[list[int]] = []
    for x in supp_x:  # ascending, so blocks come out ordered by smallest x
        r = uf.find(x)
        if r not in roots:
            roots[r] = len(members_x)
            members_x.append([])
            members_y.append([])
        members_x[roots[r]].append(x)
    for y in supp_y:
        r = uf.find(dx + y)
        if r not in roots:
            # cannot happen for a normalized pmf: every supported y has
            # a supported x partner
            raise InvalidDistribution("y-symbol with mass but no x partner")
        members_y[roots[r]].append(y)

    blocks = tuple(
        (tuple(mx), tuple(my)) for mx, my in zip(members_x, members_y)
    )
    block_of_x = {x: i for i, (mx, _) in enumerate(blocks) for x in mx}
    block_of_y = {y: i for i, (_, my) in enumerate(blocks) for y in my}
    return CommonPartition(blocks, block_of_x, block_of_y)


def common_information(
    d2: Dist2, support_eps: float = config.SUPPORT_EPS
) -> float:
    """Entropy in bits of the maximal common function of X and Y."""
    part = maximal_common_partition(d2, support_eps)
    return entropy_bits(part.probabilities(d2))


@dataclass(frozen=True)
class CondCommonFunction:
    """Per-z maximal partitions plus a canonical cross-z labelling.

    ``global_labels`` maps (z, block index within z) to the label of its
    cross-z merge component; components are numbered by their smallest
    (z, block) pair.  ``per_z_injective`` records whether two distinct
    blocks of one z ever share a component, which is exactly the obstacle
    to relabelling the per-z partitions into a single function of x alone
    and of y alone.
    """

    per_z: Mapping[int, CommonPartition]
    global_labels: Mapping[tuple[int, int], int]
    per_z_injective: bool
    z_probs: np.ndarray = field(repr=False)

    @property
    def n_labels(self) -> int:
        return 1 + max(self.global_labels.values(), default=-1)

    def label_of_xz(self, x: int, z: int) -> int | None:
        part = self.per_z.get(z)
        if part is None or x not in part.block_of_x:
            return None
        return self.global_labels[(z, part.block_of_x[x])]

    def label_of_yz(self, y: int, z: int) -> int | None:
        part = self.per_z.get(z)
        if part is None or y not in part.block_of_y:
            return None
        return self.global_labels[(z, part.block_of_y[y])]

    def to_json(self) -> dict:
        return {
            "per_z": {str(z): part.to_json() for z, part in self.per_z.items()},
            "global_labels": {
                f"{z},{b}": lbl for (z, b), lbl in sorted(self.global_labels.items())
            },
            "per_z_injective": self.per_z_injective,
        }


def conditional_common_function(
    d: Dist3, support_eps: float = config.SUPPORT_EPS
) -> CondCommonFunction:
    """Per-z maximal common partitions with canonical cross-z merge labels."""
    dx, dy, dz = d.dims
    z_probs = d.p.sum(axis=(0, 1))
    per_z: dict[int, CommonPartition] = {}
    for z in range(dz):
        if z_probs[z] <= support_eps:
            continue
        per_z[z] = maximal_common_partition(
            Dist2(d.p[:, :, z] / z_probs[z]), support_eps
        )

    # merge block instances across z that share an x or a y symbol
    nodes = [(z, b) for z in sorted(per_z) for b in range(len(per_z[z]))]
    index = {node: i for i, node in enumerate(nodes)}
    uf = UnionFind(len(nodes))
    seen_x: dict[int, int] = {}
    seen_y: dict[int, int] = {}
    for z in sorted(per_z):
        for b, (bxs, bys) in enumerate(per_z[z].blocks):
            i = index[(z, b)]
            for x in bxs:
                if x in seen_x:
                    uf.union(seen_x[x], i)
                else:
                    seen_x[x] = i
            for y in bys:
                if y in seen_y:
                    uf.union(seen_y[y], i)
                else:
                    seen_y[y] = i

    labels: dict[tuple[int, int], int] = {}
    root_label: dict[int, int] = {}
    for node in nodes:  # nodes sorted by (z, block): labels are canonical
        r = uf.find(index[node])
        if r not in root_label:
            root_label[r] = len(root_label)
        labels[node] = root_label[r]

    injective = True
    for z in per_z:
        zl = [labels[(z, b)] for b in range(len(per_z[z]))]
        if len(set(zl)) != len(zl):
            injective = False
            break

    return CondCommonFunction(per_z, labels, injective, z_probs)


def cond_common_entropy(
    d: Dist3, support_eps: float = config.SUPPORT_EPS
) -> float:
    """H of the per-z block label given Z: sum_z p(z) H(blocks of p(.,.|z))."""
    ccf = conditional_common_function(d, support_eps)
    total = 0.0
    for z, part in ccf.per_z.items():
        pz = float(ccf.z_probs[z])
        cond = Dist2(d.p[:, :, z] / pz)
        total += pz * entropy_bits(part.probabilities(cond))
    return total
