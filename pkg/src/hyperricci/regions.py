"""Weak-order regions on which the resolvent acts linearly.

A weak order is an ordered partition of the vertex set into blocks of equal
value, listed from highest to lowest.  On the set of functions whose value
pattern matches a weak order rho, the map g -> g + lambda * L(D^{-1} g) has
a linear inverse: contract each block to a single vertex (summing degrees,
and summing weights of edges whose top/bottom blocks coincide), invert the
small symmetric matrix

    G~ = D~ + lambda * sum_e w_e (e_top - e_bot)(e_top - e_bot)^T,

and expand back by duplicating rows/columns across block members.  The
expanded inverse has equal columns within each block, which is exactly why
the multivalued selection inside each edge's face does not matter.

The same geometry carries the data describing the closure of the region's
image as a finitely generated cone: the cumulative degree vectors eta_j and
the per-edge face pairs attached to each gap index j, which the Kantorovich
difference LP consumes.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._rational import rat_inv
from .model import HypergraphSystem

__all__ = [
    "weak_orders",
    "count_weak_orders",
    "RegionGeometry",
    "region_geometries",
    "REGION_ENUMERATION_CAP",
]

REGION_ENUMERATION_CAP = 8
_CACHE_LIMIT = 10000


def weak_orders(n: int):
    """Yield all ordered set partitions of range(n), highest block first."""

    def rec(remaining: tuple[int, ...]):
        if not remaining:
            yield ()
            return
        k = len(remaining)
        for mask in range(1, 1 << k):
            block = tuple(remaining[i] for i in range(k) if (mask >> i) & 1)
            rest = tuple(remaining[i] for i in range(k) if not (mask >> i) & 1)
            for tail in rec(rest):
                yield (block,) + tail

    yield from rec(tuple(range(n)))


@lru_cache(maxsize=None)
def count_weak_orders(n: int) -> int:
    if n == 0:
        return 1
    from math import comb

    return sum(comb(n, k) * count_weak_orders(n - k) for k in range(1, n + 1))


class RegionGeometry:
    """Combinatorial data of one weak-order region of a system."""

    def __init__(self, system: HypergraphSystem, blocks) -> None:
        self.system = system
        self.blocks = tuple(tuple(sorted(b)) for b in blocks)
        self.l = len(self.blocks)
        n = system.n
        blk_of = np.empty(n, dtype=int)
        for j, b in enumerate(self.blocks):
            for i in b:
                blk_of[i] = j
        self.blk_of = blk_of

        self.dtil = np.bincount(blk_of, weights=system.degrees, minlength=self.l)

        # active edges: top block of tails strictly above bottom block of heads
        active = []
        for idx, e in enumerate(system.edges):
            kt = min(blk_of[x] for x in e.tails)
            kh = max(blk_of[y] for y in e.heads)
            if kt < kh:
                pairs = tuple(
                    (x, y)
                    for x in e.tails
                    if blk_of[x] == kt
                    for y in e.heads
                    if blk_of[y] == kh
                )
                active.append((idx, kt, kh, pairs))
        self.active_edges = tuple(active)

        self._ntilde_cache: dict = {}
        self._eta = None
        self._dtil_exact = None

    # -- linear inverse -------------------------------------------------------

    def contracted_matrix(self, lam: float) -> np.ndarray:
        g = np.diag(self.dtil).astype(float)
        w = self.system.weights
        for idx, kt, kh, _ in self.active_edges:
            g[kt, kt] += lam * w[idx]
            g[kh, kh] += lam * w[idx]
            g[kt, kh] -= lam * w[idx]
            g[kh, kt] -= lam * w[idx]
        return g

    def ntilde(self, lam: float) -> np.ndarray:
        key = ("f", lam)
        if key not in self._ntilde_cache:
            self._ntilde_cache[key] = np.linalg.inv(self.contracted_matrix(lam))
        return self._ntilde_cache[key]

    def ntilde_exact(self, lam: Fraction):
        key = ("q", lam)
        if key not in self._ntilde_cache:
            l = self.l
            if self._dtil_exact is None:
                dte = [Fraction(0)] * l
                for i, d in enumerate(self.system.degrees_exact):
                    dte[self.blk_of[i]] += d
                self._dtil_exact = dte
            g = [[Fraction(0)] * l for _ in range(l)]
            for j in range(l):
                g[j][j] = Fraction(self._dtil_exact[j])
            for idx, kt, kh, _ in self.active_edges:
                w = self.system.weights_exact[idx] * lam
                g[kt][kt] += w
                g[kh][kh] += w
                g[kt][kh] -= w
                g[kh][kt] -= w
            self._ntilde_cache[key] = rat_inv(g)
        return self._ntilde_cache[key]

    def aggregate(self, f: np.ndarray) -> np.ndarray:
        """Block sums of a vertex function (the contraction of D f is D~ f~)."""
        return np.bincount(self.blk_of, weights=np.asarray(f, dtype=float),
                           minlength=self.l)

    def aggregate_exact(self, f):
        out = [Fraction(0)] * self.l
        for i, v in enumerate(f):
            out[self.blk_of[i]] += Fraction(v)
        return out

    def expand(self, block_values):
        """Lift per-block values to a full vertex vector."""
        if isinstance(block_values, np.ndarray):
            return block_values[self.blk_of]
        return [block_values[self.blk_of[i]] for i in range(self.system.n)]

    # -- image cone data --------------------------------------------------------

    def eta(self) -> np.ndarray:
        """Rows eta_j: degree vector restricted to the top j+1 blocks."""
        if self._eta is None:
            n = self.system.n
            out = np.zeros((self.l, n))
            for j in range(self.l):
                mask = self.blk_of <= j
                out[j, mask] = self.system.degrees[mask]
            self._eta = out
        return self._eta

    def gap_edges(self, j: int):
        """Active edges whose value gap spans block boundary j -> j+1."""
        return [
            (idx, pairs)
            for idx, kt, kh, pairs in self.active_edges
            if kt <= j < kh
        ]


def region_geometries(system: HypergraphSystem):
    """All weak-order geometries of a system (cached when small enough).

    Raises ``ValueError`` above the enumeration cap: exact region methods
    are meant for desk-scale instances.
    """
    n = system.n
    if n > REGION_ENUMERATION_CAP:
        raise ValueError(
            f"region enumeration supports up to {REGION_ENUMERATION_CAP} vertices, got {n}"
        )
    if count_weak_orders(n) <= _CACHE_LIMIT:
        return system.cache(
            ("regions", n),
            lambda: [RegionGeometry(system, b) for b in weak_orders(n)],
        )
    return (RegionGeometry(system, b) for b in weak_orders(n))
