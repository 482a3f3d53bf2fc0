"""Finite weighted hypergraphs and submodular systems.

A system is a finite vertex set together with weighted edges, where an edge
is either an undirected hyperedge (a nonempty vertex subset) or a directed
hyperarc (a pair of nonempty tail/head subsets).  The module provides the
combinatorial primitives everything else builds on: degrees, the shortest
path metric induced by shared edge support, the diameter, the stationary
distribution, and the degree-weighted inner product

    <f, g> = sum_x f(x) g(x) / d_x .

Vertex functions are plain numpy arrays indexed by the system's dense
vertex order (external string ids map to indices 0..n-1 in input order).
All objects are immutable after construction; internal caches are
populate-once and safe to share across threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Edge",
    "HypergraphSystem",
    "undirected",
    "directed",
    "as_fraction",
]


def as_fraction(value) -> Fraction:
    """Convert an edge weight to an exact rational.

    Accepts ints, Fractions, strings like ``"3/7"``, and floats (converted
    via their exact binary value).
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise TypeError(f"cannot interpret {value!r} as an exact weight")


@dataclass(frozen=True)
class Edge:
    """One edge of a system, in unified tail/head form.

    An undirected hyperedge with members S is stored as tails = heads = S;
    a directed hyperarc keeps its tail and head sets.  ``support`` is the
    union, which is what degrees and adjacency are defined through.
    """

    tails: tuple[int, ...]
    heads: tuple[int, ...]
    directed: bool

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(set(self.tails) | set(self.heads)))

    @property
    def members(self) -> tuple[int, ...]:
        if self.directed:
            raise ValueError("directed hyperarc has no member set; use tails/heads")
        return self.tails


@dataclass(frozen=True)
class undirected:
    """Edge spec: undirected hyperedge over ``members`` with a weight."""

    members: Sequence[str]
    weight: object = 1


@dataclass(frozen=True)
class directed:
    """Edge spec: directed hyperarc from ``tails`` to ``heads`` with a weight."""

    tails: Sequence[str]
    heads: Sequence[str]
    weight: object = 1


class HypergraphSystem:
    """A connected, finite, weighted hypergraph (or directed-hyperarc system).

    Parameters
    ----------
    vertices : sequence of str
        Vertex ids; their order fixes the dense index order.
    edges : sequence of ``undirected`` / ``directed`` specs
        Edge list.  Duplicate edges are kept distinct.

    Raises
    ------
    ValueError
        On empty vertex sets, unknown ids, non-positive weights, empty edge
        supports, or a disconnected adjacency relation.
    """

    def __init__(self, vertices: Sequence[str], edges: Iterable) -> None:
        vertices = tuple(str(v) for v in vertices)
        if not vertices:
            raise ValueError("vertex set must be nonempty")
        if len(set(vertices)) != len(vertices):
            raise ValueError("duplicate vertex ids")
        self.vertices: tuple[str, ...] = vertices
        self.index: dict[str, int] = {v: i for i, v in enumerate(vertices)}
        self.n = len(vertices)

        built: list[Edge] = []
        weights_exact: list[Fraction] = []
        for spec in edges:
            if isinstance(spec, undirected):
                members = self._resolve(spec.members, "members")
                built.append(Edge(tails=members, heads=members, directed=False))
                w = spec.weight
            elif isinstance(spec, directed):
                tails = self._resolve(spec.tails, "tails")
                heads = self._resolve(spec.heads, "heads")
                built.append(Edge(tails=tails, heads=heads, directed=True))
                w = spec.weight
            else:
                raise TypeError(f"unsupported edge spec: {spec!r}")
            wq = as_fraction(w)
            if wq <= 0:
                raise ValueError(f"edge weight must be positive, got {w!r}")
            weights_exact.append(wq)

        self.edges: tuple[Edge, ...] = tuple(built)
        self.weights_exact: tuple[Fraction, ...] = tuple(weights_exact)
        self.weights: np.ndarray = np.array([float(w) for w in weights_exact])

        deg_exact = [Fraction(0)] * self.n
        for e, w in zip(self.edges, self.weights_exact):
            for x in e.support:
                deg_exact[x] += w
        if any(d == 0 for d in deg_exact):
            isolated = [self.vertices[i] for i, d in enumerate(deg_exact) if d == 0]
            raise ValueError(f"isolated vertices (degree 0): {isolated}")
        self.degrees_exact: tuple[Fraction, ...] = tuple(deg_exact)
        self.degrees: np.ndarray = np.array([float(d) for d in deg_exact])

        self._adjacency: list[set[int]] = [set() for _ in range(self.n)]
        for e in self.edges:
            supp = e.support
            for a in supp:
                self._adjacency[a].update(supp)
        for i in range(self.n):
            self._adjacency[i].discard(i)

        if not self._connected():
            raise ValueError("hypergraph must be connected")

        self._dist: np.ndarray | None = None
        self._caches: dict = {}

    # -- construction helpers -------------------------------------------------

    def _resolve(self, ids: Sequence[str], kind: str) -> tuple[int, ...]:
        ids = list(ids)
        if not ids:
            raise ValueError(f"edge {kind} must be nonempty")
        out = []
        for v in ids:
            v = str(v)
            if v not in self.index:
                raise KeyError(f"unknown vertex id {v!r}")
            out.append(self.index[v])
        return tuple(sorted(set(out)))

    def _connected(self) -> bool:
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in self._adjacency[i]:
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return len(seen) == self.n

    # -- basic queries ---------------------------------------------------------

    def vertex(self, x) -> int:
        """Dense index of a vertex given by id or index."""
        if isinstance(x, (int, np.integer)):
            if not 0 <= int(x) < self.n:
                raise KeyError(f"vertex index {x} out of range")
            return int(x)
        if x not in self.index:
            raise KeyError(f"unknown vertex id {x!r}")
        return self.index[x]

    def degree(self, x) -> float:
        """Sum of weights of edges whose support contains x."""
        return float(self.degrees[self.vertex(x)])

    @property
    def is_graph(self) -> bool:
        """True when every edge is an undirected hyperedge on two vertices."""
        return all(
            not e.directed and len(e.support) == 2 for e in self.edges
        )

    @property
    def has_directed(self) -> bool:
        return any(e.directed for e in self.edges)

    def volume(self) -> float:
        return float(self.degrees.sum())

    def volume_exact(self) -> Fraction:
        return sum(self.degrees_exact, Fraction(0))

    def stationary(self) -> np.ndarray:
        """Stationary distribution pi with pi(x) = d_x / vol(V)."""
        return self.degrees / self.degrees.sum()

    # -- metric -----------------------------------------------------------------

    def distance_matrix(self) -> np.ndarray:
        """All-pairs shortest path lengths for the shared-support adjacency."""
        if self._dist is None:
            n = self.n
            dist = np.full((n, n), -1, dtype=int)
            for s in range(n):
                dist[s, s] = 0
                queue = deque([s])
                while queue:
                    i = queue.popleft()
                    for j in self._adjacency[i]:
                        if dist[s, j] < 0:
                            dist[s, j] = dist[s, i] + 1
                            queue.append(j)
            self._dist = dist
        return self._dist

    def distance(self, x, y) -> int:
        return int(self.distance_matrix()[self.vertex(x), self.vertex(y)])

    def diameter(self) -> int:
        return int(self.distance_matrix().max())

    # -- inner product and vertex functions -------------------------------------

    def inner(self, f: np.ndarray, g: np.ndarray) -> float:
        """Degree-weighted inner product f^T D^{-1} g."""
        return float(np.dot(np.asarray(f) / self.degrees, np.asarray(g)))

    def norm(self, f: np.ndarray) -> float:
        return float(np.sqrt(max(self.inner(f, f), 0.0)))

    def delta(self, x) -> np.ndarray:
        out = np.zeros(self.n)
        out[self.vertex(x)] = 1.0
        return out

    def vector(self, values) -> np.ndarray:
        """Coerce a mapping or sequence into a vertex function array."""
        if isinstance(values, Mapping):
            out = np.zeros(self.n)
            for k, v in values.items():
                out[self.vertex(k)] = float(v)
            return out
        arr = np.asarray(values, dtype=float)
        if arr.shape != (self.n,):
            raise ValueError(f"expected {self.n} values, got shape {arr.shape}")
        return arr

    # -- misc --------------------------------------------------------------------

    def cache(self, key, build):
        """Populate-once cache for derived structures (regions, polytopes, ...)."""
        if key not in self._caches:
            self._caches[key] = build()
        return self._caches[key]

    def __repr__(self) -> str:  # pragma: no cover
        kind = "graph" if self.is_graph else (
            "directed system" if self.has_directed else "hypergraph"
        )
        return f"HypergraphSystem({self.n} vertices, {len(self.edges)} edges, {kind})"
