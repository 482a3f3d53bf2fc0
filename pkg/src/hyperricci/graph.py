"""Independent graph machinery: lazy random walks, optimal transport, and
Lin-Lu-Yau curvature.

For ordinary graphs the Laplacian is linear and everything here reduces to
classical objects: the lazy walk measure m_x^alpha, the L1-Wasserstein
distance between such measures (a small transportation LP), and the
Lin-Lu-Yau curvature obtained by letting the laziness tend to one.  None of
it touches the hypergraph region machinery, which is the point: this module
is the ground truth the nonlinear pipeline is checked against on graphs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .model import HypergraphSystem
from .simplex import linprog_dense

__all__ = [
    "require_graph",
    "adjacency_matrix",
    "normalized_laplacian_matrix",
    "LazyWalkMeasure",
    "lazy_walk_measure",
    "TransportPlan",
    "w1_distance",
    "w1_dual",
    "lly_curvature",
    "linear_resolvent",
    "heat_exact",
    "graph_eigenpairs",
]


def require_graph(system: HypergraphSystem) -> None:
    if not system.is_graph:
        raise ValueError("operation requires a graph (all edges undirected of size 2)")


def adjacency_matrix(system: HypergraphSystem) -> np.ndarray:
    """Weighted adjacency matrix; parallel edges accumulate."""
    require_graph(system)
    a = np.zeros((system.n, system.n))
    for e, w in zip(system.edges, system.weights):
        x, y = e.support
        a[x, y] += w
        a[y, x] += w
    return a


def normalized_laplacian_matrix(system: HypergraphSystem) -> np.ndarray:
    """The linear normalized Laplacian I - A D^{-1} acting on vertex functions."""
    a = adjacency_matrix(system)
    return np.eye(system.n) - a / system.degrees[np.newaxis, :]


@dataclass(frozen=True)
class LazyWalkMeasure:
    """One-step lazy random walk distribution centered at a vertex."""

    alpha: float
    center: int
    probabilities: np.ndarray


def lazy_walk_measure(system: HypergraphSystem, alpha: float, x) -> LazyWalkMeasure:
    """Measure with mass alpha at x and (1 - alpha) w(x, y)/d_x at neighbors."""
    require_graph(system)
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    xi = system.vertex(x)
    a = adjacency_matrix(system)
    p = (1.0 - alpha) * a[:, xi] / system.degrees[xi]
    p[xi] += alpha
    return LazyWalkMeasure(alpha=alpha, center=xi, probabilities=p)


@dataclass
class TransportPlan:
    """A coupling between two measures with its transport cost."""

    joint: np.ndarray  # indexed (source support, target support)
    source_support: tuple[int, ...]
    target_support: tuple[int, ...]
    cost: float


def _as_measure(system, mu):
    if isinstance(mu, LazyWalkMeasure):
        mu = mu.probabilities
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (system.n,) or np.any(mu < -1e-12):
        raise ValueError("measure must be a nonnegative vector on the vertex set")
    if abs(mu.sum() - 1.0) > 1e-9:
        raise ValueError("measure must sum to one")
    return mu


def w1_distance(system: HypergraphSystem, mu, nu) -> tuple[float, TransportPlan]:
    """L1-Wasserstein distance by the transportation LP (exact simplex).

    Returns the optimal cost and an optimal plan whose marginals are the
    two inputs.
    """
    require_graph(system)
    mu = _as_measure(system, mu)
    nu = _as_measure(system, nu)
    dist = system.distance_matrix().astype(float)
    src = tuple(int(i) for i in np.nonzero(mu > 1e-15)[0])
    tgt = tuple(int(j) for j in np.nonzero(nu > 1e-15)[0])
    ns, nt = len(src), len(tgt)
    cost = np.array([[dist[i, j] for j in tgt] for i in src])

    nv = ns * nt
    c = cost.reshape(nv)
    a_eq = np.zeros((ns + nt - 1, nv))
    b_eq = np.zeros(ns + nt - 1)
    for i in range(ns):
        a_eq[i, i * nt : (i + 1) * nt] = 1.0
        b_eq[i] = mu[src[i]]
    for j in range(nt - 1):  # last column constraint is redundant
        a_eq[ns + j, j::nt] = 1.0
        b_eq[ns + j] = nu[tgt[j]]
    res = linprog_dense(c, A_eq=a_eq, b_eq=b_eq)
    if not res.ok:
        raise RuntimeError(f"transportation LP failed: {res.status}")
    plan = np.asarray(res.x, dtype=float).reshape(ns, nt)
    return float(res.fun), TransportPlan(
        joint=plan, source_support=src, target_support=tgt, cost=float(res.fun)
    )


def w1_dual(system: HypergraphSystem, mu, nu) -> tuple[float, np.ndarray]:
    """Best 1-Lipschitz potential value sup f d(mu - nu), solved as an LP."""
    require_graph(system)
    mu = _as_measure(system, mu)
    nu = _as_measure(system, nu)
    dist = system.distance_matrix().astype(float)
    n = system.n
    rows = []
    rhs = []
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            row = np.zeros(n)
            row[i] = 1.0
            row[j] = -1.0
            rows.append(row)
            rhs.append(dist[i, j])
    res = linprog_dense(
        mu - nu,
        A_ub=np.array(rows),
        b_ub=np.array(rhs),
        free_vars=range(n),
        maximize=True,
    )
    if not res.ok:
        raise RuntimeError(f"dual transport LP failed: {res.status}")
    return float(res.fun), np.asarray(res.x, dtype=float)


def lly_curvature(system: HypergraphSystem, x, y, alphas=(0.75, 0.875, 0.9375, 0.96875)) -> float:
    """Lin-Lu-Yau coarse Ricci curvature: the alpha -> 1 limit of
    (1 - W1(m_x^alpha, m_y^alpha)/d(x, y)) / (1 - alpha).

    The ratio is eventually affine in (1 - alpha); the three largest alpha
    samples are fitted by a line and read off at 0.
    """
    require_graph(system)
    xi, yi = system.vertex(x), system.vertex(y)
    if xi == yi:
        raise ValueError("curvature needs two distinct vertices")
    alphas = sorted(alphas)
    if len(alphas) < 3:
        raise ValueError("need at least three laziness samples")
    d = system.distance(xi, yi)
    ratios = []
    for a in alphas:
        w1, _ = w1_distance(
            system, lazy_walk_measure(system, a, xi), lazy_walk_measure(system, a, yi)
        )
        kappa_a = 1.0 - w1 / d
        ratios.append(kappa_a / (1.0 - a))
    eps = np.array([1.0 - a for a in alphas[-3:]])
    ys = np.array(ratios[-3:])
    coef = np.polyfit(eps, ys, 1)
    return float(coef[1])


def linear_resolvent(system: HypergraphSystem, f, lam: float) -> np.ndarray:
    """Resolvent through the linear Laplacian: solve (I + lam L) g = f."""
    require_graph(system)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    mat = np.eye(system.n) + lam * normalized_laplacian_matrix(system)
    return np.linalg.solve(mat, np.asarray(f, dtype=float))


def heat_exact(system: HypergraphSystem, f, t: float) -> np.ndarray:
    """Heat flow on a graph via the dense matrix exponential."""
    require_graph(system)
    return expm(-t * normalized_laplacian_matrix(system)) @ np.asarray(f, dtype=float)


def graph_eigenpairs(system: HypergraphSystem):
    """Eigenpairs (mu, f) of the normalized Laplacian with L f = mu f.

    Computed through the symmetric conjugate I - D^{-1/2} A D^{-1/2};
    eigenvectors are mapped back so that the (multivalued) hypergraph
    Laplacian evaluated at f returns mu f.
    """
    require_graph(system)
    d = system.degrees
    a = adjacency_matrix(system)
    sym = np.eye(system.n) - a / np.sqrt(np.outer(d, d))
    vals, vecs = np.linalg.eigh(sym)
    out = []
    for k in range(len(vals)):
        f = np.sqrt(d) * vecs[:, k]
        out.append((float(vals[k]), f))
    return out
