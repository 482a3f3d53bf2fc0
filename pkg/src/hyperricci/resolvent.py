"""Resolvent of the normalized Laplacian and the heat semigroup.

The resolvent J_lambda sends f to the unique minimizer of

    (1/2 lambda) ||f - g||^2  +  Q(D^{-1} g),

with the norm taken in the degree-weighted inner product.  Two independent
solvers are provided:

* ``resolve_prox``: an operator-splitting (ADMM) minimizer whose per-edge
  subproblem -- the proximal map of half the squared spread of values over
  an edge -- is solved in closed form by a two-threshold clip.  The result
  is certified by projecting the residual (f - g)/lambda onto the Laplacian
  image at g.

* ``resolve_region_exact``: enumeration of weak-order regions.  Each region
  yields a linear candidate through the contracted inverse; a candidate is
  accepted when its block values are monotone and the residual passes the
  membership certificate.  All accepted candidates must agree (the
  resolvent is unique); rational mode makes the certificate exact.

``resolve`` is the fast hybrid used internally: a loose splitting run
proposes the weak order, a single linear solve plus certificate finishes,
and full enumeration remains as the fallback.  Iterating the resolvent
gives the heat semigroup; differentiating it at lambda -> 0 cross-checks
the canonical Laplacian.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .laplacian import canonical_laplacian, membership_distance
from .model import HypergraphSystem
from .polytope import argmax_face
from .regions import REGION_ENUMERATION_CAP, RegionGeometry, region_geometries
from .simplex import linprog_dense

__all__ = [
    "WeakOrder",
    "ResolventResult",
    "resolve",
    "resolve_prox",
    "resolve_region_exact",
    "heat_semigroup",
    "heat_trajectory",
    "canonical_via_limit",
    "LimitComparison",
]

AGREEMENT_TOL = 1e-10
REGION_ACCEPT_TOL = 5e-12
PROX_DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class WeakOrder:
    """Ordered partition of the vertex set, highest value block first."""

    blocks: tuple[tuple[int, ...], ...]

    @classmethod
    def from_values(cls, values, tie_tol: float = 0.0) -> "WeakOrder":
        values = np.asarray(values, dtype=float)
        order = np.argsort(-values, kind="stable")
        blocks: list[list[int]] = [[int(order[0])]]
        for k in range(1, len(order)):
            prev, cur = order[k - 1], order[k]
            if values[prev] - values[cur] <= tie_tol:
                blocks[-1].append(int(cur))
            else:
                blocks.append([int(cur)])
        return cls(tuple(tuple(sorted(b)) for b in blocks))


@dataclass
class ResolventResult:
    """A resolvent value with its optimality certificate.

    ``g`` is J_lambda(f); ``residual`` = (f - g)/lambda, a certified member
    of the Laplacian image at g; ``optimality_gap`` is the certified
    distance of the residual to that image (0 in rational mode).
    """

    g: object
    residual: object
    method: str
    optimality_gap: float
    region: WeakOrder | None = None
    iterations: int = 0


# -- per-edge proximal map ----------------------------------------------------------


def prox_edge_spread(u, tails_loc, heads_loc, theta):
    """Closed-form prox of z -> (theta/2) * max(max_t z - min_h z, 0)^2 at u.

    Clips tail values down to a threshold a and head values up to b, where
    the clipped mass on each side equals theta * (a - b).  Returns u
    unchanged when the spread is already nonpositive.  Operates on plain
    Python scalars: edge supports are tiny and numpy overhead dominates
    otherwise.
    """
    vals = [float(x) for x in u]
    tset, hset = set(tails_loc), set(heads_loc)
    out = _prox_spread_scalar(
        vals,
        tuple(tails_loc),
        tuple(heads_loc),
        tuple(sorted(tset - hset)),
        tuple(sorted(hset - tset)),
        tuple(sorted(tset & hset)),
        float(theta),
    )
    return np.array(out)


def _prox_spread_scalar(vals, tails, heads, only_tail, only_head, both, theta):
    """Scalar core of the spread prox; ``vals`` is a list, returns a list."""
    tv = [vals[i] for i in tails]
    hv = [vals[i] for i in heads]
    m0 = max(tv) - min(hv)
    if m0 <= 0.0 or theta <= 0.0:
        return list(vals)

    ts = sorted(tv, reverse=True)
    hs = sorted(hv)
    ps = [0.0]
    for v in ts:
        ps.append(ps[-1] + v)
    qs = [0.0]
    for v in hs:
        qs.append(qs[-1] + v)
    ka_max, kb_max = len(ts), len(hs)

    # piecewise-linear march on m = a - b; piece boundaries are the m at
    # which another tail (head) value becomes clipped
    ka = kb = 1
    m_lo = 0.0
    inf = float("inf")
    while True:
        m_a_next = (ps[ka] - ka * ts[ka]) / theta if ka < ka_max else inf
        m_b_next = (kb * hs[kb] - qs[kb]) / theta if kb < kb_max else inf
        m_hi = m_a_next if m_a_next < m_b_next else m_b_next
        denom = theta / ka + theta / kb + 1.0
        m_cand = (ps[ka] / ka - qs[kb] / kb) / denom
        if m_cand <= m_hi + 1e-15 or m_hi == inf:
            m = m_cand if m_cand > m_lo else m_lo
            if m > m_hi:
                m = m_hi
            break
        m_lo = m_hi
        if m_a_next <= m_b_next:
            ka += 1
        else:
            kb += 1

    if m <= 0.0:
        return list(vals)
    a = (ps[ka] - theta * m) / ka
    b = (qs[kb] + theta * m) / kb
    z = list(vals)
    for i in only_tail:
        if z[i] > a:
            z[i] = a
    for i in only_head:
        if z[i] < b:
            z[i] = b
    for i in both:
        if z[i] > a:
            z[i] = a
        elif z[i] < b:
            z[i] = b
    return z


class _ProxWorkspace:
    """Static per-system data shared by the splitting solvers."""

    def __init__(self, system: HypergraphSystem) -> None:
        n = system.n
        idx = []
        self.slices = []
        self.tails = []
        self.heads = []
        self.only_tail = []
        self.only_head = []
        self.both = []
        start = 0
        for e in system.edges:
            sup = list(e.support)
            pos = {v: k for k, v in enumerate(sup)}
            t = tuple(pos[v] for v in e.tails)
            h = tuple(pos[v] for v in e.heads)
            tset, hset = set(t), set(h)
            self.tails.append(t)
            self.heads.append(h)
            self.only_tail.append(tuple(sorted(tset - hset)))
            self.only_head.append(tuple(sorted(hset - tset)))
            self.both.append(tuple(sorted(tset & hset)))
            idx.extend(sup)
            self.slices.append((start, start + len(sup)))
            start += len(sup)
        self.idxcat = np.array(idx, dtype=int)
        self.total = start
        self.cover = np.bincount(self.idxcat, minlength=n).astype(float)
        self.weights = [float(w) for w in system.weights]
        self.m = len(system.edges)

    def prox_all(self, points: np.ndarray, theta_per_edge) -> np.ndarray:
        """Apply the spread prox edgewise to a concatenated point vector."""
        out = np.empty_like(points)
        vals = points.tolist()
        for k in range(self.m):
            s, t = self.slices[k]
            out[s:t] = _prox_spread_scalar(
                vals[s:t],
                self.tails[k],
                self.heads[k],
                self.only_tail[k],
                self.only_head[k],
                self.both[k],
                theta_per_edge[k],
            )
        return out


def _workspace(system: HypergraphSystem) -> _ProxWorkspace:
    return system.cache(("prox-workspace",), lambda: _ProxWorkspace(system))


# -- proximal (splitting) solver ------------------------------------------------------


def resolve_prox(
    system: HypergraphSystem,
    f,
    lam: float,
    tol: float = PROX_DEFAULT_TOL,
    max_iter: int = 200000,
) -> ResolventResult:
    """Resolvent by operator splitting with a certified optimality gap.

    The returned ``optimality_gap`` is the degree-weighted distance of
    (f - g)/lambda to the Laplacian image at g; it is at most ``tol``.

    Raises
    ------
    RuntimeError
        When the iteration cap is exceeded before certification (usually a
        sign the tolerance is too tight for the conditioning at hand).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if tol <= 0:
        raise ValueError("tol must be positive")
    f = np.asarray(f, dtype=float)
    d = system.degrees
    ws = _workspace(system)
    idx = ws.idxcat

    v = f / d
    z = v[idx].copy()
    dual = np.zeros(ws.total)
    rho = max(1.0, 1.0 / lam)
    alpha = 1.7
    scale_f = 1.0 + float(np.abs(f).max())
    inner_eps = min(tol * 1e-2, 1e-9)
    face_tol = min(max(tol * 0.1, 1e-12), 1e-6)
    f_over_lam = f / lam

    it = 0
    while it < max_iter:
        diag = d / lam + rho * ws.cover
        thetas = [w / rho for w in ws.weights]
        for _ in range(10):
            it += 1
            rhs = f_over_lam + rho * np.bincount(
                idx, weights=z - dual, minlength=system.n
            )
            v = rhs / diag
            vs = v[idx]
            ax = alpha * vs + (1.0 - alpha) * z
            znew = ws.prox_all(ax + dual, thetas)
            dual += ax - znew
            pri = float(np.linalg.norm(vs - znew))
            dua = float(np.linalg.norm(rho * (znew - z)))
            z = znew
        if pri > 10 * dua:
            rho *= 2.0
            dual /= 2.0
        elif dua > 10 * pri:
            rho /= 2.0
            dual *= 2.0
        if pri <= inner_eps * scale_f and dua <= inner_eps * scale_f:
            g = d * v
            residual = (f - g) / lam
            gap = membership_distance(
                system, g, residual, normalized=True, face_tol=face_tol
            )
            if gap <= tol:
                return ResolventResult(
                    g=g,
                    residual=residual,
                    method="proximal",
                    optimality_gap=float(gap),
                    iterations=it,
                )
            inner_eps *= 0.1
            face_tol = max(face_tol * 0.1, 1e-12)
    raise RuntimeError(
        f"proximal resolvent did not certify tolerance {tol} within {max_iter} iterations"
    )


# -- region-exact solver ---------------------------------------------------------------


def _candidate_from_geometry(system, geom: RegionGeometry, f, lam, accept_tol):
    util = geom.ntilde(lam) @ geom.aggregate(f)
    scale = 1.0 + float(np.abs(util).max())
    if np.any(np.diff(util) > 1e-11 * scale):
        return None
    u = geom.expand(util)
    g = system.degrees * u
    residual = (f - g) / lam
    gap = membership_distance(
        system, g, residual, normalized=True, face_tol=1e-10
    )
    rscale = 1.0 + system.norm(residual)
    if gap <= accept_tol * rscale:
        return g, residual, float(gap)
    return None


def _member_feasible_exact(system, g, residual, face_tol=Fraction(0)) -> bool:
    """Exact membership of residual in the Laplacian image at g (rational LP)."""
    dq = system.degrees_exact
    u = [Fraction(x) / d for x, d in zip(g, dq)]
    cols = []
    convex_rows = []
    for e, w in zip(system.edges, system.weights_exact):
        face = argmax_face(system, e, u, tol=Fraction(0))
        c = face.value
        if c == 0:
            continue
        atom_ids = []
        for x, y in face.pairs:
            col = [Fraction(0)] * system.n
            col[x] += w * c
            col[y] -= w * c
            atom_ids.append(len(cols))
            cols.append(col)
        if face.has_zero:
            atom_ids.append(len(cols))
            cols.append([Fraction(0)] * system.n)
        convex_rows.append(atom_ids)
    nvars = len(cols)
    target = [Fraction(x) for x in residual]
    if nvars == 0:
        return all(t == 0 for t in target)
    A_eq = [[cols[j][i] for j in range(nvars)] for i in range(system.n)]
    b_eq = target
    for ids in convex_rows:
        row = [Fraction(0)] * nvars
        for j in ids:
            row[j] = Fraction(1)
        A_eq.append(row)
        b_eq.append(Fraction(1))
    res = linprog_dense([Fraction(0)] * nvars, A_eq=A_eq, b_eq=b_eq, exact=True)
    return res.ok


def resolve_region_exact(
    system: HypergraphSystem,
    f,
    lam,
    mode: str = "float",
    accept_tol: float = REGION_ACCEPT_TOL,
) -> ResolventResult:
    """Resolvent by weak-order enumeration with per-region certificates.

    Every region whose linear candidate is monotone and passes the
    membership certificate is collected; uniqueness of the resolvent makes
    agreement of all accepted candidates a correctness assertion, checked
    here before returning the first one.

    Raises
    ------
    RuntimeError
        If no region accepts (the regions cover everything, so this
        signals an internal bug) or if accepted candidates disagree.
    """
    if mode not in ("float", "rational"):
        raise ValueError("mode must be 'float' or 'rational'")
    if mode == "rational":
        return _resolve_region_rational(system, f, lam)
    f = np.asarray(f, dtype=float)
    lam = float(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    accepted = []
    for geom in region_geometries(system):
        cand = _candidate_from_geometry(system, geom, f, lam, accept_tol)
        if cand is not None:
            accepted.append((geom, *cand))
    if not accepted:
        raise RuntimeError(
            "no weak-order region accepted the resolvent candidate; "
            "this violates the covering property and signals a bug"
        )
    scale = 1.0 + float(np.abs(f).max())
    for k in range(1, len(accepted)):
        dev = float(np.abs(accepted[k][1] - accepted[0][1]).max())
        if dev > AGREEMENT_TOL * scale:
            raise RuntimeError(
                f"accepted region candidates disagree by {dev}; resolvent uniqueness violated"
            )
    geom, g, residual, gap = accepted[0]
    return ResolventResult(
        g=g,
        residual=residual,
        method="region-exact",
        optimality_gap=gap,
        region=WeakOrder(geom.blocks),
        iterations=len(accepted),
    )


def _resolve_region_rational(system: HypergraphSystem, f, lam) -> ResolventResult:
    lam = lam if isinstance(lam, Fraction) else Fraction(lam)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    fq = [x if isinstance(x, Fraction) else Fraction(x) for x in f]
    accepted = []
    for geom in region_geometries(system):
        agg = geom.aggregate_exact(fq)
        util = [
            sum((row[j] * v for j, v in enumerate(agg)), Fraction(0))
            for row in geom.ntilde_exact(lam)
        ]
        if any(util[j] < util[j + 1] for j in range(len(util) - 1)):
            continue
        u = geom.expand(util)
        g = [d * x for d, x in zip(system.degrees_exact, u)]
        residual = [(a - b) / lam for a, b in zip(fq, g)]
        if _member_feasible_exact(system, g, residual):
            accepted.append((geom, g, residual))
    if not accepted:
        raise RuntimeError("no weak-order region accepted the exact resolvent candidate")
    for k in range(1, len(accepted)):
        if accepted[k][1] != accepted[0][1]:
            raise RuntimeError("exact region candidates disagree; uniqueness violated")
    geom, g, residual = accepted[0]
    return ResolventResult(
        g=g,
        residual=residual,
        method="region-exact",
        optimality_gap=0.0,
        region=WeakOrder(geom.blocks),
        iterations=len(accepted),
    )


# -- hybrid fast path ------------------------------------------------------------------


def _loose_prox_values(system, f, lam, iters=40):
    """Cheap splitting run used only to guess the weak order of J_lambda f."""
    f = np.asarray(f, dtype=float)
    d = system.degrees
    ws = _workspace(system)
    idx = ws.idxcat
    v = f / d
    z = v[idx].copy()
    dual = np.zeros(ws.total)
    rho = max(1.0, 1.0 / lam)
    diag = d / lam + rho * ws.cover
    thetas = [w / rho for w in ws.weights]
    f_over_lam = f / lam
    for _ in range(iters):
        rhs = f_over_lam + rho * np.bincount(idx, weights=z - dual, minlength=system.n)
        v = rhs / diag
        vs = v[idx]
        znew = ws.prox_all(vs + dual, thetas)
        dual += vs - znew
        z = znew
    return v


def resolve(
    system: HypergraphSystem,
    f,
    lam: float,
    seed_region: WeakOrder | None = None,
    accept_tol: float = REGION_ACCEPT_TOL,
) -> ResolventResult:
    """Fast certified resolvent: guess the region, verify, fall back to scans.

    Equivalent to ``resolve_region_exact`` on success (same certificate),
    but normally needs a single linear solve.  Systems above the region
    enumeration cap fall back to the proximal solver.
    """
    f = np.asarray(f, dtype=float)
    lam = float(lam)
    if system.n > REGION_ENUMERATION_CAP:
        return resolve_prox(system, f, lam, tol=1e-10)

    tried = set()

    def try_blocks(blocks):
        if blocks in tried:
            return None
        tried.add(blocks)
        geom = RegionGeometry(system, blocks)
        cand = _candidate_from_geometry(system, geom, f, lam, accept_tol)
        if cand is None:
            return None
        g, residual, gap = cand
        return ResolventResult(
            g=g,
            residual=residual,
            method="region-exact",
            optimality_gap=gap,
            region=WeakOrder(geom.blocks),
        )

    if seed_region is not None:
        res = try_blocks(seed_region.blocks)
        if res is not None:
            return res

    # the resolvent preserves the value order for most inputs, so the order
    # of D^{-1} f itself is a free first guess
    u0 = f / system.degrees
    scale0 = 1.0 + float(np.abs(u0).max())
    for tie in (1e-12, 1e-9):
        res = try_blocks(WeakOrder.from_values(u0, tie_tol=tie * scale0).blocks)
        if res is not None:
            return res

    v = _loose_prox_values(system, f, lam)
    scale = 1.0 + float(np.abs(v).max())
    for tie in (1e-12, 1e-9, 1e-7, 1e-5, 1e-4, 1e-3):
        blocks = WeakOrder.from_values(v, tie_tol=tie * scale).blocks
        res = try_blocks(blocks)
        if res is not None:
            return res
    return resolve_region_exact(system, f, lam, accept_tol=accept_tol)


# -- heat semigroup ---------------------------------------------------------------------


def heat_semigroup(system: HypergraphSystem, f, t: float, lam: float) -> np.ndarray:
    """Approximate heat flow at time t: the resolvent iterated floor(t/lam) times.

    The caller controls lambda; the flow is the lambda -> 0 limit, so halve
    lambda and compare outputs to check convergence.
    """
    if t <= 0 or lam <= 0:
        raise ValueError("t and lambda must be positive")
    steps = int(np.floor(t / lam))
    g = np.asarray(f, dtype=float).copy()
    region = None
    for _ in range(steps):
        res = resolve(system, g, lam, seed_region=region)
        g = np.asarray(res.g, dtype=float)
        region = res.region
    return g


def heat_trajectory(system: HypergraphSystem, f, times, lam: float):
    """Heat flow sampled at the requested times (one resolvent chain)."""
    times = sorted(float(t) for t in times)
    if not times or times[0] <= 0 or lam <= 0:
        raise ValueError("times and lambda must be positive")
    out = []
    g = np.asarray(f, dtype=float).copy()
    region = None
    step = 0
    for t in times:
        target = int(np.floor(t / lam))
        while step < target:
            res = resolve(system, g, lam, seed_region=region)
            g = np.asarray(res.g, dtype=float)
            region = res.region
            step += 1
        out.append((t, g.copy()))
    return out


# -- limit cross-check --------------------------------------------------------------------


@dataclass
class LimitComparison:
    """Extrapolated -(J_lambda f - f)/lambda against the canonical selection."""

    estimate: np.ndarray
    reference: np.ndarray
    max_abs_gap: float
    quotients: list
    converged: bool


def _neville_at_zero(xs, ys):
    """Evaluate the interpolating polynomial through (xs, ys) at 0."""
    table = [np.asarray(y, dtype=float) for y in ys]
    xs = [float(x) for x in xs]
    k = len(xs)
    for m in range(1, k):
        nxt = []
        for i in range(k - m):
            num = xs[i + m] * table[i] - xs[i] * table[i + 1]
            nxt.append(num / (xs[i + m] - xs[i]))
        table = nxt
    return table[0]


def canonical_via_limit(system: HypergraphSystem, f, lambdas) -> LimitComparison:
    """Cross-check the canonical Laplacian through the resolvent difference
    quotient: -(J_lambda f - f)/lambda extrapolated to lambda = 0.
    """
    lambdas = [float(x) for x in lambdas]
    if any(l <= 0 for l in lambdas) or any(
        a <= b for a, b in zip(lambdas, lambdas[1:])
    ):
        raise ValueError("lambdas must be positive and strictly decreasing")
    f = np.asarray(f, dtype=float)
    quotients = []
    for lam in lambdas:
        res = resolve(system, f, lam)
        quotients.append(-(np.asarray(res.g) - f) / lam)
    estimate = _neville_at_zero(lambdas, quotients)
    shallow = _neville_at_zero(lambdas[1:], quotients[1:]) if len(lambdas) > 2 else quotients[-1]
    converged = bool(np.abs(estimate - shallow).max() <= 1e-6 * (1 + np.abs(estimate).max()))
    reference = np.asarray(
        canonical_laplacian(system, f, normalized=True).representative, dtype=float
    )
    gap = float(np.abs(estimate - reference).max())
    return LimitComparison(
        estimate=estimate,
        reference=reference,
        max_abs_gap=gap,
        quotients=quotients,
        converged=converged,
    )
