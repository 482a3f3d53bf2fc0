"""The nonlinear Kantorovich difference KD_lambda and its maximizers.

KD_lambda(x, y) is the supremum of <J_lambda f, delta_x - delta_y> over
weighted 1-Lipschitz functions f.  By a shift argument the supremum is
attained on the compact polytope

    F = { g : 0 <= g_v <= d_v * diam,   g_u/d_u - g_v/d_v <= d(u, v) },

and splitting R^n by the weak-order regions on which the resolvent is
linear turns it into finitely many linear programs: on region rho the
objective is g^T N_rho (delta_x - delta_y) and the constraint that g lies
in the closure of the region's image is membership in a finitely generated
cone (gap variables h_j >= 0 with convex weights over each edge face).

The exact solver enumerates regions and solves every LP (float or rational
arithmetic); a vertex-scan upper bound over the integer points of F prunes
regions that cannot beat the incumbent.  The heuristic solver runs
projected supergradient ascent of f -> <J_lambda f, delta_x - delta_y>
with multi-start and reports an uncertified lower bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import HypergraphSystem
from .regions import RegionGeometry, region_geometries
from .resolvent import WeakOrder, resolve
from .simplex import linprog_dense

__all__ = [
    "LipschitzPolytope",
    "KDResult",
    "KDSolver",
    "kd_exact",
    "kd_heuristic",
    "kd_metric_check",
    "kd_upper_bound",
    "MetricReport",
]

INTEGER_POINT_CAP = 400000
EXACT_PRUNE_CAP = 400


class LipschitzPolytope:
    """The box-bounded weighted Lipschitz polytope F in g-coordinates.

    Vertices of F are integer in the normalized coordinates q = D^{-1} g
    (the difference-plus-box constraint matrix is a network matrix), which
    gives both an exact vertex scan for support-function bounds and cheap
    random vertices for multi-start.
    """

    def __init__(self, system: HypergraphSystem) -> None:
        self.system = system
        self.diam = system.diameter()
        self._points: np.ndarray | None = None

    def integer_points(self, cap: int = INTEGER_POINT_CAP) -> np.ndarray:
        """All integer q in [0, diam]^n with q_i - q_j <= d(i, j)."""
        if self._points is None:
            dist = self.system.distance_matrix()
            n = self.system.n
            diam = self.diam
            pts: list[list[int]] = []
            q = [0] * n

            def rec(i: int) -> None:
                if len(pts) > cap:
                    raise RuntimeError("integer point enumeration exceeded cap")
                if i == n:
                    pts.append(q.copy())
                    return
                for val in range(diam + 1):
                    ok = True
                    for j in range(i):
                        if abs(val - q[j]) > dist[i, j]:
                            ok = False
                            break
                    if ok:
                        q[i] = val
                        rec(i + 1)

            rec(0)
            self._points = np.array(pts, dtype=float)
        return self._points

    def contains(self, g, tol: float = 1e-9) -> bool:
        g = np.asarray(g, dtype=float)
        d = self.system.degrees
        q = g / d
        if np.any(q < -tol) or np.any(q > self.diam + tol):
            return False
        dist = self.system.distance_matrix()
        diff = q[:, None] - q[None, :]
        return bool(np.all(diff <= dist + tol))

    def distance_potential(self, x) -> np.ndarray:
        """The feasible potential q(v) = diam - d(v, x), scaled by degrees."""
        xi = self.system.vertex(x)
        dist = self.system.distance_matrix()
        q = self.diam - dist[xi].astype(float)
        return self.system.degrees * q

    def random_vertex(self, rng: np.random.Generator) -> np.ndarray:
        pts = self.integer_points()
        c = rng.normal(size=self.system.n)
        scores = (pts * self.system.degrees[None, :]) @ c
        return self.system.degrees * pts[int(np.argmax(scores))]

    def project(self, g, cycles: int = 80, tol: float = 1e-12) -> np.ndarray:
        """Dykstra projection onto F (Euclidean in normalized coordinates)."""
        d = self.system.degrees
        dist = self.system.distance_matrix()
        n = self.system.n
        q = np.asarray(g, dtype=float) / d
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
        corrections = np.zeros((len(pairs) + 1, n))
        for _ in range(cycles):
            moved = 0.0
            # box constraint
            y = q + corrections[0]
            proj = np.clip(y, 0.0, self.diam)
            corrections[0] = y - proj
            moved += float(np.abs(proj - q).max())
            q = proj
            for k, (i, j) in enumerate(pairs, start=1):
                y = q + corrections[k]
                viol = y[i] - y[j] - dist[i, j]
                if viol > 0:
                    proj = y.copy()
                    proj[i] -= viol / 2
                    proj[j] += viol / 2
                else:
                    proj = y
                corrections[k] = y - proj
                moved += float(np.abs(proj - q).max())
                q = proj
            if moved < tol:
                break
        return d * np.clip(q, 0.0, self.diam)


def lipschitz_polytope(system: HypergraphSystem) -> LipschitzPolytope:
    return system.cache(("lipschitz",), lambda: LipschitzPolytope(system))


@dataclass
class KDResult:
    """A Kantorovich-difference value with its achieving potential."""

    value: float
    potential: object
    region: object  # WeakOrder blocks tuple, or "heuristic"
    certified: bool
    method: str  # "exact-float" | "exact-rational" | "heuristic"
    pair: tuple[int, int] = (0, 0)


class _RegionLP:
    """The per-region linear program in cone coordinates (one lambda)."""

    def __init__(self, geom: RegionGeometry, lam, exact: bool) -> None:
        system = geom.system
        n = system.n
        l = geom.l
        self.geom = geom
        self.exact = exact
        self.nh = l
        slots = []
        for j in range(l - 1):
            for idx, pairs in geom.gap_edges(j):
                slots.append((j, idx, pairs))
        self.slots = slots

        if exact:
            lamq = lam if isinstance(lam, Fraction) else Fraction(lam)
            dq = system.degrees_exact
            cols: list[list[Fraction]] = []
            for j in range(l):
                col = [Fraction(0)] * n
                for i in range(n):
                    if geom.blk_of[i] <= j:
                        col[i] = dq[i]
                cols.append(col)
            for j, idx, pairs in slots:
                w = system.weights_exact[idx] * lamq
                for x, y in pairs:
                    col = [Fraction(0)] * n
                    col[x] += w
                    col[y] -= w
                    cols.append(col)
            nvars = len(cols)
            self.gmat = [[cols[j][i] for j in range(nvars)] for i in range(n)]
        else:
            lamf = float(lam)
            cols_f = [geom.eta()[j] for j in range(l)]
            for j, idx, pairs in slots:
                w = float(system.weights[idx]) * lamf
                for x, y in pairs:
                    col = np.zeros(n)
                    col[x] += w
                    col[y] -= w
                    cols_f.append(col)
            self.gmat = np.column_stack(cols_f)

        self.nvars = l + sum(len(p) for _, _, p in slots)
        self._build_constraints()

    def _build_constraints(self) -> None:
        system = self.geom.system
        n = system.n
        dist = system.distance_matrix()
        diam = int(dist.max())
        if self.exact:
            g = self.gmat
            dq = system.degrees_exact
            a_ub: list[list[Fraction]] = []
            b_ub: list[Fraction] = []
            for i in range(n):
                a_ub.append([-v for v in g[i]])
                b_ub.append(Fraction(0))
            for i in range(n):
                a_ub.append(list(g[i]))
                b_ub.append(dq[i] * diam)
            for i in range(n):
                for k in range(n):
                    if i == k:
                        continue
                    row = [gi / dq[i] - gk / dq[k] for gi, gk in zip(g[i], g[k])]
                    a_ub.append(row)
                    b_ub.append(Fraction(int(dist[i, k])))
            a_eq: list[list[Fraction]] = []
            off = self.nh
            for j, _, pairs in self.slots:
                row = [Fraction(0)] * self.nvars
                row[j] = Fraction(-1)
                for p in range(len(pairs)):
                    row[off + p] = Fraction(1)
                off += len(pairs)
                a_eq.append(row)
            self.a_ub, self.b_ub, self.a_eq = a_ub, b_ub, a_eq
            self.b_eq = [Fraction(0)] * len(a_eq)
        else:
            g = self.gmat
            d = system.degrees
            rows = [-g, g]
            rhs = [np.zeros(n), d * diam]
            pair_rows = []
            pair_rhs = []
            gn = g / d[:, None]
            for i in range(n):
                for k in range(n):
                    if i == k:
                        continue
                    pair_rows.append(gn[i] - gn[k])
                    pair_rhs.append(float(dist[i, k]))
            self.a_ub = np.vstack(rows + [np.array(pair_rows)])
            self.b_ub = np.concatenate(rhs + [np.array(pair_rhs)])
            a_eq = np.zeros((len(self.slots), self.nvars))
            off = self.nh
            for r, (j, _, pairs) in enumerate(self.slots):
                a_eq[r, j] = -1.0
                a_eq[r, off : off + len(pairs)] = 1.0
                off += len(pairs)
            self.a_eq = a_eq
            self.b_eq = np.zeros(len(self.slots))
        self.free = [self.nh - 1]

    def solve(self, cvec):
        """Maximize g^T cvec over F intersected with the region cone."""
        if self.exact:
            obj = [
                sum((self.gmat[i][j] * cvec[i] for i in range(len(cvec))), Fraction(0))
                for j in range(self.nvars)
            ]
            res = linprog_dense(
                obj,
                A_ub=self.a_ub,
                b_ub=self.b_ub,
                A_eq=self.a_eq if self.a_eq else None,
                b_eq=self.b_eq if self.a_eq else None,
                free_vars=self.free,
                maximize=True,
                exact=True,
            )
            if not res.ok:
                raise RuntimeError(f"region LP unexpectedly {res.status}")
            gvec = [
                sum((self.gmat[i][j] * res.x[j] for j in range(self.nvars)), Fraction(0))
                for i in range(len(self.gmat))
            ]
            return res.fun, gvec
        obj = self.gmat.T @ np.asarray(cvec, dtype=float)
        res = linprog_dense(
            obj,
            A_ub=self.a_ub,
            b_ub=self.b_ub,
            A_eq=self.a_eq if len(self.a_eq) else None,
            b_eq=self.b_eq if len(self.a_eq) else None,
            free_vars=self.free,
            maximize=True,
        )
        if not res.ok:
            raise RuntimeError(f"region LP unexpectedly {res.status}")
        return float(res.fun), self.gmat @ np.asarray(res.x, dtype=float)


class KDSolver:
    """Shared exact Kantorovich-difference solver for one (system, lambda).

    Region inverses, cone LPs, and the vertex scan are built lazily and
    reused across vertex pairs, which is what makes all-pairs metric checks
    and curvature sampling affordable.
    """

    def __init__(self, system: HypergraphSystem, lam, mode: str = "float") -> None:
        if mode not in ("float", "rational"):
            raise ValueError("mode must be 'float' or 'rational'")
        self.system = system
        self.mode = mode
        self.exact = mode == "rational"
        if self.exact:
            self.lam = lam if isinstance(lam, Fraction) else Fraction(lam)
        else:
            self.lam = float(lam)
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        self.geoms = list(region_geometries(system))
        self._lps: dict[int, _RegionLP] = {}
        self._scan = None  # float vertex-scan matrix (points x n), D-scaled
        self._scan_exact = None

    def _vertex_scan(self):
        if self._scan is None:
            pts = lipschitz_polytope(self.system).integer_points()
            self._scan = pts * self.system.degrees[None, :]
        return self._scan

    def _vertex_scan_exact(self):
        if self._scan_exact is None:
            pts = lipschitz_polytope(self.system).integer_points()
            if len(pts) > EXACT_PRUNE_CAP:
                self._scan_exact = ()
            else:
                dq = self.system.degrees_exact
                self._scan_exact = [
                    [Fraction(int(v)) * dq[j] for j, v in enumerate(row)]
                    for row in pts
                ]
        return self._scan_exact

    def _lp(self, k: int) -> _RegionLP:
        if k not in self._lps:
            self._lps[k] = _RegionLP(self.geoms[k], self.lam, self.exact)
        return self._lps[k]

    def _objective_vector(self, k: int, xi: int, yi: int):
        geom = self.geoms[k]
        bx, by = geom.blk_of[xi], geom.blk_of[yi]
        if self.exact:
            nt = geom.ntilde_exact(self.lam)
            ctil = [row[bx] - row[by] for row in nt]
            return geom.expand(ctil)
        nt = geom.ntilde(self.lam)
        return geom.expand(nt[:, bx] - nt[:, by])

    def kd(self, x, y) -> KDResult:
        xi, yi = self.system.vertex(x), self.system.vertex(y)
        if xi == yi:
            zero = Fraction(0) if self.exact else 0.0
            pot = (
                [Fraction(0)] * self.system.n
                if self.exact
                else np.zeros(self.system.n)
            )
            return KDResult(
                value=zero,
                potential=pot,
                region=None,
                certified=True,
                method=f"exact-{self.mode}",
                pair=(xi, yi),
            )
        if self.exact:
            return self._kd_exact_rational(xi, yi)
        return self._kd_exact_float(xi, yi)

    def _kd_exact_float(self, xi: int, yi: int) -> KDResult:
        scan = self._vertex_scan()
        order = []
        for k in range(len(self.geoms)):
            cvec = self._objective_vector(k, xi, yi)
            ub = float((scan @ cvec).max())
            order.append((ub, k, cvec))
        order.sort(key=lambda t: -t[0])
        best_val, best_g, best_k = -np.inf, None, None
        for ub, k, cvec in order:
            if ub <= best_val + 1e-14:
                break
            val, gvec = self._lp(k).solve(cvec)
            if val > best_val:
                best_val, best_g, best_k = val, gvec, k
        return KDResult(
            value=float(best_val),
            potential=best_g,
            region=WeakOrder(self.geoms[best_k].blocks),
            certified=True,
            method="exact-float",
            pair=(xi, yi),
        )

    def _kd_exact_rational(self, xi: int, yi: int) -> KDResult:
        scan = self._vertex_scan_exact()
        items = []
        for k in range(len(self.geoms)):
            cvec = self._objective_vector(k, xi, yi)
            if scan:
                ub = max(
                    sum((a * b for a, b in zip(row, cvec)), Fraction(0))
                    for row in scan
                )
            else:
                ub = None
            items.append((ub, k, cvec))
        if scan:
            items.sort(key=lambda t: t[0], reverse=True)
        best_val, best_g, best_k = None, None, None
        for ub, k, cvec in items:
            if best_val is not None and ub is not None and ub <= best_val:
                break
            val, gvec = self._lp(k).solve(cvec)
            if best_val is None or val > best_val:
                best_val, best_g, best_k = val, gvec, k
        return KDResult(
            value=best_val,
            potential=best_g,
            region=WeakOrder(self.geoms[best_k].blocks),
            certified=True,
            method="exact-rational",
            pair=(xi, yi),
        )


def _solver(system: HypergraphSystem, lam, mode: str) -> KDSolver:
    key = ("kd-solver", mode, Fraction(lam) if mode == "rational" else float(lam))
    return system.cache(key, lambda: KDSolver(system, lam, mode))


def kd_exact(system: HypergraphSystem, x, y, lam, mode: str = "float") -> KDResult:
    """Exact Kantorovich difference by region enumeration (cached solver)."""
    return _solver(system, lam, mode).kd(x, y)


def kd_heuristic(
    system: HypergraphSystem,
    x,
    y,
    lam: float,
    restarts: int = 32,
    iters: int = 60,
    seed: int = 0,
) -> KDResult:
    """Projected supergradient ascent lower bound for the Kantorovich
    difference; multi-start from polytope vertices and the distance
    potential.  Always returns the best value found (never certified).
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    xi, yi = system.vertex(x), system.vertex(y)
    if xi == yi:
        return KDResult(0.0, np.zeros(system.n), "heuristic", False, "heuristic", (xi, yi))
    lam = float(lam)
    pol = lipschitz_polytope(system)
    rng = np.random.default_rng(seed)
    d = system.degrees

    def phi_and_region(g):
        res = resolve(system, g, lam)
        val = res.g[xi] / d[xi] - res.g[yi] / d[yi]
        return float(val), res.region

    starts = [pol.distance_potential(xi)]
    for _ in range(restarts - 1):
        if rng.random() < 0.7:
            starts.append(pol.random_vertex(rng))
        else:
            starts.append(pol.project(d * rng.uniform(0, pol.diam, size=system.n)))

    best_val, best_g = -np.inf, None
    delta = np.zeros(system.n)
    delta[xi], delta[yi] = 1.0, -1.0
    for g0 in starts:
        g = g0.copy()
        val, region = phi_and_region(g)
        if val > best_val:
            best_val, best_g = val, g.copy()
        step0 = None
        for k in range(iters):
            geom = RegionGeometry(system, region.blocks) if region is not None else None
            if geom is None:
                break
            grad = geom.expand(
                geom.ntilde(lam)[:, geom.blk_of[xi]] - geom.ntilde(lam)[:, geom.blk_of[yi]]
            )
            gnorm = float(np.linalg.norm(grad))
            if gnorm < 1e-15:
                break
            if step0 is None:
                step0 = 0.5 * float(np.linalg.norm(d) * pol.diam + 1.0) / gnorm
            step = step0 / (1.0 + k / 8.0)
            g = pol.project(g + step * grad)
            val, region = phi_and_region(g)
            if val > best_val:
                best_val, best_g = val, g.copy()
    return KDResult(
        value=float(best_val),
        potential=best_g,
        region="heuristic",
        certified=False,
        method="heuristic",
        pair=(xi, yi),
    )


@dataclass
class MetricReport:
    """All-pairs Kantorovich differences with metric-axiom diagnostics."""

    matrix: np.ndarray
    symmetry_gap: float
    positivity_violations: list
    triangle_violations: list

    def ok(self, tol: float = 1e-8) -> bool:
        return (
            self.symmetry_gap <= tol
            and not self.positivity_violations
            and not self.triangle_violations
        )


def kd_metric_check(system: HypergraphSystem, lam, mode: str = "float", tol: float = 1e-8) -> MetricReport:
    """Compute KD on all ordered pairs and verify the metric axioms."""
    solver = _solver(system, lam, mode)
    n = system.n
    mat = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                mat[i, j] = float(solver.kd(i, j).value)
    sym = float(np.abs(mat - mat.T).max())
    positivity = [
        (i, j) for i in range(n) for j in range(n) if i != j and mat[i, j] <= tol
    ]
    triangle = []
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if len({i, j, k}) == 3 and mat[i, k] > mat[i, j] + mat[j, k] + tol:
                    triangle.append((i, j, k, mat[i, k] - mat[i, j] - mat[j, k]))
    return MetricReport(
        matrix=mat,
        symmetry_gap=sym,
        positivity_violations=positivity,
        triangle_violations=triangle,
    )


def kd_upper_bound(system: HypergraphSystem, x, y, lam: float) -> float:
    """Envelope 2 lam vol^{1/2} M + d(x, y) with M = max d_v^{-1/2}."""
    m = float(np.max(1.0 / np.sqrt(system.degrees)))
    return 2.0 * float(lam) * system.volume() ** 0.5 * m + system.distance(x, y)
