"""Base polytopes of edge cut functions and min-norm points over faces.

Every edge carries a base polytope: the convex hull of signed indicator
differences delta_x - delta_y, with (x, y) ranging over member pairs for an
undirected hyperedge, or over tail/head pairs (plus the origin) for a
directed hyperarc.  The support function of that polytope evaluated at a
vertex function is the edge's Lovasz-extension value; the maximizing face
drives the multivalued Laplacian.

``min_norm_point`` finds the unique nearest point to a target inside a
Minkowski sum of scaled faces, in the degree-weighted norm.  It is the
workhorse behind the canonical (minimal-norm) Laplacian selection and
behind membership certificates for resolvent optimality.  The solver is a
min-norm-point method over the sum polytope: a Frank-Wolfe outer loop whose
iterates are kept fully corrective by affine minimization over the current
corral, with away/drop steps when corral weights leave the simplex.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._rational import rat_solve
from .model import Edge, HypergraphSystem

__all__ = [
    "BasePolytope",
    "ArgmaxFace",
    "MinNormResult",
    "lovasz_value",
    "argmax_face",
    "min_norm_point",
]

DEFAULT_FACE_TOL = 1e-9
DEFAULT_GAP_TOL = 1e-10
MAX_MNP_ITER = 2000


@dataclass(frozen=True)
class BasePolytope:
    """Vertex description of an edge's base polytope.

    ``pairs`` lists (x, y) index pairs generating delta_x - delta_y;
    ``has_zero`` marks the extra origin generator of directed hyperarcs.
    """

    edge: Edge
    pairs: tuple[tuple[int, int], ...]
    has_zero: bool

    @classmethod
    def of(cls, edge: Edge) -> "BasePolytope":
        pairs = tuple((x, y) for x in edge.tails for y in edge.heads)
        return cls(edge=edge, pairs=pairs, has_zero=edge.directed)

    def generators(self, n: int) -> list[np.ndarray]:
        out = []
        for x, y in self.pairs:
            g = np.zeros(n)
            g[x] += 1.0
            g[y] -= 1.0
            out.append(g)
        if self.has_zero:
            out.append(np.zeros(n))
        return out


@dataclass(frozen=True)
class ArgmaxFace:
    """Generators of an edge polytope attaining the maximum of b^T v.

    ``pairs`` holds the attaining (x, y) index pairs; ``has_zero`` marks
    that the origin generator attains the maximum too (directed edges with
    value <= tol).  ``value`` is the attained maximum, i.e. the edge's
    Lovasz-extension value at the probe vector.
    """

    edge: Edge
    pairs: tuple[tuple[int, int], ...]
    has_zero: bool
    value: object  # float or Fraction

    @property
    def atom_count(self) -> int:
        return len(self.pairs) + (1 if self.has_zero else 0)


def lovasz_value(system: HypergraphSystem, edge: Edge, v):
    """Edge Lovasz-extension value: max of b^T v over the base polytope.

    Equals max(v on tails) - min(v on heads), clamped at zero for directed
    hyperarcs.  Works on float arrays and on Fraction sequences alike.
    """
    top = max(v[x] for x in edge.tails)
    bot = min(v[y] for y in edge.heads)
    val = top - bot
    if edge.directed and val < 0:
        return type(val)(0) if not isinstance(val, Fraction) else Fraction(0)
    return val


def argmax_face(system: HypergraphSystem, edge: Edge, v, tol=DEFAULT_FACE_TOL) -> ArgmaxFace:
    """All base-polytope generators within ``tol`` of the maximum of b^T v."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    value = lovasz_value(system, edge, v)
    cutoff = value - tol
    pairs = tuple(
        (x, y) for x in edge.tails for y in edge.heads if v[x] - v[y] >= cutoff
    )
    has_zero = bool(edge.directed and 0 >= cutoff)
    return ArgmaxFace(edge=edge, pairs=pairs, has_zero=has_zero, value=value)


@dataclass
class MinNormResult:
    """Outcome of a min-norm-point solve over a Minkowski sum of faces.

    ``point`` is the optimal sum vector, ``distance`` its degree-weighted
    distance to the target (the norm itself when the target is zero),
    ``face_weights`` the recovered convex weights per face (one dict
    {atom index: weight} per term, atoms ordered pairs-then-zero), and
    ``gap`` the final Frank-Wolfe gap bounding the squared-distance error.
    """

    point: object
    distance: float
    face_weights: list[dict[int, object]]
    gap: float
    iterations: int
    distance_sq: object = None


def _atoms_for_term(scale, face: ArgmaxFace, n: int, exact: bool):
    """Scaled generator vectors of one face, as dense vectors."""
    zero = [Fraction(0)] * n if exact else None
    atoms = []
    for x, y in face.pairs:
        if exact:
            g = [Fraction(0)] * n
            g[x] += scale
            g[y] -= scale
        else:
            g = np.zeros(n)
            g[x] += scale
            g[y] -= scale
        atoms.append(g)
    if face.has_zero:
        atoms.append(list(zero) if exact else np.zeros(n))
    return atoms


def min_norm_point(
    terms,
    system: HypergraphSystem,
    target=None,
    gap_tol: float = DEFAULT_GAP_TOL,
    exact: bool = False,
    max_iter: int = MAX_MNP_ITER,
) -> MinNormResult:
    """Nearest point to ``target`` in a Minkowski sum of scaled faces.

    Parameters
    ----------
    terms : list of (weight, face, coefficient)
        Each term contributes weight * coefficient * Conv(face generators)
        to the Minkowski sum.  Terms with zero scale or a single atom are
        handled directly.
    system : HypergraphSystem
        Supplies the degree weights of the inner product.
    target : vertex function, optional
        Defaults to the origin, which yields the minimal-norm point.
    gap_tol : float
        Termination threshold on the Frank-Wolfe gap (float mode); exact
        mode terminates at gap == 0.
    exact : bool
        Run over Fractions for certified results.

    Raises
    ------
    RuntimeError
        If the gap tolerance is not reached within ``max_iter`` iterations.
    """
    n = system.n
    if exact:
        dinv = [Fraction(1) / d for d in system.degrees_exact]
        tgt = [Fraction(x) for x in target] if target is not None else [Fraction(0)] * n
    else:
        dinv = 1.0 / system.degrees
        tgt = np.asarray(target, dtype=float) if target is not None else np.zeros(n)

    face_atoms = []
    for weight, face, coeff in terms:
        scale = weight * coeff
        face_atoms.append(_atoms_for_term(scale, face, n, exact))
    active = [i for i, atoms in enumerate(face_atoms) if len(atoms) > 0]
    if any(len(face_atoms[i]) == 0 for i in range(len(face_atoms))):
        raise ValueError("every face must be nonempty")

    def inner(u, v):
        if exact:
            return sum((a * b * w for a, b, w in zip(u, v, dinv)), Fraction(0))
        return float(np.dot(u * dinv, v))

    def edot(u, v):
        if exact:
            return sum((a * b for a, b in zip(u, v)), Fraction(0))
        return float(np.dot(u, v))

    def vec_sum(choice):
        """Sum vector for a per-face atom choice tuple."""
        if exact:
            out = [Fraction(0)] * n
            for i in active:
                a = face_atoms[i][choice[i]]
                for k in range(n):
                    out[k] += a[k]
            return out
        out = np.zeros(n)
        for i in active:
            out += face_atoms[i][choice[i]]
        return out

    def lmo(grad):
        """Per-face linear minimization: atom tuple minimizing <grad, sum>."""
        choice = []
        for i in range(len(face_atoms)):
            atoms = face_atoms[i]
            best, best_val = 0, edot(grad, atoms[0])
            for j in range(1, len(atoms)):
                val = edot(grad, atoms[j])
                if val < best_val:
                    best, best_val = j, val
            choice.append(best)
        return tuple(choice)

    def residual(point):
        if exact:
            return [p - t for p, t in zip(point, tgt)]
        return point - tgt

    # corral of points of the sum polytope, with provenance
    r0 = residual(vec_sum(tuple(0 for _ in face_atoms)))
    grad0 = [2 * ri * wi for ri, wi in zip(r0, dinv)] if exact else 2.0 * r0 * dinv
    start = lmo(grad0)
    corral_choice = [start]
    corral_point = [vec_sum(start)]
    weights = [Fraction(1)] if exact else [1.0]

    def current_point():
        if exact:
            out = [Fraction(0)] * n
            for w, p in zip(weights, corral_point):
                for k in range(n):
                    out[k] += w * p[k]
            return out
        out = np.zeros(n)
        for w, p in zip(weights, corral_point):
            out += w * p
        return out

    def affine_min():
        """Affine minimizer over the corral: weights summing to 1."""
        m = len(corral_point)
        if m == 1:
            return [Fraction(1)] if exact else [1.0]
        res = [residual(p) for p in corral_point]
        if exact:
            gram = [[inner(res[i], res[j]) for j in range(m)] for i in range(m)]
            mat = [row + [Fraction(1)] for row in gram]
            mat.append([Fraction(1)] * m + [Fraction(0)])
            rhs = [Fraction(0)] * m + [Fraction(1)]
            sol = rat_solve(mat, rhs)
            if sol is None:
                return None
            return sol[:m]
        gram = np.array([[inner(res[i], res[j]) for j in range(m)] for i in range(m)])
        mat = np.zeros((m + 1, m + 1))
        mat[:m, :m] = gram
        mat[:m, m] = 1.0
        mat[m, :m] = 1.0
        rhs = np.zeros(m + 1)
        rhs[m] = 1.0
        sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        return list(sol[:m])

    zero = Fraction(0) if exact else 0.0
    it = 0
    prev_obj = None
    stalled = 0
    while True:
        it += 1
        if it > max_iter:
            raise RuntimeError(
                "min-norm-point did not reach the gap tolerance "
                f"({gap_tol}) within {max_iter} iterations"
            )
        y = current_point()
        r = residual(y)
        grad = (
            [2 * ri * wi for ri, wi in zip(r, dinv)]
            if exact
            else 2.0 * r * dinv
        )
        q_choice = lmo(grad)
        q = vec_sum(q_choice)
        if exact:
            gap = sum((g * (a - b) for g, a, b in zip(grad, y, q)), Fraction(0))
            done = gap <= 0
        else:
            gap = float(np.dot(grad, y - q))
            scale = 1.0 + abs(float(np.dot(grad, y)))
            done = gap <= gap_tol * scale
            # the affine step lands on the exact corral optimum, so once the
            # objective stops moving the residual gap is float noise
            obj = inner(r, r)
            if prev_obj is not None and abs(prev_obj - obj) <= 1e-15 * (1.0 + obj):
                stalled += 1
                if stalled >= 2:
                    done = True
            else:
                stalled = 0
            prev_obj = obj
        if done:
            break
        if q_choice not in corral_choice:
            corral_choice.append(q_choice)
            corral_point.append(q)
            weights.append(zero)
        # minor cycle: fully corrective step with drop moves
        for _ in range(len(corral_point) + 2):
            alpha = affine_min()
            if alpha is None:
                # affinely dependent corral: drop the newest atom and retry
                corral_choice.pop()
                corral_point.pop()
                weights.pop()
                alpha = affine_min()
                if alpha is None:
                    break
            neg = [k for k, a in enumerate(alpha) if a < (0 if exact else -1e-14)]
            if not neg:
                weights = [a if a > 0 else zero for a in alpha]
                break
            # move from current weights toward alpha until a weight hits zero
            theta = None
            for k in neg:
                denom = weights[k] - alpha[k]
                if denom > 0:
                    t = weights[k] / denom
                    theta = t if theta is None or t < theta else theta
            if theta is None:
                theta = zero
            weights = [
                w + theta * (a - w) for w, a in zip(weights, alpha)
            ]
            keep = [k for k, w in enumerate(weights) if w > (0 if exact else 1e-15)]
            if len(keep) == len(weights):
                # numerical stall: clamp and exit minor cycle
                weights = [max(w, zero) for w in weights]
                break
            corral_choice = [corral_choice[k] for k in keep]
            corral_point = [corral_point[k] for k in keep]
            weights = [weights[k] for k in keep]

    y = current_point()
    r = residual(y)
    dist_sq = inner(r, r)
    if exact:
        distance = float(dist_sq) ** 0.5 if dist_sq > 0 else 0.0
    else:
        dist_sq = max(dist_sq, 0.0)
        distance = float(dist_sq) ** 0.5

    face_weights: list[dict[int, object]] = [dict() for _ in face_atoms]
    for w, choice in zip(weights, corral_choice):
        if w == 0:
            continue
        for i, j in enumerate(choice):
            face_weights[i][j] = face_weights[i].get(j, zero) + w

    return MinNormResult(
        point=y,
        distance=distance,
        face_weights=face_weights,
        gap=float(gap),
        iterations=it,
        distance_sq=dist_sq,
    )
