"""The multivalued submodular Laplacian, its energy, and canonical selection.

The (normalized) Laplacian maps a vertex function f to the set of vectors

    sum_e w_e * c_e * b_e,   c_e = Lovasz value of D^{-1} f on edge e,

with b_e ranging over the argmax face of the edge's base polytope.  The
image is a convex compact set; the canonical selection is its unique
minimal-norm element in the degree-weighted inner product, computed here by
a min-norm-point solve over the product of faces.  ``membership_distance``
certifies whether a candidate vector belongs to the image set, which is the
optimality check used by the resolvent solvers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import HypergraphSystem
from .polytope import (
    DEFAULT_FACE_TOL,
    DEFAULT_GAP_TOL,
    ArgmaxFace,
    argmax_face,
    lovasz_value,
    min_norm_point,
)

__all__ = [
    "LaplacianImage",
    "energy_Q",
    "canonical_laplacian",
    "operator_min_norm",
    "membership_distance",
    "laplacian_member_check",
]

DEFAULT_MEMBER_TOL = 1e-8


@dataclass
class LaplacianImage:
    """Canonical element of the Laplacian image at f, with its face data.

    ``representative`` is the minimal-norm selection; ``faces`` and
    ``coefficients`` record, per edge, the maximizing face and its Lovasz
    coefficient c_e; ``face_weights`` the convex weights realizing the
    representative inside each face's hull.
    """

    representative: object
    faces: list[ArgmaxFace]
    coefficients: list
    face_weights: list
    normalized: bool
    is_canonical: bool = True

    def norm(self, system: HypergraphSystem) -> float:
        rep = np.asarray([float(x) for x in self.representative])
        return system.norm(rep)


def _probe(system: HypergraphSystem, f, normalized: bool, exact: bool):
    if exact:
        fq = [x if isinstance(x, Fraction) else Fraction(x) for x in f]
        if normalized:
            return [x / d for x, d in zip(fq, system.degrees_exact)]
        return fq
    f = np.asarray(f, dtype=float)
    return f / system.degrees if normalized else f


def energy_Q(system: HypergraphSystem, g) -> float:
    """Energy (1/2) sum_e w_e * (Lovasz value of g on e)^2.

    The argument is taken as-is: callers working with the normalized
    Laplacian pass D^{-1} g themselves.
    """
    g = np.asarray(g, dtype=float)
    total = 0.0
    for e, w in zip(system.edges, system.weights):
        total += w * lovasz_value(system, e, g) ** 2
    return 0.5 * total


def canonical_laplacian(
    system: HypergraphSystem,
    f,
    normalized: bool = True,
    exact: bool = False,
    face_tol: float = DEFAULT_FACE_TOL,
    gap_tol: float = DEFAULT_GAP_TOL,
) -> LaplacianImage:
    """Minimal-norm element of the (normalized) Laplacian image at f.

    Parameters
    ----------
    normalized : bool
        Probe the faces at D^{-1} f (the normalized operator) instead of f.
    exact : bool
        Run the face identification and the min-norm solve over Fractions;
        the result is then exact.
    """
    v = _probe(system, f, normalized, exact)
    tol = Fraction(0) if exact else face_tol
    faces = [argmax_face(system, e, v, tol=tol) for e in system.edges]
    weights = system.weights_exact if exact else system.weights
    coeffs = [face.value for face in faces]

    terms = []
    keep = []
    for i, (w, face, c) in enumerate(zip(weights, faces, coeffs)):
        if (exact and c != 0) or (not exact and abs(float(c)) > 1e-15):
            terms.append((w, face, c))
            keep.append(i)
    res = min_norm_point(terms, system, target=None, gap_tol=gap_tol, exact=exact)

    face_weights = [dict() for _ in faces]
    for slot, i in enumerate(keep):
        face_weights[i] = res.face_weights[slot]
    rep = res.point
    if not exact:
        rep = np.asarray(rep, dtype=float)
    return LaplacianImage(
        representative=rep,
        faces=faces,
        coefficients=coeffs,
        face_weights=face_weights,
        normalized=normalized,
    )


def operator_min_norm(system: HypergraphSystem, f, normalized: bool = True, **kw) -> float:
    """|||L f|||: the norm of the canonical selection at f."""
    return canonical_laplacian(system, f, normalized=normalized, **kw).norm(system)


def membership_distance(
    system: HypergraphSystem,
    f,
    candidate,
    normalized: bool = True,
    exact: bool = False,
    face_tol: float = DEFAULT_FACE_TOL,
    gap_tol: float = DEFAULT_GAP_TOL,
):
    """Degree-weighted distance from ``candidate`` to the Laplacian image at f.

    Returns the distance (float mode) or the exact squared distance as a
    Fraction (exact mode); zero certifies membership.
    """
    v = _probe(system, f, normalized, exact)
    tol = Fraction(0) if exact else face_tol
    weights = system.weights_exact if exact else system.weights
    terms = []
    for e, w in zip(system.edges, weights):
        face = argmax_face(system, e, v, tol=tol)
        c = face.value
        if (exact and c != 0) or (not exact and abs(float(c)) > 1e-15):
            terms.append((w, face, c))
    if exact:
        target = [x if isinstance(x, Fraction) else Fraction(x) for x in candidate]
    else:
        target = np.asarray(candidate, dtype=float)
    res = min_norm_point(terms, system, target=target, gap_tol=gap_tol, exact=exact)
    return res.distance_sq if exact else res.distance


def laplacian_member_check(
    system: HypergraphSystem,
    f,
    candidate,
    tol: float = DEFAULT_MEMBER_TOL,
    normalized: bool = True,
    exact: bool = False,
    face_tol: float = DEFAULT_FACE_TOL,
) -> bool:
    """True iff ``candidate`` lies within ``tol`` of the Laplacian image at f."""
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    dist = membership_distance(
        system, f, candidate, normalized=normalized, exact=exact, face_tol=face_tol,
        gap_tol=min(DEFAULT_GAP_TOL, tol**2 / 4 + 1e-18),
    )
    if exact:
        return dist == 0
    return dist <= tol
