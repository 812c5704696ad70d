"""Euclidean-motion alignment of labeled correspondences.

Exact recovery when pairwise distances match, least-squares (Procrustes)
alignment when they nearly match, distance-distortion certification, and
block detection with orientation signs.
"""

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    InvalidInputError,
    NotAnIsometryError,
    OrientationInfeasibleError,
    RankDeficiencyError,
)
from .geometry import EuclideanMotion, PointConfig, Simplex, simplex_volume

# Relative tolerance for "pairwise distances are equal" in exact_motion.
EXACT_DISTANCE_TOL = 1e-9
# Affine rank threshold: singular values below diam * this count as zero.
AFFINE_RANK_TOL = 1e-9
# Source simplex degeneracy threshold in affine_from_simplex: V_D > tol * diam^D.
SOURCE_SIMPLEX_TOL = 1e-10
# Target simplex degeneracy below this reports orientation sign 0.
TARGET_SIGN_TOL = 1e-12


class Correspondence:
    """A labeled pairing of two point configurations of equal cardinality,
    representing phi: source -> target."""

    def __init__(self, source, target):
        src = source if isinstance(source, PointConfig) else PointConfig(source)
        tgt = target if isinstance(target, PointConfig) else PointConfig(target)
        if len(src) != len(tgt):
            raise InvalidInputError(
                f"source has {len(src)} points but target has {len(tgt)}"
            )
        if src.dimension != tgt.dimension:
            raise InvalidInputError("source and target dimensions differ")
        if len(src) > 1 and src.min_separation == 0.0:
            raise InvalidInputError("source points must be pairwise distinct")
        if len(tgt) > 1 and tgt.min_separation == 0.0:
            raise InvalidInputError("target points must be pairwise distinct")
        self.source = src
        self.target = tgt

    @property
    def dimension(self):
        return self.source.dimension

    def __len__(self):
        return len(self.source)

    def restrict(self, indices):
        idx = list(indices)
        return Correspondence(self.source.points[idx], self.target.points[idx])

    def __repr__(self):
        return f"Correspondence(n={len(self)}, D={self.dimension})"


@dataclass(frozen=True)
class DistortionCertificate:
    """Smallest delta with (1+delta)^-1 <= |z_i-z_j|/|y_i-y_j| <= 1+delta."""

    delta: float
    worst_pair: tuple
    max_ratio: float
    min_ratio: float


@dataclass(frozen=True)
class Block:
    """A (D+1)-tuple whose source simplex is voluminous at level eta, signed by
    the orientation of the affine map matching the correspondence on it."""

    indices: tuple
    volume: float
    diam: float
    eta_level: float
    sign: int


def certify_distortion(c):
    """Measure the worst pairwise distance ratio of a correspondence."""
    n = len(c)
    if n < 2:
        raise InvalidInputError("need at least 2 points to certify distortion")
    dy = c.source.pairwise_distances
    dz = c.target.pairwise_distances
    delta = -1.0
    worst = (0, 1)
    max_ratio = -np.inf
    min_ratio = np.inf
    for i in range(n):
        for j in range(i + 1, n):
            if dy[i, j] == 0.0 or dz[i, j] == 0.0:
                raise InvalidInputError(
                    f"coincident points at pair ({i}, {j}); ratio undefined"
                )
            ratio = dz[i, j] / dy[i, j]
            max_ratio = max(max_ratio, ratio)
            min_ratio = min(min_ratio, ratio)
            d = max(ratio, 1.0 / ratio) - 1.0
            if d > delta:
                delta = d
                worst = (i, j)
    return DistortionCertificate(delta=float(delta), worst_pair=worst,
                                 max_ratio=float(max_ratio), min_ratio=float(min_ratio))


def _procrustes(c, proper):
    """Centroid matching + orthogonal factor of the cross-covariance.

    proper=False allows either orientation (the raw polar factor); proper=True
    flips the smallest singular direction when needed (Kabsch correction).
    Returns (motion, max-residual).
    """
    y = c.source.points
    z = c.target.points
    dim = c.dimension
    cy = y.mean(axis=0)
    cz = z.mean(axis=0)
    h = (y - cy).T @ (z - cz)
    u, _, vt = np.linalg.svd(h)
    rot = vt.T @ u.T
    if proper and np.linalg.det(rot) < 0:
        flip = np.eye(dim)
        flip[-1, -1] = -1.0
        rot = vt.T @ flip @ u.T
    motion = EuclideanMotion(rot, cz - rot @ cy)
    residual = float(np.max(np.linalg.norm(z - motion.apply(y), axis=1))) if len(c) else 0.0
    return motion, residual


def best_motion(c):
    """Least-squares rigid alignment over all Euclidean motions (either
    orientation).  Returns (motion, max_i |z_i - A(y_i)|)."""
    if len(c) < 1:
        raise InvalidInputError("need at least one point")
    return _procrustes(c, proper=False)


def best_proper_motion(c):
    """As best_motion but with the orientation constrained to +1."""
    if len(c) < 1:
        raise InvalidInputError("need at least one point")
    return _procrustes(c, proper=True)


def exact_motion(c, require_proper=False):
    """Recover a Euclidean motion A with A(y_i) = z_i when pairwise distances
    match to relative tolerance 1e-9.

    With require_proper, A is constrained to be proper; this is always
    possible when the points span less than the full dimension, and raises
    OrientationInfeasibleError otherwise when only a reflection fits.
    """
    n = len(c)
    dy = c.source.pairwise_distances
    dz = c.target.pairwise_distances
    for i in range(n):
        for j in range(i + 1, n):
            gap = abs(dy[i, j] - dz[i, j])
            if gap > EXACT_DISTANCE_TOL * max(dy[i, j], dz[i, j]):
                raise NotAnIsometryError(
                    f"pair ({i}, {j}) has |y_i-y_j| = {dy[i, j]!r} but "
                    f"|z_i-z_j| = {dz[i, j]!r}"
                )
    diam = max(c.source.diameter, c.target.diameter)
    tol = EXACT_DISTANCE_TOL * max(diam, 1e-300)

    motion, residual = _procrustes(c, proper=False)
    if require_proper and not motion.is_proper:
        proper_motion, proper_residual = _procrustes(c, proper=True)
        if proper_residual <= tol or n == 1:
            return proper_motion
        # The unconstrained fit is improper and the constrained one does not
        # interpolate: the targets span all of R^D, so only a reflection works.
        raise OrientationInfeasibleError(
            "points span the full dimension and only an improper motion "
            f"interpolates (proper residual {proper_residual:.3e})"
        )
    if residual > tol:
        raise NotAnIsometryError(
            f"no Euclidean motion interpolates: residual {residual:.3e} "
            f"exceeds {tol:.3e}"
        )
    return motion


def normalize_pair(c):
    """Translate so y_1 = z_1 = 0 and scale so the ordered-pair sum
    sum_{i != j} |y_i-y_j|^2 + sum_{i != j} |z_i-z_j|^2 equals 1.

    Returns (normalized correspondence, scale factor applied per coordinate).
    """
    n = len(c)
    if n < 2:
        raise InvalidInputError("need at least 2 points to normalize")
    y = c.source.points - c.source.points[0]
    z = c.target.points - c.target.points[0]
    dy = c.source.pairwise_distances
    dz = c.target.pairwise_distances
    total = float(np.sum(dy**2) + np.sum(dz**2))  # ordered pairs: each distance twice
    if total <= 0.0:
        raise InvalidInputError("all points coincident; cannot normalize")
    scale = 1.0 / np.sqrt(total)
    return Correspondence(scale * y, scale * z), float(scale)


def affine_from_simplex(x, y):
    """The unique affine map T with T(x_i) = y_i on D+1 affinely independent
    source points.

    Returns (linear part, translation, orientation sign); the sign is 0 when
    the target simplex is degenerate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape != y.shape:
        raise InvalidInputError("x and y must be (D+1, D) arrays of equal shape")
    dim = x.shape[1]
    if x.shape[0] != dim + 1:
        raise InvalidInputError(f"need exactly D+1 = {dim + 1} points, got {x.shape[0]}")
    sx = Simplex(x)
    diam = PointConfig(x).diameter
    vol = simplex_volume(sx)
    if vol <= SOURCE_SIMPLEX_TOL * diam**dim:
        raise RankDeficiencyError(
            f"source simplex is degenerate: V_D = {vol:.3e} at diameter {diam:.3e}"
        )
    ex = (x[1:] - x[0]).T  # D x D edge matrices
    ey = (y[1:] - y[0]).T
    linear = np.linalg.solve(ex.T, ey.T).T  # solves linear @ ex = ey
    translation = y[0] - linear @ x[0]
    vol_y = simplex_volume(Simplex(y))
    diam_y = PointConfig(y).diameter
    if vol_y <= TARGET_SIGN_TOL * diam_y**dim:
        sign = 0
    else:
        sign = 1 if np.linalg.det(linear) > 0 else -1
    return linear, translation, sign


def _block_sign(c, indices):
    """Orientation sign of the affine map matching the correspondence on a
    (D+1)-tuple; 0 when either simplex is too degenerate to classify."""
    x = c.source.points[list(indices)]
    y = c.target.points[list(indices)]
    try:
        _, _, sign = affine_from_simplex(x, y)
    except RankDeficiencyError:
        return 0
    return sign


def detect_blocks(c, eta):
    """Exhaustively classify voluminous (D+1)-tuples of a correspondence.

    A tuple qualifies when its source simplex volume is at least
    eta^D * diam(tuple)^D; qualifying tuples are split by the orientation
    sign of the interpolating affine map.  Returns (positives, negatives).
    """
    if not (0.0 < eta < 1.0):
        raise InvalidInputError(f"eta must lie in (0, 1), got {eta!r}")
    n = len(c)
    dim = c.dimension
    positives = []
    negatives = []
    if n < dim + 1:
        return positives, negatives
    dists = c.source.pairwise_distances
    for idx in combinations(range(n), dim + 1):
        sel = list(idx)
        diam = float(dists[np.ix_(sel, sel)].max())
        if diam == 0.0:
            continue
        vol = simplex_volume(Simplex(c.source.points[sel]))
        if vol < eta**dim * diam**dim:
            continue
        sign = _block_sign(c, idx)
        if sign == 0:
            continue
        block = Block(indices=idx, volume=vol, diam=diam, eta_level=float(eta), sign=sign)
        (positives if sign > 0 else negatives).append(block)
    return positives, negatives
