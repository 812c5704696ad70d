"""Exact and numerical geometric primitives.

Point configurations with cached pairwise distances, Euclidean motions
(orthogonal matrix + translation + orientation sign), simplices and their
volumes via Gram determinants, Gram-Schmidt orthonormalization, and
orthogonal projection residuals.  Everything here is immutable after
construction and safe to share across threads.
"""

from itertools import combinations
from math import factorial

import numpy as np

from .errors import InvalidInputError, RankDeficiencyError

# Orthogonality is checked entrywise at this tolerance.
ORTHOGONALITY_TOL = 1e-12
# det(T) must equal +-1 within this tolerance.
DETERMINANT_TOL = 1e-9
# Gram determinants below 1e-12 * scale^l count as zero volume.
DEGENERACY_TOL = 1e-12
# Gram-Schmidt pivot threshold after projection.
PIVOT_TOL = 1e-10


def _as_points(points, name="points"):
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-d array of shape (n, D)")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite coordinates")
    return arr


class PointConfig:
    """An ordered finite set of points in R^D with cached pairwise distances."""

    def __init__(self, points):
        arr = _as_points(points)
        n, dim = arr.shape
        if dim < 2:
            raise InvalidInputError(f"dimension must be >= 2, got {dim}")
        if n < 1:
            raise InvalidInputError("need at least one point")
        arr = arr.copy()
        arr.setflags(write=False)
        self._points = arr
        diffs = arr[:, None, :] - arr[None, :, :]
        dists = np.sqrt(np.sum(diffs * diffs, axis=-1))
        dists.setflags(write=False)
        self._dists = dists
        self._diameter = float(dists.max()) if n > 1 else 0.0
        if n > 1:
            off = dists[~np.eye(n, dtype=bool)]
            self._min_separation = float(off.min())
        else:
            self._min_separation = np.inf

    @property
    def dimension(self):
        return self._points.shape[1]

    @property
    def points(self):
        return self._points

    @property
    def pairwise_distances(self):
        return self._dists

    @property
    def diameter(self):
        return self._diameter

    @property
    def min_separation(self):
        return self._min_separation

    def __len__(self):
        return self._points.shape[0]

    def __getitem__(self, i):
        return self._points[i]

    def subset(self, indices):
        return PointConfig(self._points[list(indices)])

    def __repr__(self):
        return f"PointConfig(n={len(self)}, D={self.dimension})"


class EuclideanMotion:
    """A rigid map x -> Tx + x0 with T orthogonal and an explicit orientation sign."""

    def __init__(self, rotation, translation, orientation=None):
        rot = np.asarray(rotation, dtype=float)
        trans = np.asarray(translation, dtype=float).reshape(-1)
        if rot.ndim != 2 or rot.shape[0] != rot.shape[1]:
            raise InvalidInputError("rotation must be a square matrix")
        dim = rot.shape[0]
        if dim < 2:
            raise InvalidInputError("dimension must be >= 2")
        if trans.shape[0] != dim:
            raise InvalidInputError("translation dimension does not match rotation")
        gram_err = np.abs(rot.T @ rot - np.eye(dim)).max()
        if gram_err > ORTHOGONALITY_TOL:
            raise InvalidInputError(
                f"rotation is not orthogonal: |T^T T - I|_max = {gram_err:.3e}"
            )
        det = float(np.linalg.det(rot))
        if abs(abs(det) - 1.0) > DETERMINANT_TOL:
            raise InvalidInputError(f"det(T) = {det!r} is not +-1 within tolerance")
        sign = 1 if det > 0 else -1
        if orientation is not None:
            if int(orientation) not in (1, -1):
                raise InvalidInputError("orientation must be +1 or -1")
            if int(orientation) != sign:
                raise InvalidInputError(
                    f"stated orientation {orientation} contradicts det sign {sign}"
                )
        rot = rot.copy()
        rot.setflags(write=False)
        trans = trans.copy()
        trans.setflags(write=False)
        self.rotation = rot
        self.translation = trans
        self.orientation = sign

    @classmethod
    def identity(cls, dim):
        return cls(np.eye(dim), np.zeros(dim))

    @classmethod
    def from_translation(cls, vector):
        v = np.asarray(vector, dtype=float).reshape(-1)
        return cls(np.eye(v.shape[0]), v)

    @property
    def dimension(self):
        return self.rotation.shape[0]

    @property
    def is_proper(self):
        return self.orientation == 1

    def apply(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dimension:
            raise InvalidInputError(
                f"point dimension {x.shape[-1]} does not match motion dimension {self.dimension}"
            )
        return x @ self.rotation.T + self.translation

    def compose(self, other):
        """self after other: x -> self(other(x))."""
        if other.dimension != self.dimension:
            raise InvalidInputError("cannot compose motions of different dimensions")
        rot = self.rotation @ other.rotation
        # Products of nearly-orthogonal factors can drift past the constructor
        # tolerance; snap back to the nearest orthogonal matrix when they do.
        if np.abs(rot.T @ rot - np.eye(self.dimension)).max() > ORTHOGONALITY_TOL:
            u, _, vt = np.linalg.svd(rot)
            rot = u @ vt
        trans = self.rotation @ other.translation + self.translation
        return EuclideanMotion(rot, trans)

    def inverse(self):
        rot = self.rotation.T
        return EuclideanMotion(rot, -rot @ self.translation)

    def __repr__(self):
        kind = "proper" if self.is_proper else "improper"
        return f"EuclideanMotion(D={self.dimension}, {kind})"


def apply_motion(motion, x):
    """Apply a Euclidean motion to a point (or an (n, D) batch of points)."""
    return motion.apply(x)


class Simplex:
    """An l-simplex given by l+1 vertices in R^D, 1 <= l <= D."""

    def __init__(self, vertices):
        arr = _as_points(vertices, "vertices")
        n, dim = arr.shape
        if n < 2:
            raise InvalidInputError("a simplex needs at least 2 vertices")
        if n > dim + 1:
            raise InvalidInputError(
                f"{n} vertices exceed the D+1 = {dim + 1} allowed in R^{dim}"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        self.vertices = arr

    @property
    def dimension(self):
        return self.vertices.shape[1]

    @property
    def order(self):
        """l, the intrinsic dimension of the simplex."""
        return self.vertices.shape[0] - 1


def simplex_volume(simplex):
    """l-dimensional volume of an l-simplex: sqrt(det G) / l! with G the Gram
    matrix of edge vectors.  Degenerate simplices return exactly 0.0."""
    verts = simplex.vertices if isinstance(simplex, Simplex) else Simplex(simplex).vertices
    edges = verts[1:] - verts[0]
    l = edges.shape[0]
    gram = edges @ edges.T
    det = float(np.linalg.det(gram))
    scale = float(np.max(np.abs(gram))) if gram.size else 0.0
    if det <= DEGENERACY_TOL * scale**l:
        return 0.0
    return float(np.sqrt(det) / factorial(l))


def max_simplex_volume(config, l):
    """Maximum l-simplex volume over all (l+1)-subsets of a point configuration.

    Returns (volume, witness Simplex).  Exhaustive, intended for small sets.
    """
    if not isinstance(config, PointConfig):
        config = PointConfig(config)
    n = len(config)
    if l < 1 or l > config.dimension:
        raise InvalidInputError(f"simplex order l={l} must satisfy 1 <= l <= D")
    if n < l + 1:
        raise InvalidInputError(f"need at least {l + 1} points, got {n}")
    best = -1.0
    best_idx = None
    for idx in combinations(range(n), l + 1):
        vol = simplex_volume(Simplex(config.points[list(idx)]))
        if vol > best:
            best = vol
            best_idx = idx
    return best, Simplex(config.points[list(best_idx)])


def gram_schmidt(vectors):
    """Orthonormalize a list of linearly independent vectors.

    Output vector i depends only on inputs 1..i.  Raises RankDeficiencyError
    when a pivot falls below the threshold after projection.
    """
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError("expected a 2-d array of row vectors")
    out = []
    for i, v in enumerate(arr):
        w = v.astype(float)
        # Two projection passes keep orthogonality at the 1e-12 level.
        for _ in range(2):
            for q in out:
                w = w - (q @ w) * q
        norm = float(np.linalg.norm(w))
        if norm < PIVOT_TOL:
            raise RankDeficiencyError(
                f"vector {i} is numerically dependent on its predecessors "
                f"(pivot {norm:.3e} < {PIVOT_TOL})"
            )
        out.append(w / norm)
    return np.array(out)


def projection_residual(z, basis):
    """Norm of the component of z orthogonal to span(basis).

    An empty basis gives |z|.  The basis vectors need not be independent.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    basis = np.asarray(basis, dtype=float)
    if basis.size == 0:
        return float(np.linalg.norm(z))
    if basis.ndim != 2 or basis.shape[1] != z.shape[0]:
        raise InvalidInputError("basis vectors must match the dimension of z")
    # Orthonormal basis of the span via SVD (tolerant of dependent inputs).
    u, s, _ = np.linalg.svd(basis.T, full_matrices=False)
    scale = s[0] if s.size else 0.0
    rank = int(np.sum(s > max(scale, 1.0) * 1e-13))
    q = u[:, :rank]
    residual = z - q @ (q.T @ z)
    return float(np.linalg.norm(residual))


def orthonormal_completion(vectors):
    """Extend an independent family to a full orthonormal basis of R^D.

    The first len(vectors) outputs span the input family (Gram-Schmidt); the
    remaining rows are a deterministic orthonormal completion.
    """
    arr = np.asarray(vectors, dtype=float)
    dim = arr.shape[1]
    base = gram_schmidt(arr) if arr.shape[0] else np.zeros((0, dim))
    rows = list(base)
    for k in range(dim):
        if len(rows) == dim:
            break
        v = np.zeros(dim)
        v[k] = 1.0
        for q in rows:
            v = v - (q @ v) * q
        norm = float(np.linalg.norm(v))
        if norm < PIVOT_TOL:
            continue
        w = v / norm
        for q in rows:
            w = w - (q @ w) * q
        rows.append(w / np.linalg.norm(w))
    if len(rows) != dim:
        raise RankDeficiencyError("failed to complete an orthonormal basis")
    return np.array(rows)
