"""Explicit smooth map primitives and their composition tree.

Nodes: rigid motions, slides (identity plus cutoff-localized displacements),
slow twists (radius-dependent block rotations), reflections, two-motion
blends, compositions, and the region-dispatch glue node.  Every node
evaluates anywhere on R^D, carries an analytic Jacobian, and has a constant
orientation sign.  Trees serialize to plain dicts for the JSON round trip.
"""

import numpy as np
from scipy.linalg import expm, logm
from scipy.spatial.transform import Rotation

from .cutoffs import (
    CutoffSpec,
    profile_from_dict,
    smooth_step,
    smooth_step_derivative,
)
from .errors import (
    AmbiguousGeodesicError,
    DistortionTooLargeError,
    InternalConsistencyError,
    InvalidInputError,
    InvalidSpecError,
    IsoextError,
    OrientationMismatchError,
    PreconditionViolatedError,
)
from .geometry import EuclideanMotion

_EPS = float(np.finfo(float).eps)

# Sampled-profile guard constant: t |f'(t)| < TWIST_GUARD * epsilon.
TWIST_GUARD = 0.1
# Slide displacement guard: max |d| / (r_out - r_in) <= SLIDE_GUARD.
SLIDE_GUARD = 0.1
# Rotation angles within this of pi are treated as antipodal (ambiguous log).
ANTIPODAL_TOL = 1e-6


def roundoff_floor(scale, factor=64.0):
    """Absolute tolerance floor for gap checks at a given coordinate scale."""
    return factor * _EPS * max(float(scale), 1e-300)


# ---------------------------------------------------------------------------
# rotation log / exp helpers


def skew_log_rotation(rot):
    """Principal skew-symmetric logarithm of a proper rotation matrix.

    Raises AmbiguousGeodesicError when some plane rotates by (nearly) pi,
    where the principal log is not unique.
    """
    rot = np.asarray(rot, dtype=float)
    dim = rot.shape[0]
    if dim == 2:
        angle = float(np.arctan2(rot[1, 0], rot[0, 0]))
        if abs(angle) > np.pi - ANTIPODAL_TOL:
            raise AmbiguousGeodesicError(
                "rotation angle is within tolerance of pi; perturb one motion "
                "slightly to select a geodesic"
            )
        return np.array([[0.0, -angle], [angle, 0.0]])
    if dim == 3:
        rotvec = Rotation.from_matrix(rot).as_rotvec()
        angle = float(np.linalg.norm(rotvec))
        if angle > np.pi - ANTIPODAL_TOL:
            raise AmbiguousGeodesicError(
                "rotation angle is within tolerance of pi; perturb one motion "
                "slightly to select a geodesic"
            )
        wx, wy, wz = rotvec
        return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])
    phases = np.abs(np.angle(np.linalg.eigvals(rot)))
    if np.any(phases > np.pi - ANTIPODAL_TOL):
        raise AmbiguousGeodesicError(
            "rotation has an eigenvalue near -1; perturb one motion slightly "
            "to select a geodesic"
        )
    skew = np.real(logm(rot))
    skew = 0.5 * (skew - skew.T)
    if np.abs(expm_skew(skew) - rot).max() > 1e-9:
        raise InternalConsistencyError("matrix logarithm failed to invert expm")
    return skew


def expm_skew(skew):
    """Matrix exponential of a skew-symmetric matrix (closed form for D <= 3)."""
    skew = np.asarray(skew, dtype=float)
    dim = skew.shape[0]
    if dim == 2:
        a = skew[1, 0]
        c, s = np.cos(a), np.sin(a)
        return np.array([[c, -s], [s, c]])
    if dim == 3:
        rotvec = np.array([skew[2, 1], skew[0, 2], skew[1, 0]])
        return Rotation.from_rotvec(rotvec).as_matrix()
    return expm(skew)


# ---------------------------------------------------------------------------
# nodes


class SmoothMap:
    """Base class: an evaluatable, differentiable map R^D -> R^D."""

    dimension = None

    def evaluate(self, x):
        raise NotImplementedError

    def jacobian(self, x):
        raise NotImplementedError

    def orientation(self):
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(x)

    def _check_point(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape[0] != self.dimension:
            raise InvalidInputError(
                f"point dimension {x.shape[0]} does not match map dimension {self.dimension}"
            )
        return x


class Motion(SmoothMap):
    """A Euclidean motion as a map node."""

    def __init__(self, motion):
        self.motion = motion
        self.dimension = motion.dimension

    def evaluate(self, x):
        return self.motion.apply(self._check_point(x))

    def jacobian(self, x):
        return self.motion.rotation.copy()

    def orientation(self):
        return self.motion.orientation

    def to_dict(self):
        return {"type": "motion", "motion": motion_to_dict(self.motion)}


class Hyperplane:
    """A hyperplane {x : n . x = c} with unit normal n."""

    def __init__(self, normal, offset):
        n = np.asarray(normal, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(n))
        if norm == 0.0 or not np.all(np.isfinite(n)):
            raise InvalidInputError("hyperplane normal must be a nonzero finite vector")
        n = n / norm
        n.setflags(write=False)
        self.normal = n
        # n.x = c rescales with the normal.
        self.offset = float(offset) / norm

    @property
    def dimension(self):
        return self.normal.shape[0]

    def signed_distance(self, x):
        return float(self.normal @ np.asarray(x, dtype=float) - self.offset)

    def to_dict(self):
        return {"normal": list(self.normal), "offset": self.offset}

    @classmethod
    def from_dict(cls, d):
        return cls(d["normal"], d["offset"])


def reflection_motion(hyperplane):
    """The reflection through a hyperplane as a Euclidean motion."""
    n = hyperplane.normal
    dim = hyperplane.dimension
    rot = np.eye(dim) - 2.0 * np.outer(n, n)
    return EuclideanMotion(rot, 2.0 * hyperplane.offset * n)


class Reflection(SmoothMap):
    """Reflection through a hyperplane: x -> x - 2 (n.x - c) n."""

    def __init__(self, hyperplane):
        self.hyperplane = hyperplane
        self.dimension = hyperplane.dimension

    def evaluate(self, x):
        x = self._check_point(x)
        n = self.hyperplane.normal
        return x - 2.0 * (n @ x - self.hyperplane.offset) * n

    def jacobian(self, x):
        n = self.hyperplane.normal
        return np.eye(self.dimension) - 2.0 * np.outer(n, n)

    def orientation(self):
        return -1

    def to_dict(self):
        return {"type": "reflection", "hyperplane": self.hyperplane.to_dict()}


def reflect(hyperplane):
    """Reflection node through a hyperplane."""
    return Reflection(hyperplane)


class Slide(SmoothMap):
    """x -> x + sum_j d_j theta(|x - z_j|), a cutoff-localized displacement.

    The constructor does not re-check guards; construct through make_slide.
    """

    def __init__(self, centers, displacements, cutoff, dimension=None):
        centers = np.asarray(centers, dtype=float)
        displacements = np.asarray(displacements, dtype=float)
        if centers.size == 0:
            if dimension is None:
                raise InvalidInputError("an empty slide needs an explicit dimension")
            centers = np.zeros((0, dimension))
            displacements = np.zeros((0, dimension))
        if centers.shape != displacements.shape or centers.ndim != 2:
            raise InvalidInputError("centers and displacements must be matching (n, D) arrays")
        self.centers = centers
        self.displacements = displacements
        self.cutoff = cutoff
        self.dimension = centers.shape[1]

    def evaluate(self, x):
        x = self._check_point(x)
        out = x.copy()
        for z, d in zip(self.centers, self.displacements):
            rho = float(np.linalg.norm(x - z))
            if rho < self.cutoff.r_out:
                out = out + d * float(self.cutoff.evaluate(rho))
        return out

    def jacobian(self, x):
        x = self._check_point(x)
        jac = np.eye(self.dimension)
        for z, d in zip(self.centers, self.displacements):
            offset = x - z
            rho = float(np.linalg.norm(offset))
            if self.cutoff.r_in < rho < self.cutoff.r_out:
                slope = float(self.cutoff.derivative(rho))
                jac = jac + np.outer(d, offset) * (slope / rho)
        return jac

    def orientation(self):
        return 1

    def to_dict(self):
        return {
            "type": "slide",
            "centers": [list(z) for z in self.centers],
            "displacements": [list(d) for d in self.displacements],
            "r_in": self.cutoff.r_in,
            "r_out": self.cutoff.r_out,
        }


def make_slide(displacements, r_in, r_out, dimension=2):
    """Build a slide from (center, displacement) pairs.

    Guards: supports pairwise disjoint (|z - z'| > 2 r_out) and
    max |d| / (r_out - r_in) <= 0.1.  An empty displacement list gives the
    identity map in the stated dimension.
    """
    pairs = list(displacements)
    cutoff = CutoffSpec(r_in, r_out)
    if not pairs:
        return Slide(np.zeros((0, dimension)), np.zeros((0, dimension)), cutoff)
    centers = np.asarray([np.asarray(z, dtype=float).reshape(-1) for z, _ in pairs])
    disps = np.asarray([np.asarray(d, dtype=float).reshape(-1) for _, d in pairs])
    if centers.shape != disps.shape:
        raise InvalidInputError("centers and displacements must share a dimension")
    n = centers.shape[0]
    for i in range(n):
        for j in range(i + 1, n):
            gap = float(np.linalg.norm(centers[i] - centers[j]))
            if gap <= 2.0 * cutoff.r_out:
                raise InvalidSpecError(
                    f"slide supports overlap: centers {i} and {j} are {gap:.3e} "
                    f"apart but need > {2.0 * cutoff.r_out:.3e}"
                )
    max_disp = float(np.max(np.linalg.norm(disps, axis=1)))
    ratio = max_disp / cutoff.width
    if ratio > SLIDE_GUARD:
        raise DistortionTooLargeError(
            f"slide displacement ratio {ratio:.3e} exceeds guard {SLIDE_GUARD}"
        )
    return Slide(centers, disps, cutoff)


class SlowTwist(SmoothMap):
    """x -> Theta^T S(Theta x) (Theta x) with S block-diagonal 2x2 rotations
    through radius-dependent angles.  Construct through make_slow_twist."""

    def __init__(self, profiles, frame, epsilon):
        frame = np.asarray(frame, dtype=float)
        self.profiles = list(profiles)
        self.frame = frame
        self.epsilon = float(epsilon)
        self.dimension = frame.shape[0]

    def _blocks(self):
        return self.dimension // 2

    def _rotation_at(self, t):
        dim = self.dimension
        mat = np.eye(dim)
        for i, p in enumerate(self.profiles):
            a = float(p.angle(t))
            c, s = np.cos(a), np.sin(a)
            k = 2 * i
            mat[k, k] = c
            mat[k, k + 1] = s
            mat[k + 1, k] = -s
            mat[k + 1, k + 1] = c
        return mat

    def _rotation_rate_at(self, t):
        dim = self.dimension
        mat = np.zeros((dim, dim))
        for i, p in enumerate(self.profiles):
            rate = float(p.angle_rate(t))
            if rate == 0.0:
                continue
            a = float(p.angle(t))
            c, s = np.cos(a), np.sin(a)
            k = 2 * i
            mat[k, k] = -s * rate
            mat[k, k + 1] = c * rate
            mat[k + 1, k] = -c * rate
            mat[k + 1, k + 1] = -s * rate
        return mat

    def evaluate(self, x):
        x = self._check_point(x)
        y = self.frame @ x
        t = float(np.linalg.norm(y))
        return self.frame.T @ (self._rotation_at(t) @ y)

    def jacobian(self, x):
        x = self._check_point(x)
        y = self.frame @ x
        t = float(np.linalg.norm(y))
        inner = self._rotation_at(t)
        if t > 0.0:
            rate = self._rotation_rate_at(t)
            if np.any(rate):
                inner = inner + np.outer(rate @ y, y / t)
        return self.frame.T @ inner @ self.frame

    def orientation(self):
        return 1

    def to_dict(self):
        return {
            "type": "slow_twist",
            "frame": [list(row) for row in self.frame],
            "profiles": [p.to_dict() for p in self.profiles],
            "epsilon": self.epsilon,
        }


def make_slow_twist(profiles, frame=None, *, epsilon):
    """Build a slow twist after checking the sampled profile bound
    t |f'(t)| < 0.1 * epsilon on a logarithmic grid."""
    profiles = list(profiles)
    if frame is None:
        raise InvalidInputError("make_slow_twist needs a frame or an explicit dimension; "
                                "pass frame=np.eye(D) for the standard frame")
    frame = np.asarray(frame, dtype=float)
    dim = frame.shape[0]
    if frame.ndim != 2 or frame.shape[0] != frame.shape[1]:
        raise InvalidInputError("frame must be a square matrix")
    if np.abs(frame.T @ frame - np.eye(dim)).max() > 1e-10 or np.linalg.det(frame) < 0:
        raise InvalidInputError("frame must be a proper rotation (SO(D)) matrix")
    if len(profiles) != dim // 2:
        raise InvalidInputError(
            f"need {dim // 2} profiles for dimension {dim}, got {len(profiles)}"
        )
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    for i, p in enumerate(profiles):
        grid = _profile_grid(p)
        bound = float(np.max(np.abs(grid * p.angle_rate(grid))))
        if bound >= TWIST_GUARD * epsilon:
            raise DistortionTooLargeError(
                f"profile {i} has sampled t|f'(t)| = {bound:.3e} >= "
                f"{TWIST_GUARD} * epsilon = {TWIST_GUARD * epsilon:.3e}"
            )
    return SlowTwist(profiles, frame, epsilon)


def _profile_grid(profile):
    lo, hi = 1e-8, 1e8
    if hasattr(profile, "r_inner"):
        lo = profile.r_inner / 10.0
        hi = profile.r_outer * 10.0
    return np.geomspace(lo, hi, 512)


class MotionBlend(SmoothMap):
    """A map equal to motion A inside B(x0, exp(-1/eps) r) and to motion A*
    outside B(x0, r), spreading the rotation mismatch over log-radius and the
    translation mismatch over the outer annulus.

    Both motions must be proper; motion_blend handles the improper pair case.
    """

    def __init__(self, a, a_star, center, radius, epsilon):
        self.a = a
        self.a_star = a_star
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.radius = float(radius)
        self.epsilon = float(epsilon)
        self.dimension = a.dimension
        self.skew = skew_log_rotation(a_star.rotation @ a.rotation.T)
        self.a_center = a.apply(self.center)
        self.delta = a_star.apply(self.center) - self.a_center
        self.r_inner = np.exp(-1.0 / self.epsilon) * self.radius

    def _psi_r(self, rho):
        if rho <= self.r_inner:
            return 0.0
        return float(smooth_step((np.log(rho) - np.log(self.r_inner)) * self.epsilon))

    def _psi_r_rate(self, rho):
        if rho <= self.r_inner:
            return 0.0
        u = (np.log(rho) - np.log(self.r_inner)) * self.epsilon
        return float(smooth_step_derivative(u)) * self.epsilon / rho

    def _psi_t(self, rho):
        return float(smooth_step((rho - 0.5 * self.radius) / (0.5 * self.radius)))

    def _psi_t_rate(self, rho):
        return float(smooth_step_derivative(
            (rho - 0.5 * self.radius) / (0.5 * self.radius))) * 2.0 / self.radius

    def evaluate(self, x):
        x = self._check_point(x)
        offset = x - self.center
        rho = float(np.linalg.norm(offset))
        rotator = expm_skew(self._psi_r(rho) * self.skew) @ self.a.rotation
        return rotator @ offset + self.a_center + self._psi_t(rho) * self.delta

    def jacobian(self, x):
        x = self._check_point(x)
        offset = x - self.center
        rho = float(np.linalg.norm(offset))
        rotator = expm_skew(self._psi_r(rho) * self.skew) @ self.a.rotation
        jac = rotator.copy()
        if rho > 0.0:
            unit = offset / rho
            rr = self._psi_r_rate(rho)
            if rr != 0.0:
                jac = jac + np.outer(self.skew @ (rotator @ offset), unit) * rr
            tr = self._psi_t_rate(rho)
            if tr != 0.0:
                jac = jac + np.outer(self.delta, unit) * tr
        return jac

    def orientation(self):
        return 1

    def to_dict(self):
        return {
            "type": "motion_blend",
            "a": motion_to_dict(self.a),
            "a_star": motion_to_dict(self.a_star),
            "center": list(self.center),
            "radius": self.radius,
            "epsilon": self.epsilon,
        }


def motion_blend(a, a_star, center, radius, epsilon):
    """Interpolate two Euclidean motions of equal orientation across an
    annulus, exactly matching A inside and A* outside.

    Guards: matching orientations, center gap |A(x0) - A*(x0)| within
    1.01 * epsilon * radius (plus a machine-roundoff floor), no antipodal
    rotation pair.  An improper pair is blended by factoring out a common
    reflection through the center.
    """
    center = np.asarray(center, dtype=float).reshape(-1)
    if a.dimension != a_star.dimension or a.dimension != center.shape[0]:
        raise InvalidInputError("motion and center dimensions disagree")
    if radius <= 0 or epsilon <= 0:
        raise InvalidInputError("radius and epsilon must be positive")
    if a.orientation != a_star.orientation:
        raise OrientationMismatchError(
            "cannot blend motions of opposite orientation"
        )
    gap = float(np.linalg.norm(a.apply(center) - a_star.apply(center)))
    scale = max(
        float(np.linalg.norm(a.apply(center))),
        float(np.linalg.norm(a_star.apply(center))),
        float(np.linalg.norm(center)),
        radius,
    )
    limit = max(1.01 * epsilon * radius, roundoff_floor(scale))
    if gap > limit:
        raise PreconditionViolatedError(
            f"motion centers differ by {gap:.3e} > {limit:.3e} at this radius/epsilon"
        )
    if not a.is_proper:
        # Factor a fixed reflection through the center out of an improper pair:
        # blend the proper remainders, pre-compose the reflection.
        normal = np.zeros_like(center)
        normal[-1] = 1.0
        plane = Hyperplane(normal, float(center[-1]))
        rho = reflection_motion(plane)
        blend = MotionBlend(a.compose(rho), a_star.compose(rho), center, radius, epsilon)
        return Composition([Reflection(plane), blend])
    return MotionBlend(a, a_star, center, radius, epsilon)


class Composition(SmoothMap):
    """Function composition, applied first factor first."""

    def __init__(self, factors):
        factors = list(factors)
        if not factors:
            raise InvalidInputError("composition needs at least one factor")
        dims = {f.dimension for f in factors}
        if len(dims) != 1:
            raise InvalidInputError("composition factors must share a dimension")
        self.factors = factors
        self.dimension = factors[0].dimension

    def evaluate(self, x):
        out = self._check_point(x)
        for f in self.factors:
            out = f.evaluate(out)
        return out

    def jacobian(self, x):
        point = self._check_point(x)
        jac = np.eye(self.dimension)
        for f in self.factors:
            jac = f.jacobian(point) @ jac
            point = f.evaluate(point)
        return jac

    def orientation(self):
        sign = 1
        for f in self.factors:
            sign *= f.orientation()
        return sign

    def to_dict(self):
        return {"type": "composition", "factors": [f.to_dict() for f in self.factors]}


class GluePiece:
    """One local region of a glue node: the local map rules inside radius
    r_inner of the center, the bracketing blend rules out to r_outer."""

    def __init__(self, center, r_inner, r_outer, local_map, blend_map):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.r_inner = float(r_inner)
        self.r_outer = float(r_outer)
        self.local_map = local_map
        self.blend_map = blend_map


class Glue(SmoothMap):
    """Region-dispatch map: local maps near each center, motion blends on the
    surrounding annuli, a background map everywhere else.  The regions agree
    on overlaps by construction (verified numerically by extension.glue)."""

    def __init__(self, pieces, background, tau, epsilon):
        self.pieces = list(pieces)
        self.background = background
        self.tau = float(tau)
        self.epsilon = float(epsilon)
        self.dimension = background.dimension

    def _select(self, x):
        for piece in self.pieces:
            rho = float(np.linalg.norm(x - piece.center))
            if rho < piece.r_inner:
                return piece.local_map
            if rho < piece.r_outer:
                return piece.blend_map
        return self.background

    def evaluate(self, x):
        x = self._check_point(x)
        return self._select(x).evaluate(x)

    def jacobian(self, x):
        x = self._check_point(x)
        return self._select(x).jacobian(x)

    def orientation(self):
        return self.background.orientation()

    def to_dict(self):
        return {
            "type": "glue",
            "tau": self.tau,
            "epsilon": self.epsilon,
            "background": self.background.to_dict(),
            "pieces": [
                {
                    "center": list(p.center),
                    "r_inner": p.r_inner,
                    "r_outer": p.r_outer,
                    "local": p.local_map.to_dict(),
                    "blend": p.blend_map.to_dict(),
                }
                for p in self.pieces
            ],
        }


# ---------------------------------------------------------------------------
# module-level operations


def evaluate(m, x):
    """Evaluate a smooth map at a point or an (n, D) batch of points."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 2:
        return np.array([m.evaluate(row) for row in x])
    return m.evaluate(x)


def finite_difference_jacobian(m, x, step=None):
    """Central-difference Jacobian with step 1e-6 * (1 + |x|)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    dim = x.shape[0]
    if step is None:
        step = 1e-6 * (1.0 + float(np.linalg.norm(x)))
    cols = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = step
        cols.append((evaluate(m, x + e) - evaluate(m, x - e)) / (2.0 * step))
    return np.array(cols).T


def jacobian(m, x):
    """Jacobian of a map: analytic where the node provides one, otherwise
    central finite differences."""
    if hasattr(m, "jacobian"):
        return m.jacobian(np.asarray(x, dtype=float).reshape(-1))
    return finite_difference_jacobian(m, x)


def orientation(m, check_point=None):
    """Orientation sign of a map (product over nodes), cross-checked against
    the Jacobian determinant sign at one sample point."""
    sign = m.orientation()
    point = np.zeros(m.dimension) if check_point is None else np.asarray(check_point, float)
    det = float(np.linalg.det(jacobian(m, point)))
    if det == 0.0 or (1 if det > 0 else -1) != sign:
        raise InternalConsistencyError(
            f"node orientation product {sign} contradicts det sign at the "
            f"sample point (det = {det:.3e})"
        )
    return sign


def newton_invert(m, y, x0=None, tol=1e-12, max_iter=100):
    """Solve m(x) = y by Newton iteration with the analytic Jacobian."""
    y = np.asarray(y, dtype=float).reshape(-1)
    x = np.array(y if x0 is None else np.asarray(x0, dtype=float).reshape(-1))
    target_tol = tol * (1.0 + float(np.linalg.norm(y)))
    for _ in range(max_iter):
        residual = y - m.evaluate(x)
        if float(np.linalg.norm(residual)) <= target_tol:
            return x
        x = x + np.linalg.solve(jacobian(m, x), residual)
    raise IsoextError(
        f"Newton inversion did not converge within {max_iter} iterations"
    )


# ---------------------------------------------------------------------------
# serialization


def motion_to_dict(motion):
    return {
        "rotation": [list(row) for row in motion.rotation],
        "translation": list(motion.translation),
        "orientation": motion.orientation,
    }


def motion_from_dict(d):
    try:
        return EuclideanMotion(d["rotation"], d["translation"], d.get("orientation"))
    except KeyError as exc:
        raise InvalidInputError(f"motion dict is missing field {exc}") from exc


def map_to_dict(m):
    """Serialize a composition tree to a plain dict."""
    return m.to_dict()


def map_from_dict(d):
    """Rebuild a composition tree from its dict form, re-applying guards."""
    if not isinstance(d, dict) or "type" not in d:
        raise InvalidInputError("map node must be a dict with a 'type' tag")
    tag = d["type"]
    try:
        if tag == "motion":
            return Motion(motion_from_dict(d["motion"]))
        if tag == "reflection":
            return Reflection(Hyperplane.from_dict(d["hyperplane"]))
        if tag == "slide":
            pairs = list(zip(d["centers"], d["displacements"]))
            return make_slide(pairs, d["r_in"], d["r_out"])
        if tag == "slow_twist":
            profiles = [profile_from_dict(p) for p in d["profiles"]]
            return make_slow_twist(profiles, frame=np.asarray(d["frame"], dtype=float),
                                   epsilon=d["epsilon"])
        if tag == "motion_blend":
            return motion_blend(
                motion_from_dict(d["a"]),
                motion_from_dict(d["a_star"]),
                d["center"],
                d["radius"],
                d["epsilon"],
            )
        if tag == "composition":
            return Composition([map_from_dict(f) for f in d["factors"]])
        if tag == "glue":
            pieces = [
                GluePiece(
                    p["center"],
                    p["r_inner"],
                    p["r_outer"],
                    map_from_dict(p["local"]),
                    map_from_dict(p["blend"]),
                )
                for p in d["pieces"]
            ]
            return Glue(pieces, map_from_dict(d["background"]), d["tau"], d["epsilon"])
    except KeyError as exc:
        raise InvalidInputError(f"map node {tag!r} is missing field {exc}") from exc
    raise InvalidInputError(f"unknown map node tag {tag!r}")
