"""The extension ladder.

Builds globally defined distorted diffeomorphisms that agree with a labeled
near-isometry phi on a finite set E and with a Euclidean motion far from E:
separated-set extension (rigid alignment + pinning slide + orientation
repair), region gluing of local and global pieces, the recursive driver over
pigeonhole clusterings, and the block-based extendability decision.

All of the classical existence constants are operational here: every guard
is a named configurable threshold, and reports carry measured values.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .alignment import (
    Correspondence,
    best_motion,
    certify_distortion,
    detect_blocks,
)
from .clustering import cluster
from .errors import (
    DeltaTooLargeError,
    GluePreconditionError,
    InternalConsistencyError,
    InvalidInputError,
    IsoextError,
    NegativeBlockDetectedError,
    PreconditionViolatedError,
)
from .geometry import (
    EuclideanMotion,
    PointConfig,
    gram_schmidt,
    max_simplex_volume,
    orthonormal_completion,
)
from .smooth_maps import (
    Composition,
    Glue,
    GluePiece,
    Hyperplane,
    Motion,
    Reflection,
    evaluate,
    make_slide,
    motion_blend,
    orientation,
    reflection_motion,
    roundoff_floor,
)
from .verifier import (
    AnnulusRegion,
    BallDomain,
    BallSet,
    verify_distortion,
    verify_interpolation,
)

STATUS_PROPER = "extendable_proper"
STATUS_IMPROPER = "extendable_improper"
STATUS_OBSTRUCTED = "obstructed"
STATUS_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class ExtensionConfig:
    """Named thresholds of the extension pipeline.

    The exponential schedules eta = exp(-c_prime/eps) and
    delta_max = exp(-c_second/eps) are calibrated so the acceptance fixtures
    (eps ~ 0.1, noise ~ 1e-6 tau) sit comfortably inside the guards.  Guard
    comparisons take a machine-roundoff floor so that sub-ulp ball schedules
    (deep recursion at small eps) do not fail spuriously.
    """

    c_prime: float = 1.0            # eta = exp(-c_prime / epsilon)
    c_second: float = 1.0           # delta guard = exp(-c_second / epsilon)
    max_points: int = 32
    residual_guard_factor: float = 0.1   # best-motion residual <= factor*eps*tau
    reflection_guard_factor: float = 0.01  # eta < factor * eps * tau / diam
    gap_constant: float = 10.0      # blend-center gap <= const*eps*exp(-4/eps)*tau
    floor_factor: float = 256.0     # roundoff floor multiplier
    verify_samples: int = 320
    far_radius_factor: float = 1e4
    interface_samples: int = 32


DEFAULT_CONFIG = ExtensionConfig()


@dataclass(frozen=True)
class LocalMotion:
    """A ball B(center, radius) on which the constructed map is the motion."""

    center: tuple
    motion: EuclideanMotion
    radius: float


@dataclass(frozen=True)
class ExtensionReport:
    """A constructed extension together with everything measured about it."""

    map: object
    epsilon_budget: float
    measured_distortion: float
    far_motion: EuclideanMotion
    far_radius: float
    local_motions: list
    interpolation_residual: float
    orientation: int
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExtendabilityVerdict:
    """Block-based verdict on whether a distorted extension can exist."""

    status: str
    witness_positive: object = None
    witness_negative: object = None
    flagged_subset: tuple = None


def _coordinate_scale(*configs):
    scale = 1e-300
    for cfg in configs:
        pts = cfg.points if isinstance(cfg, PointConfig) else np.asarray(cfg, float)
        if pts.size:
            scale = max(scale, float(np.abs(pts).max()))
        if isinstance(cfg, PointConfig):
            scale = max(scale, cfg.diameter)
    return scale


def _volume_level(config, order):
    """V_l(E), taken as 0 when fewer than l+1 points exist."""
    if len(config) < order + 1:
        return 0.0, None
    vol, witness = max_simplex_volume(config, order)
    return vol, witness


def _near_plane_hyperplane(config, eta):
    """Hyperplane within C*eta*diam of every point of a flat configuration.

    Works at the configuration's natural scale: the flatness hypothesis is
    V_D(E) <= (eta * diam)^D.
    """
    dim = config.dimension
    diam = config.diameter
    if diam <= 0.0:
        raise InvalidInputError("configuration has zero diameter")
    vol_top, _ = _volume_level(config, dim)
    if vol_top > (eta * diam) ** dim:
        raise PreconditionViolatedError(
            f"V_D = {vol_top:.3e} exceeds (eta*diam)^D = {(eta * diam) ** dim:.3e}; "
            "the set is not close to a hyperplane at this eta"
        )
    # The level ladder starts at V_1 = diam > eta*diam, so the first order
    # whose volume drops below the threshold exists and is >= 2.
    level = None
    for l in range(2, dim + 1):
        vol, _ = _volume_level(config, l)
        if vol <= (eta * diam) ** l:
            level = l
            break
    if level is None:
        raise InternalConsistencyError("volume ladder never dropped below threshold")
    _, witness = _volume_level(config, level - 1)
    anchor = witness.vertices[0]
    edges = witness.vertices[1:] - anchor
    basis = orthonormal_completion(edges)
    normal = basis[-1]
    # Deterministic sign: first nonzero component positive.
    for v in normal:
        if abs(v) > 1e-12:
            if v < 0:
                normal = -normal
            break
    return Hyperplane(normal, float(normal @ anchor))


def approximate_reflection(config, eta):
    """An improper Euclidean motion moving every point of a flat set by at
    most C*eta.  Requires diam(E) = 1 (caller normalizes) and V_D(E) <= eta^D.
    """
    if not isinstance(config, PointConfig):
        config = PointConfig(config)
    if abs(config.diameter - 1.0) > 1e-9:
        raise PreconditionViolatedError(
            f"diam(E) must be 1 (caller normalizes), got {config.diameter!r}"
        )
    plane = _near_plane_hyperplane(config, eta)
    return reflection_motion(plane)


def _fix_improperly(config, tau, epsilon, eta):
    """Scale-free core of fix_set_improperly: an improper map pinning every
    point of a flat, tau-separated set, rigid away from it."""
    diam = config.diameter
    if config.min_separation < tau * (1.0 - 1e-12):
        raise PreconditionViolatedError(
            f"min separation {config.min_separation:.3e} is below tau = {tau:.3e}"
        )
    limit = ExtensionConfig.reflection_guard_factor * epsilon * tau / diam
    if not (0.0 < eta < limit):
        raise PreconditionViolatedError(
            f"eta = {eta!r} must lie in (0, {limit:.3e}) "
            "(= 0.01 * epsilon * tau / diam)"
        )
    plane = _near_plane_hyperplane(config, eta)
    rho = reflection_motion(plane)
    reflected = rho.apply(config.points)
    displacements = config.points - reflected
    scale = _coordinate_scale(config)
    floor = roundoff_floor(scale, ExtensionConfig.floor_factor)
    refl_node = Reflection(plane)
    if float(np.max(np.linalg.norm(displacements, axis=1))) <= floor:
        return refl_node, rho, plane
    pin = make_slide(list(zip(config.points, displacements)), tau / 10.0, tau / 5.0)
    return Composition([refl_node, pin]), rho, plane


def fix_set_improperly(config, tau, epsilon, eta):
    """An improper map that fixes every point of E exactly, coincides with an
    improper motion near each point and away from E.  Requires diam(E) = 1,
    min separation >= tau, V_D(E) <= eta^D, and eta < 0.01 * epsilon * tau."""
    if not isinstance(config, PointConfig):
        config = PointConfig(config)
    if abs(config.diameter - 1.0) > 1e-9:
        raise PreconditionViolatedError(
            f"diam(E) must be 1 (caller normalizes), got {config.diameter!r}"
        )
    node, _, _ = _fix_improperly(config, tau, epsilon, eta)
    return node


def _report_ball_set(source, tau):
    """Multi-scale verification domain: one ball per point at the pinning
    scale plus a global ball covering the whole configuration."""
    diam = max(source.diameter, tau)
    centroid = source.points.mean(axis=0)
    balls = [BallDomain(centroid, 1.5 * diam + tau)]
    for z in source.points[: min(len(source), 16)]:
        balls.append(BallDomain(z, tau / 10.0))
    return BallSet(balls)


def extend_separated(c, tau, epsilon, eta, config=DEFAULT_CONFIG):
    """Extend a correspondence whose source points are tau-separated.

    Pipeline: rigid least-squares alignment, residual guard, pinning slide at
    the tau/100 scale, and, when the alignment came out improper on a flat
    set, composition with an improper pinning map to repair orientation.
    """
    if len(c) > config.max_points:
        raise InvalidInputError(f"card(E) = {len(c)} exceeds configured max {config.max_points}")
    source = c.source
    if len(c) > 1 and source.min_separation < tau * (1.0 - 1e-12):
        raise PreconditionViolatedError(
            f"source min separation {source.min_separation:.3e} below tau = {tau:.3e}"
        )
    if not (0.0 < epsilon):
        raise InvalidInputError("epsilon must be positive")
    dim = c.dimension
    scale = _coordinate_scale(source, c.target)

    _, negatives = detect_blocks(c, eta) if len(c) >= dim + 1 else ([], [])
    if negatives:
        raise NegativeBlockDetectedError(
            f"correspondence has a negative block at indices {negatives[0].indices}",
            witness=negatives[0],
        )

    motion, residual = best_motion(c)
    # Conditioning-aware roundoff floor: refitting the motion against its own
    # exact image of the source measures what pure roundoff produces at this
    # geometry (ill-conditioned sets amplify machine epsilon).
    floor = roundoff_floor(scale, config.floor_factor)
    if len(c) > 1:
        _, self_residual = best_motion(
            Correspondence(source, motion.apply(source.points))
        )
        floor = max(floor, 32.0 * self_residual)
    guard = max(config.residual_guard_factor * epsilon * tau, floor)
    if residual > guard:
        raise DeltaTooLargeError(
            f"best-motion residual {residual:.3e} exceeds the residual guard "
            f"{guard:.3e} (residual <= {config.residual_guard_factor} * epsilon * tau)",
            guard="residual_guard",
            value=residual,
            limit=guard,
        )

    aligned = motion.apply(source.points)
    displacements = c.target.points - aligned
    max_disp = float(np.max(np.linalg.norm(displacements, axis=1)))
    pieces = [Motion(motion)]
    if max_disp > floor:
        slide = make_slide(
            list(zip(aligned, displacements)), tau / 100.0, tau / 50.0
        )
        pieces.append(slide)
    body = pieces[0] if len(pieces) == 1 else Composition(pieces)

    diagnostics = {
        "alignment_residual": residual,
        "orientation_repaired": False,
        "tau": float(tau),
        "eta": float(eta),
    }

    if motion.is_proper:
        final = body
        far_motion = motion
        local_motions = [
            LocalMotion(
                center=tuple(float(v) for v in z),
                motion=EuclideanMotion(motion.rotation, motion.translation + d),
                radius=tau / 100.0,
            )
            for z, d in zip(source.points, displacements)
        ]
        agreement_radius = tau / 50.0
    else:
        diam = source.diameter
        vol_top, _ = _volume_level(source, dim)
        if vol_top > (eta * diam) ** dim:
            raise NegativeBlockDetectedError(
                "improper alignment on a voluminous set: the no-negative-block "
                "hypothesis is violated"
            )
        fix_node, rho, _ = _fix_improperly(source, tau, epsilon, eta)
        final = Composition([fix_node, body])
        far_motion = motion.compose(rho)
        reflected = rho.apply(source.points)
        local_motions = []
        for z, d, rz in zip(source.points, displacements, reflected):
            # Near z the repair map is the improper motion x -> rho(x)+(z-rho(z));
            # composing with the aligned translation gives the local motion.
            p_z = EuclideanMotion(rho.rotation, rho.translation + (z - rz))
            outer = EuclideanMotion(motion.rotation, motion.translation + d)
            local_motions.append(
                LocalMotion(
                    center=tuple(float(v) for v in z),
                    motion=outer.compose(p_z),
                    radius=tau / 100.0,
                )
            )
        max_refl = float(np.max(np.linalg.norm(source.points - reflected, axis=1)))
        agreement_radius = tau / 5.0 + max_refl
        diagnostics["orientation_repaired"] = True
        diagnostics["reflection_residual"] = max_refl

    interp = verify_interpolation(final, c)
    report_domain = _report_ball_set(source, tau)
    distortion = verify_distortion(final, report_domain, budget=epsilon,
                                   n_samples=config.verify_samples)
    diagnostics["agreement_radius"] = agreement_radius
    diagnostics["pairwise_epsilon"] = distortion.pairwise_epsilon
    return ExtensionReport(
        map=final,
        epsilon_budget=float(epsilon),
        measured_distortion=distortion.epsilon_measured,
        far_motion=far_motion,
        far_radius=1000.0 * max(source.diameter, tau),
        local_motions=local_motions,
        interpolation_residual=interp,
        orientation=1,
        diagnostics=diagnostics,
    )


def _sample_sphere(center, radius, n, dim):
    region = AnnulusRegion(center, radius, radius * (1.0 + 1e-9) + 1e-300)
    return region.sample(n)


def glue(c, tau, epsilon, locals_, global_map, global_motions, config=DEFAULT_CONFIG):
    """Glue local extensions into a global one.

    locals_ is a list of (center, local map Phi_z, motion A_z) matching the
    correspondence order; global_map agrees with global_motions[i] near each
    center.  The result equals Phi_z inside B(z, exp(-3/eps) tau), blends
    A_z -> A*_z on the surrounding annulus, and equals the global map outside
    every B(z, exp(-2/eps) tau).
    """
    if len(locals_) != len(c) or len(global_motions) != len(c):
        raise InvalidInputError("locals and global motions must match the correspondence")
    source = c.source
    if len(c) > 1 and source.min_separation < tau * (1.0 - 1e-12):
        raise GluePreconditionError(
            f"representatives are {source.min_separation:.3e} apart but tau = {tau:.3e}",
            region="separation",
        )
    scale = _coordinate_scale(source, c.target)
    floor = roundoff_floor(scale, config.floor_factor)
    tol = max(1e-10 * scale, floor)
    b1, b2, b3, b4 = (np.exp((i - 5.0) / epsilon) * tau for i in range(1, 5))
    n_check = config.interface_samples
    dim = c.dimension

    pieces = []
    for i, ((center, local_map, a_z), a_star) in enumerate(zip(locals_, global_motions)):
        center = np.asarray(center, dtype=float).reshape(-1)
        if float(np.linalg.norm(center - source.points[i])) > tol:
            raise GluePreconditionError(
                f"local center {i} does not match the correspondence source",
                region=f"center {i}",
            )
        target = c.target.points[i]
        if not (a_z.is_proper and a_star.is_proper and local_map.orientation() == 1
                and global_map.orientation() == 1):
            raise GluePreconditionError(
                f"all pieces must be proper at center {i}", region=f"orientation {i}"
            )
        pin_gap = float(np.linalg.norm(evaluate(local_map, center) - target))
        if pin_gap > tol:
            raise GluePreconditionError(
                f"local map {i} misses its target by {pin_gap:.3e}",
                region=f"pin {i}",
            )
        # Local map must be rigid (= A_z) outside the innermost ball.
        for radius in (b1, 2.0 * b1, 10.0 * b1):
            for x in _sample_sphere(center, radius, n_check, dim):
                gap = float(np.linalg.norm(evaluate(local_map, x) - a_z.apply(x)))
                if gap > tol:
                    raise GluePreconditionError(
                        f"local map {i} deviates from its motion by {gap:.3e} at "
                        f"radius {radius:.3e}",
                        region=f"local/rigid {i}",
                    )
        # Global map must be rigid (= A*_z) on the outermost ball.
        for radius in (0.3 * b4, b4):
            for x in _sample_sphere(center, radius, n_check, dim):
                gap = float(np.linalg.norm(evaluate(global_map, x) - a_star.apply(x)))
                if gap > tol:
                    raise GluePreconditionError(
                        f"global map deviates from its motion near center {i} "
                        f"by {gap:.3e} at radius {radius:.3e}",
                        region=f"global/rigid {i}",
                    )
        gap_centers = float(np.linalg.norm(a_z.apply(center) - a_star.apply(center)))
        gap_limit = max(config.gap_constant * epsilon * b1, floor)
        if gap_centers > gap_limit:
            raise GluePreconditionError(
                f"motions at center {i} differ by {gap_centers:.3e} > {gap_limit:.3e}",
                region=f"gap {i}",
            )
        blend = motion_blend(a_z, a_star, center, b3, epsilon)
        pieces.append(GluePiece(center, b2, b3, local_map, blend))

    glued = Glue(pieces, global_map, tau, epsilon)

    # Region-interface consistency, asserted numerically on both sides.
    for i, piece in enumerate(pieces):
        for radius, inner_map, outer_map, name in (
            (b2, piece.local_map, piece.blend_map, "inner"),
            (b3, piece.blend_map, global_map, "outer"),
        ):
            for x in _sample_sphere(piece.center, radius, n_check, dim):
                gap = float(np.linalg.norm(evaluate(inner_map, x) - evaluate(outer_map, x)))
                if gap > tol:
                    raise GluePreconditionError(
                        f"{name} interface of piece {i} is discontinuous: gap {gap:.3e}",
                        region=f"interface {name} {i}",
                    )
    if len(pieces) > 1:
        dists = source.pairwise_distances
        min_sep = float(dists[np.triu_indices(len(c), k=1)].min())
        if min_sep <= 2.0 * b4:
            raise GluePreconditionError(
                "outer gluing balls are not pairwise disjoint", region="disjointness"
            )
    return glued


def _attach_path(exc, label):
    exc.args = (f"{exc.args[0] if exc.args else ''} [at {label}]",) + tuple(exc.args[1:])
    return exc


@dataclass(frozen=True)
class _RecursionResult:
    map: object
    far_motion: EuclideanMotion
    agreement_radius: float
    local_motions: list
    depth: int
    tau: float
    blend_radius: float


def _extend_recursive(c, epsilon, eta, config, depth, path):
    """Recursive core of extend."""
    if len(c) == 1:
        shift = c.target.points[0] - c.source.points[0]
        motion = EuclideanMotion.from_translation(shift)
        local = LocalMotion(
            center=tuple(float(v) for v in c.source.points[0]),
            motion=motion,
            radius=np.inf,
        )
        return _RecursionResult(Motion(motion), motion, 0.0, [local], depth, 0.0, 0.0)

    clustering = cluster(c.source, epsilon)
    tau = clustering.tau
    b1, b2, b3, b4 = (np.exp((i - 5.0) / epsilon) * tau for i in range(1, 5))

    sub_results = []
    for nu, idx in enumerate(clustering.indices):
        try:
            sub_results.append(
                _extend_recursive(c.restrict(idx), epsilon, eta, config,
                                  depth + 1, path + (nu,))
            )
        except IsoextError as exc:
            raise _attach_path(exc, f"cluster {path + (nu,)}")

    rep_indices = [idx[0] for idx in clustering.indices]
    rep_c = c.restrict(rep_indices)

    # Each sub-extension must be rigid strictly inside the innermost glue ball.
    for nu, (idx, result) in enumerate(zip(clustering.indices, sub_results)):
        sub_diam = clustering.clusters[nu].diameter
        if result.agreement_radius + sub_diam > b1:
            raise GluePreconditionError(
                f"cluster {nu} is rigid only beyond {result.agreement_radius:.3e} "
                f"of its points (diameter {sub_diam:.3e}), outside the inner glue "
                f"ball {b1:.3e}; epsilon is too large for this configuration",
                region=f"cluster {nu} far field",
            )

    try:
        sep_report = extend_separated(rep_c, tau, epsilon, eta, config)
    except IsoextError as exc:
        raise _attach_path(exc, f"representatives of {path or 'root'}")

    # The background map is rigid on B(z, tau/100); the glue needs B4.
    rep_local_radius = min(lm.radius for lm in sep_report.local_motions)
    if b4 > rep_local_radius:
        raise GluePreconditionError(
            f"background rigid radius {rep_local_radius:.3e} is smaller than the "
            f"outer glue ball {b4:.3e}; epsilon is too large for the ball schedule",
            region="background rigidity",
        )

    locals_ = [
        (rep_c.source.points[nu], sub_results[nu].map, sub_results[nu].far_motion)
        for nu in range(len(rep_indices))
    ]
    global_motions = [lm.motion for lm in sep_report.local_motions]
    glued = glue(rep_c, tau, epsilon, locals_, sep_report.map, global_motions, config)

    # Collect local motions from every cluster, clamped into its glue region.
    local_motions = []
    for nu, (idx, result) in enumerate(zip(clustering.indices, sub_results)):
        rep = rep_c.source.points[nu]
        for lm in result.local_motions:
            center = np.asarray(lm.center)
            room = b2 - float(np.linalg.norm(center - rep))
            radius = min(lm.radius, room)
            if radius > 0.0:
                local_motions.append(replace(lm, radius=float(radius)))

    agreement_radius = max(b3, sep_report.diagnostics["agreement_radius"])
    max_depth = max(r.depth for r in sub_results)
    return _RecursionResult(glued, sep_report.far_motion, agreement_radius,
                            local_motions, max_depth, tau, b3)


def extend(c, epsilon, config=DEFAULT_CONFIG, eta=None):
    """Extend a near-isometric correspondence to a proper distorted
    diffeomorphism of R^D, rigid far from the source set.

    Guards: pairwise distortion delta <= exp(-c_second/epsilon), no negative
    eta-block at eta = exp(-c_prime/epsilon).  Raises typed errors naming the
    failed guard otherwise.
    """
    if not (0.0 < epsilon < 1.0):
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if len(c) > config.max_points:
        raise InvalidInputError(
            f"card(E) = {len(c)} exceeds configured max {config.max_points}"
        )
    if eta is None:
        eta = float(np.exp(-config.c_prime / epsilon))
    diagnostics = {"epsilon": float(epsilon), "eta": eta}

    if len(c) >= 2:
        cert = certify_distortion(c)
        delta_guard = max(float(np.exp(-config.c_second / epsilon)),
                          roundoff_floor(1.0, config.floor_factor))
        diagnostics["delta"] = cert.delta
        diagnostics["delta_guard"] = delta_guard
        if cert.delta > delta_guard:
            raise DeltaTooLargeError(
                f"pairwise distortion delta = {cert.delta:.3e} exceeds the guard "
                f"exp(-{config.c_second}/epsilon) = {delta_guard:.3e}",
                guard="delta_guard",
                value=cert.delta,
                limit=delta_guard,
            )
        _, negatives = detect_blocks(c, eta)
        if negatives:
            raise NegativeBlockDetectedError(
                f"negative block at indices {negatives[0].indices}: no proper "
                "extension exists",
                witness=negatives[0],
            )

    result = _extend_recursive(c, epsilon, eta, config, 1, ())
    glued, far_motion = result.map, result.far_motion
    local_motions, depth = result.local_motions, result.depth

    diam = c.source.diameter
    far_radius = config.far_radius_factor * max(diam, 1e-300)
    if result.agreement_radius > far_radius:
        raise InternalConsistencyError(
            f"constructed agreement radius {result.agreement_radius:.3e} exceeds "
            f"the reported far radius {far_radius:.3e}"
        )

    interp = verify_interpolation(glued, c)
    scale = _coordinate_scale(c.source, c.target)
    interp_limit = max(1e-9 * max(diam, 1e-300), roundoff_floor(scale, config.floor_factor))
    if interp > interp_limit:
        raise InternalConsistencyError(
            f"interpolation residual {interp:.3e} exceeds {interp_limit:.3e}"
        )

    # Sampled far-field agreement at the reported radius.
    far_gap = 0.0
    if len(c) > 1:
        region = AnnulusRegion(c.source.points.mean(axis=0), far_radius + diam,
                               2.0 * far_radius)
        for x in region.sample(32):
            dist = float(np.min(np.linalg.norm(c.source.points - x, axis=1)))
            gap = float(np.linalg.norm(evaluate(glued, x) - far_motion.apply(x)))
            far_gap = max(far_gap, gap)
            if gap > 1e-9 * dist:
                raise InternalConsistencyError(
                    f"far field deviates from the reported motion by {gap:.3e} "
                    f"at distance {dist:.3e}"
                )
    diagnostics["far_gap_sampled"] = far_gap
    diagnostics["recursion_depth"] = depth
    diagnostics["agreement_radius"] = result.agreement_radius
    diagnostics["tau"] = result.tau

    # Multi-scale verification domain: the whole configuration, the pinning
    # scale around each point, and the blend annuli around each point.
    centroid = c.source.points.mean(axis=0)
    balls = [BallDomain(centroid, 1.5 * diam + result.tau)] if diam > 0 else []
    for z in c.source.points[: min(len(c), 16)]:
        if result.tau > 0.0:
            balls.append(BallDomain(z, result.tau / 10.0))
        if result.blend_radius > 0.0:
            balls.append(BallDomain(z, 2.0 * result.blend_radius))
    domain = BallSet(balls) if balls else BallDomain(c.source.points[0], 1.0)
    distortion = verify_distortion(glued, domain, budget=epsilon,
                                   n_samples=config.verify_samples)
    diagnostics["pairwise_epsilon"] = distortion.pairwise_epsilon

    sign = orientation(glued, check_point=c.source.points[0] + diam * np.ones(c.dimension))
    if sign != 1:
        raise InternalConsistencyError("extension came out improper")

    return ExtensionReport(
        map=glued,
        epsilon_budget=float(epsilon),
        measured_distortion=distortion.epsilon_measured,
        far_motion=far_motion,
        far_radius=float(far_radius),
        local_motions=local_motions,
        interpolation_residual=interp,
        orientation=1,
        diagnostics=diagnostics,
    )


def extend_either_orientation(c, epsilon, config=DEFAULT_CONFIG):
    """Extend with whichever orientation the blocks allow.

    Proper when no negative block exists; otherwise the correspondence is
    pre-composed with a reflection (flipping every block sign) and the proper
    extension of the reflected problem is composed back.
    """
    verdict = check_extendability(c, epsilon, config)
    if verdict.status == STATUS_OBSTRUCTED:
        raise NegativeBlockDetectedError(
            "both a positive and a negative block are present; no distorted "
            "extension exists",
            witness=(verdict.witness_positive, verdict.witness_negative),
        )
    if verdict.status == STATUS_INCONCLUSIVE:
        raise DeltaTooLargeError(
            "pairwise distortion exceeds the guard; cannot certify extendability",
            guard="delta_guard",
        )
    if verdict.status == STATUS_PROPER:
        return extend(c, epsilon, config)

    # Improper: reflect the source, extend properly, compose back.
    dim = c.dimension
    normal = np.zeros(dim)
    normal[-1] = 1.0
    centroid = c.source.points.mean(axis=0)
    plane = Hyperplane(normal, float(centroid[-1]))
    rho = reflection_motion(plane)
    reflected = Correspondence(rho.apply(c.source.points), c.target.points)
    inner = extend(reflected, epsilon, config)
    final = Composition([Reflection(plane), inner.map])
    local_motions = [
        LocalMotion(
            center=tuple(float(v) for v in rho.apply(np.asarray(lm.center))),
            motion=lm.motion.compose(rho),
            radius=lm.radius,
        )
        for lm in inner.local_motions
    ]
    diagnostics = dict(inner.diagnostics)
    diagnostics["orientation"] = -1
    return ExtensionReport(
        map=final,
        epsilon_budget=inner.epsilon_budget,
        measured_distortion=inner.measured_distortion,
        far_motion=inner.far_motion.compose(rho),
        far_radius=inner.far_radius,
        local_motions=local_motions,
        interpolation_residual=verify_interpolation(final, c),
        orientation=-1,
        diagnostics=diagnostics,
    )


def check_extendability(c, epsilon, config=DEFAULT_CONFIG, eta=None):
    """Decide from block signs whether a distorted extension can exist."""
    if not (0.0 < epsilon < 1.0):
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if eta is None:
        eta = float(np.exp(-config.c_prime / epsilon))
    if len(c) >= 2:
        cert = certify_distortion(c)
        delta_guard = max(float(np.exp(-config.c_second / epsilon)),
                          roundoff_floor(1.0, config.floor_factor))
        if cert.delta > delta_guard:
            return ExtendabilityVerdict(status=STATUS_INCONCLUSIVE)
    positives, negatives = detect_blocks(c, eta)
    if positives and negatives:
        return ExtendabilityVerdict(
            status=STATUS_OBSTRUCTED,
            witness_positive=positives[0],
            witness_negative=negatives[0],
            flagged_subset=tuple(sorted(set(positives[0].indices)
                                        | set(negatives[0].indices))),
        )
    if negatives:
        return ExtendabilityVerdict(status=STATUS_IMPROPER,
                                    witness_negative=negatives[0])
    if positives:
        return ExtendabilityVerdict(status=STATUS_PROPER,
                                    witness_positive=positives[0])
    return ExtendabilityVerdict(status=STATUS_PROPER)


def check_extendability_by_subsets(c, epsilon, config=DEFAULT_CONFIG, eta=None):
    """Subset-enumeration cross-check of check_extendability: the verdict is
    obstructed iff some subset of at most 2D+2 points is obstructed."""
    from itertools import combinations

    if not (0.0 < epsilon < 1.0):
        raise InvalidInputError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if eta is None:
        eta = float(np.exp(-config.c_prime / epsilon))
    if len(c) >= 2:
        cert = certify_distortion(c)
        delta_guard = max(float(np.exp(-config.c_second / epsilon)),
                          roundoff_floor(1.0, config.floor_factor))
        if cert.delta > delta_guard:
            return ExtendabilityVerdict(status=STATUS_INCONCLUSIVE)
    dim = c.dimension
    n = len(c)
    any_pos = None
    any_neg = None
    max_size = min(n, 2 * dim + 2)
    for size in range(dim + 1, max_size + 1):
        for subset in combinations(range(n), size):
            sub = c.restrict(subset)
            positives, negatives = detect_blocks(sub, eta)
            if positives and any_pos is None:
                any_pos = _lift_block(positives[0], subset)
            if negatives and any_neg is None:
                any_neg = _lift_block(negatives[0], subset)
            if positives and negatives:
                pos = _lift_block(positives[0], subset)
                neg = _lift_block(negatives[0], subset)
                return ExtendabilityVerdict(
                    status=STATUS_OBSTRUCTED,
                    witness_positive=pos,
                    witness_negative=neg,
                    flagged_subset=subset,
                )
    if any_pos is not None and any_neg is not None:
        # Blocks of both signs exist; their union is itself a subset of at
        # most 2D+2 points, so the loop above must have caught it.
        raise InternalConsistencyError("subset scan missed an obstructed subset")
    if any_neg is not None:
        return ExtendabilityVerdict(status=STATUS_IMPROPER, witness_negative=any_neg)
    return ExtendabilityVerdict(status=STATUS_PROPER, witness_positive=any_pos)


def _lift_block(block, subset):
    lifted = tuple(subset[i] for i in block.indices)
    return replace(block, indices=lifted)


def approximate_by_motion(m, center, radius, n_samples=1000):
    """Best rigid approximation of a distorted map on a ball, built from the
    image frame at the center.

    Evaluates the map at the center and at center + radius * e_i,
    orthonormalizes the image offsets, and anchors the motion at the center
    image.  Returns (motion, sampled sup |m(x) - A(x)| over the ball).
    """
    center = np.asarray(center, dtype=float).reshape(-1)
    dim = center.shape[0]
    image_center = evaluate(m, center)
    offsets = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = radius
        offsets.append((evaluate(m, center + e) - image_center) / radius)
    try:
        frame = gram_schmidt(np.asarray(offsets))
    except IsoextError as exc:
        raise _attach_path(exc, "image frame of approximate_by_motion")
    rotation = frame.T  # columns are the orthonormalized images of e_i
    motion = EuclideanMotion(rotation, image_center - rotation @ center)
    sign = orientation(m, check_point=center)
    if motion.orientation != sign:
        raise InternalConsistencyError(
            "orientation of the rigid approximation disagrees with the map"
        )
    pts = BallDomain(center, radius).sample(n_samples)
    sup_error = max(float(np.linalg.norm(evaluate(m, x) - motion.apply(x))) for x in pts)
    return motion, sup_error
