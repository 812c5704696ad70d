"""Numerical certification of constructed maps.

Sampling-based checks (never proofs): Jacobian singular-value distortion on
deterministic low-discrepancy samples, interpolation residuals, agreement
with a Euclidean motion on annuli/exteriors, and injectivity probes.
Reports carry sample counts and worst points so failures are replayable.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import InvalidInputError
from .smooth_maps import evaluate, jacobian


def _halton(dim, n, skip=0):
    sampler = qmc.Halton(d=dim, scramble=False)
    if skip:
        sampler.fast_forward(skip)
    return sampler.random(n)


class BoxDomain:
    """An axis-aligned box [lo, hi]^D sampling domain."""

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=float).reshape(-1)
        self.hi = np.asarray(hi, dtype=float).reshape(-1)
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise InvalidInputError("box needs lo < hi componentwise")

    @property
    def dimension(self):
        return self.lo.shape[0]

    @property
    def scale(self):
        return float(np.max(self.hi - self.lo))

    def sample(self, n):
        u = _halton(self.dimension, n)
        return self.lo + u * (self.hi - self.lo)


class BallDomain:
    """A single ball sampling domain."""

    def __init__(self, center, radius):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.radius = float(radius)
        if self.radius <= 0:
            raise InvalidInputError("ball radius must be positive")

    @property
    def dimension(self):
        return self.center.shape[0]

    @property
    def scale(self):
        return 2.0 * self.radius

    def sample(self, n):
        # Rejection from the Halton cube keeps the sequence deterministic.
        dim = self.dimension
        out = np.empty((n, dim))
        have = 0
        skip = 0
        while have < n:
            block = _halton(dim, max(2 * (n - have), 64), skip=skip)
            skip += block.shape[0]
            pts = 2.0 * block - 1.0
            keep = pts[np.sum(pts * pts, axis=1) <= 1.0]
            take = min(n - have, keep.shape[0])
            out[have:have + take] = keep[:take]
            have += take
        return self.center + self.radius * out


class BallSet:
    """A union of balls; samples are spread evenly across the balls."""

    def __init__(self, balls):
        self.balls = [b if isinstance(b, BallDomain) else BallDomain(*b) for b in balls]
        if not self.balls:
            raise InvalidInputError("ball set needs at least one ball")
        dims = {b.dimension for b in self.balls}
        if len(dims) != 1:
            raise InvalidInputError("balls must share a dimension")

    @property
    def dimension(self):
        return self.balls[0].dimension

    @property
    def scale(self):
        return max(b.scale for b in self.balls)

    def sample(self, n):
        per = [n // len(self.balls)] * len(self.balls)
        for i in range(n - sum(per)):
            per[i] += 1
        parts = [b.sample(k) for b, k in zip(self.balls, per) if k > 0]
        return np.vstack(parts)


class AnnulusRegion:
    """Points with r_lo <= |x - center| <= r_hi."""

    def __init__(self, center, r_lo, r_hi):
        self.center = np.asarray(center, dtype=float).reshape(-1)
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)
        if not (0.0 <= self.r_lo < self.r_hi):
            raise InvalidInputError("annulus needs 0 <= r_lo < r_hi")

    @property
    def dimension(self):
        return self.center.shape[0]

    def sample(self, n):
        dim = self.dimension
        ball = BallDomain(np.zeros(dim), 1.0)
        raw = ball.sample(2 * n + 8)
        norms = np.linalg.norm(raw, axis=1)
        dirs = raw[norms > 1e-6]
        dirs = (dirs / np.linalg.norm(dirs, axis=1)[:, None])[:n]
        u = _halton(1, n).reshape(-1)
        radii = (self.r_lo**dim + u * (self.r_hi**dim - self.r_lo**dim)) ** (1.0 / dim)
        return self.center + dirs * radii[:, None]


class ExteriorRegion:
    """Points at distance [r_lo, r_hi] from a finite point set."""

    def __init__(self, points, r_lo, r_hi):
        self.points = np.asarray(points, dtype=float)
        if self.points.ndim != 2:
            raise InvalidInputError("points must be an (n, D) array")
        self.r_lo = float(r_lo)
        self.r_hi = float(r_hi)
        if not (0.0 < self.r_lo < self.r_hi):
            raise InvalidInputError("exterior needs 0 < r_lo < r_hi")

    @property
    def dimension(self):
        return self.points.shape[1]

    def sample(self, n):
        # Shells around cycling base points; samples below the lower distance
        # bound (possible near other base points) are pushed out by rescaling.
        base = self.points
        ann = AnnulusRegion(np.zeros(self.dimension), self.r_lo, self.r_hi)
        offsets = ann.sample(n)
        out = np.empty_like(offsets)
        for i in range(n):
            out[i] = base[i % base.shape[0]] + offsets[i]
            d = np.min(np.linalg.norm(base - out[i], axis=1))
            if d < self.r_lo:
                direction = offsets[i] / np.linalg.norm(offsets[i])
                out[i] = base[i % base.shape[0]] + direction * self.r_hi
        return out


@dataclass(frozen=True)
class DistortionReport:
    """Sampled distortion of a map: worst Jacobian singular-value deviation
    plus a bi-Lipschitz cross-check from function values."""

    epsilon_measured: float
    worst_point: tuple
    samples: int
    pairwise_epsilon: float
    budget: float
    passed: bool


def verify_distortion(m, domain, budget, n_samples=400):
    """Sample Jacobian singular values over a domain and report the worst
    distortion.  Failing the budget is recorded, not raised."""
    if n_samples < 100:
        raise InvalidInputError("need at least 100 samples")
    pts = domain.sample(n_samples)
    worst = -1.0
    worst_point = pts[0]
    for x in pts:
        s = np.linalg.svd(jacobian(m, x), compute_uv=False)
        local = max(float(s.max()) - 1.0, 1.0 / float(s.min()) - 1.0)
        if local > worst:
            worst = local
            worst_point = x
    worst = max(worst, 0.0)

    # Bi-Lipschitz cross-check: ratios over nearby sampled pairs.
    pair_eps = 0.0
    half = len(pts) // 2
    for a, b in zip(pts[:half], pts[half:2 * half]):
        gap = float(np.linalg.norm(a - b))
        if gap == 0.0:
            continue
        image_gap = float(np.linalg.norm(evaluate(m, a) - evaluate(m, b)))
        if image_gap == 0.0:
            continue
        ratio = image_gap / gap
        pair_eps = max(pair_eps, ratio - 1.0, 1.0 / ratio - 1.0)

    return DistortionReport(
        epsilon_measured=float(worst),
        worst_point=tuple(float(v) for v in worst_point),
        samples=int(n_samples),
        pairwise_epsilon=float(pair_eps),
        budget=float(budget),
        passed=bool(worst <= budget),
    )


def verify_interpolation(m, c):
    """Max |m(y_i) - z_i| over a correspondence."""
    gaps = [
        float(np.linalg.norm(evaluate(m, y) - z))
        for y, z in zip(c.source.points, c.target.points)
    ]
    return max(gaps)


def verify_motion_agreement(m, region, motion, n_samples=200):
    """Max |m(x) - A(x)| over a sampled region."""
    pts = region.sample(n_samples)
    return max(float(np.linalg.norm(evaluate(m, x) - motion.apply(x))) for x in pts)


def probe_injectivity(m, domain, n_pairs=1000, seed=0):
    """Min |m(x) - m(y)| / |x - y| over random pairs; a probe, not a proof."""
    rng = np.random.default_rng(seed)
    xs = domain.sample(n_pairs)
    dim = domain.dimension
    lo = xs.min(axis=0)
    hi = xs.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    ys = lo + rng.random((n_pairs, dim)) * span
    best = np.inf
    for a, b in zip(xs, ys):
        gap = float(np.linalg.norm(a - b))
        if gap == 0.0:
            continue
        ratio = float(np.linalg.norm(evaluate(m, a) - evaluate(m, b))) / gap
        best = min(best, ratio)
    return float(best)
