"""Smooth cutoff and profile machinery.

Everything is built from the classic bump seed g(x) = exp(-1/x) for x > 0:
the smooth step h = g / (g + g(1 - .)) rises from 0 to 1 on [0, 1] with flat
ends, and the radial cutoff is theta(t) = h^2(sigma(t)) with sigma affine
sending [r_in, r_out] to [1, 0].  Twist profiles (radius-dependent rotation
angles) live here too so the map nodes can serialize them.
"""

import numpy as np

from .errors import InvalidInputError, InvalidSpecError


def _g(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / x[pos])
    return out


def _g_prime(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    with np.errstate(over="ignore", divide="ignore"):
        out[pos] = np.exp(-1.0 / x[pos]) / x[pos] ** 2
    return out


def smooth_step(u):
    """h^2(u): 0 for u <= 0, 1 for u >= 1, smooth and monotone in between."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.empty_like(u)
    lo = u <= 0.0
    hi = u >= 1.0
    mid = ~(lo | hi)
    out[lo] = 0.0
    out[hi] = 1.0
    gu = _g(u[mid])
    gc = _g(1.0 - u[mid])
    h = gu / (gu + gc)
    out[mid] = h * h
    return float(out[0]) if scalar else out


def smooth_step_derivative(u):
    """d/du of smooth_step; identically 0 outside (0, 1)."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 0
    u = np.atleast_1d(u)
    out = np.zeros_like(u)
    mid = (u > 0.0) & (u < 1.0)
    um = u[mid]
    gu = _g(um)
    gc = _g(1.0 - um)
    denom = gu + gc
    h = gu / denom
    h_prime = (_g_prime(um) * gc + gu * _g_prime(1.0 - um)) / denom**2
    out[mid] = 2.0 * h * h_prime
    return float(out[0]) if scalar else out


# Measured sup of |d(h^2)/du|; used only in analytic guard estimates.
SMOOTH_STEP_MAX_SLOPE = float(np.max(smooth_step_derivative(np.linspace(0, 1, 20001))))


class CutoffSpec:
    """A radial cutoff: 1 on [0, r_in], 0 on [r_out, inf), smooth between."""

    def __init__(self, r_in, r_out):
        if not (0.0 < r_in < r_out):
            raise InvalidSpecError(
                f"cutoff radii must satisfy 0 < r_in < r_out, got ({r_in!r}, {r_out!r})"
            )
        self.r_in = float(r_in)
        self.r_out = float(r_out)

    @property
    def width(self):
        return self.r_out - self.r_in

    def evaluate(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise InvalidInputError("cutoff argument must be nonnegative")
        return smooth_step((self.r_out - t) / self.width)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        return -smooth_step_derivative((self.r_out - t) / self.width) / self.width

    def to_dict(self):
        return {"r_in": self.r_in, "r_out": self.r_out}

    @classmethod
    def from_dict(cls, d):
        return cls(d["r_in"], d["r_out"])

    def __repr__(self):
        return f"CutoffSpec(r_in={self.r_in!r}, r_out={self.r_out!r})"


def cutoff_eval(spec, t):
    """Evaluate the radial cutoff theta at t >= 0."""
    out = spec.evaluate(t)
    return float(out) if np.ndim(out) == 0 else out


class ConstantProfile:
    """A rotation-angle profile f(t) = angle, independent of radius."""

    kind = "constant"

    def __init__(self, angle):
        self.total_angle = float(angle)

    def angle(self, t):
        t = np.asarray(t, dtype=float)
        return np.full_like(t, self.total_angle) if t.ndim else self.total_angle

    def angle_rate(self, t):
        t = np.asarray(t, dtype=float)
        return np.zeros_like(t) if t.ndim else 0.0

    def to_dict(self):
        return {"kind": self.kind, "angle": self.total_angle}

    def __repr__(self):
        return f"ConstantProfile(angle={self.total_angle!r})"


class LogRampProfile:
    """A profile ramping smoothly from 0 to a total angle across a log-radius
    window [r_inner, r_outer]; t * |f'(t)| <= max_slope * angle / log-width."""

    kind = "log_ramp"

    def __init__(self, angle, r_inner, r_outer):
        if not (0.0 < r_inner < r_outer):
            raise InvalidSpecError(
                f"log ramp radii must satisfy 0 < r_inner < r_outer, "
                f"got ({r_inner!r}, {r_outer!r})"
            )
        self.total_angle = float(angle)
        self.r_inner = float(r_inner)
        self.r_outer = float(r_outer)
        self._log_width = float(np.log(self.r_outer) - np.log(self.r_inner))

    def _u(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(t > 0, (np.log(np.maximum(t, 1e-300)) - np.log(self.r_inner))
                            / self._log_width, -np.inf)

    def angle(self, t):
        out = self.total_angle * smooth_step(self._u(t))
        return float(out) if np.ndim(t) == 0 else out

    def angle_rate(self, t):
        t_arr = np.asarray(t, dtype=float)
        u = self._u(t_arr)
        with np.errstate(divide="ignore", invalid="ignore"):
            rate = np.where(
                t_arr > 0,
                self.total_angle * smooth_step_derivative(u) / (self._log_width * np.maximum(t_arr, 1e-300)),
                0.0,
            )
        return float(rate) if np.ndim(t) == 0 else rate

    def to_dict(self):
        return {"kind": self.kind, "angle": self.total_angle,
                "r_inner": self.r_inner, "r_outer": self.r_outer}

    def __repr__(self):
        return (f"LogRampProfile(angle={self.total_angle!r}, "
                f"r_inner={self.r_inner!r}, r_outer={self.r_outer!r})")


_PROFILE_KINDS = {
    ConstantProfile.kind: lambda d: ConstantProfile(d["angle"]),
    LogRampProfile.kind: lambda d: LogRampProfile(d["angle"], d["r_inner"], d["r_outer"]),
}


def profile_from_dict(d):
    kind = d.get("kind")
    if kind not in _PROFILE_KINDS:
        raise InvalidInputError(f"unknown profile kind {kind!r}")
    return _PROFILE_KINDS[kind](d)
