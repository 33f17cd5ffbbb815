"""Exact constant-difference trajectory family.

A desired attitude ``p`` and body attitude ``q`` with a constant difference are
parameterized (up to a constant rotation) by a constant half-offset ``phi`` and
two twice-differentiable signals ``alpha(t)``, ``beta(t)``. ``q`` and ``w``
follow from ``p`` and ``v`` by flipping the sign of ``phi``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .quaternion import conj, qmul


class Signal:
    """Scalar signal returning ``(value, first derivative, second derivative)`` at ``t``."""

    kind = None

    def __call__(self, t):
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError


class PolynomialSignal(Signal):
    """``sum_k coefficients[k] * t**k``."""

    kind = "polynomial"

    def __init__(self, coefficients):
        self.coefficients = [float(c) for c in coefficients]
        if not self.coefficients:
            raise ValueError("polynomial signal needs at least one coefficient")
        self._d1 = [k * c for k, c in enumerate(self.coefficients)][1:]
        self._d2 = [k * c for k, c in enumerate(self._d1)][1:]

    @staticmethod
    def _eval(coeffs, t):
        acc = 0.0
        for c in reversed(coeffs):
            acc = acc * t + c
        return acc

    def __call__(self, t):
        return (self._eval(self.coefficients, t), self._eval(self._d1, t),
                self._eval(self._d2, t))

    def to_dict(self):
        return {"kind": self.kind, "coefficients": list(self.coefficients)}


class SinusoidSignal(Signal):
    """``offset + amplitude * sin(omega t + phase)``."""

    kind = "sinusoid"

    def __init__(self, amplitude, omega, phase=0.0, offset=0.0):
        self.amplitude = float(amplitude)
        self.omega = float(omega)
        self.phase = float(phase)
        self.offset = float(offset)

    def __call__(self, t):
        arg = self.omega * t + self.phase
        s, c = math.sin(arg), math.cos(arg)
        A, w = self.amplitude, self.omega
        return self.offset + A * s, A * w * c, -A * w * w * s

    def to_dict(self):
        return {"kind": self.kind, "amplitude": self.amplitude, "omega": self.omega,
                "phase": self.phase, "offset": self.offset}


class CubicSplineSignal(Signal):
    """C2 cubic spline through ``(knots, values)``; extrapolates past the ends."""

    kind = "cubic_spline"

    def __init__(self, knots, values, bc_type="not-a-knot"):
        self.knots = [float(k) for k in knots]
        self.values = [float(v) for v in values]
        self.bc_type = bc_type
        self._spline = CubicSpline(self.knots, self.values, bc_type=bc_type)
        self._d1 = self._spline.derivative(1)
        self._d2 = self._spline.derivative(2)

    def __call__(self, t):
        return float(self._spline(t)), float(self._d1(t)), float(self._d2(t))

    def to_dict(self):
        return {"kind": self.kind, "knots": list(self.knots), "values": list(self.values),
                "bc_type": self.bc_type}


@dataclass(frozen=True)
class TrajectoryParams:
    phi: float
    alpha: Signal
    beta: Signal

    def __post_init__(self):
        if not abs(self.phi) < math.pi / 2:
            raise ValueError(f"|phi| must be < pi/2, got {self.phi!r}")

    def to_dict(self):
        return {"phi": self.phi, "alpha": self.alpha.to_dict(), "beta": self.beta.to_dict()}


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    p: np.ndarray
    q: np.ndarray
    e: np.ndarray
    v: np.ndarray
    w: np.ndarray
    vdot: np.ndarray
    wdot: np.ndarray
    triad: np.ndarray
    triad_rate: np.ndarray
    p_dot: np.ndarray

    @property
    def omega(self):
        """Full body angular velocity (rad/s)."""
        return 2.0 * self.w

    @property
    def nu(self):
        """Full desired angular velocity (rad/s)."""
        return 2.0 * self.v


def _triad(ca, sa, cb, sb):
    return np.array([
        [cb, -ca * sb, -sa * sb],
        [sb, ca * cb, sa * cb],
        [0.0, -sa, ca],
    ])


def _velocity(cp, sp, ad, bd, sa):
    # coefficients of v on (x, y) of the triad
    return ad * cp * cp - bd * cp * sp * sa, ad * cp * sp + bd * cp * cp * sa


def _acceleration(cp, sp, ad, add, bd, bdd, ca, sa):
    # coefficients of vdot on (x, y, z) of the triad
    x = add * cp * cp - 2 * ad * bd * cp * sp * ca - bdd * cp * sp * sa - bd * bd * cp * cp * ca * sa
    y = add * cp * sp + 2 * ad * bd * cp * cp * ca + bdd * cp * cp * sa - bd * bd * cp * sp * ca * sa
    z = -(ad * ad + bd * bd * sa * sa) * cp * sp
    return x, y, z


def reference(params, t):
    """``(p, v, vdot)`` at time ``t``; the cheap path used inside simulations."""
    a, ad, add = params.alpha(t)
    b, bd, bdd = params.beta(t)
    cp, sp = math.cos(params.phi), math.sin(params.phi)
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    p = np.array([cp * ca, cp * sa * cb, cp * sa * sb, -sp])
    x = np.array([cb, sb, 0.0])
    y = np.array([-ca * sb, ca * cb, -sa])
    z = np.array([-sa * sb, sa * cb, ca])
    v1, v2 = _velocity(cp, sp, ad, bd, sa)
    d1, d2, d3 = _acceleration(cp, sp, ad, add, bd, bdd, ca, sa)
    return p, v1 * x + v2 * y, d1 * x + d2 * y + d3 * z


def sample(params, t):
    """Full trajectory sample at time ``t`` (s)."""
    t = float(t)
    a, ad, add = params.alpha(t)
    b, bd, bdd = params.beta(t)
    phi = params.phi
    cp, sp = math.cos(phi), math.sin(phi)
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)

    p = np.array([cp * ca, cp * sa * cb, cp * sa * sb, -sp])
    q = np.array([cp * ca, cp * sa * cb, cp * sa * sb, sp])
    e = np.array([math.cos(2 * phi), -math.sin(2 * phi) * sa * sb,
                  math.sin(2 * phi) * sa * cb, math.sin(2 * phi) * ca])
    p_dot = (ad * cp * np.array([-sa, ca * cb, ca * sb, 0.0])
             + bd * cp * sa * np.array([0.0, -sb, cb, 0.0]))

    T = _triad(ca, sa, cb, sb)
    x, y, z = T[:, 0], T[:, 1], T[:, 2]
    v1, v2 = _velocity(cp, sp, ad, bd, sa)
    w1, w2 = _velocity(cp, -sp, ad, bd, sa)
    vd = _acceleration(cp, sp, ad, add, bd, bdd, ca, sa)
    wd = _acceleration(cp, -sp, ad, add, bd, bdd, ca, sa)
    triad_rate = -ad * x - bd * sa * y + bd * ca * z

    return TrajectorySample(
        t=t, p=p, q=q, e=e,
        v=v1 * x + v2 * y,
        w=w1 * x + w2 * y,
        vdot=vd[0] * x + vd[1] * y + vd[2] * z,
        wdot=wd[0] * x + wd[1] * y + wd[2] * z,
        triad=T, triad_rate=triad_rate, p_dot=p_dot,
    )


def triad_derivatives(params, t):
    """Analytic ``(x', y', z')`` of the triad."""
    a, ad, _ = params.alpha(t)
    _, bd, _ = params.beta(t)
    s = sample(params, t)
    x, y, z = s.triad[:, 0], s.triad[:, 1], s.triad[:, 2]
    ca, sa = math.cos(a), math.sin(a)
    return (bd * (ca * y + sa * z),
            -ad * z - bd * ca * x,
            -bd * sa * x + ad * y)


def verify_consistency(params, t, h=1e-5):
    """Max-abs residuals of analytic rates against central differences of width ``h``.

    Keys: ``p_dot``, ``q_dot``, ``x_dot``, ``y_dot``, ``z_dot``, ``v_dot``,
    ``w_dot``, ``triad_rate`` (the triad's angular velocity, checked through
    ``x' = Omega x x``), ``p_kinematics`` (``p (x) v`` against ``p'``).
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-7, 1e-3]")
    s0 = sample(params, t)
    sp_, sm = sample(params, t + h), sample(params, t - h)

    def fd(attr):
        return (getattr(sp_, attr) - getattr(sm, attr)) / (2 * h)

    xd, yd, zd = triad_derivatives(params, t)
    triad_fd = fd("triad")
    omega_cross = np.column_stack([np.cross(s0.triad_rate, s0.triad[:, k]) for k in range(3)])
    q_dot = qmul(s0.q, np.concatenate(([0.0], s0.w)))

    res = {
        "p_dot": np.abs(fd("p") - s0.p_dot).max(),
        "q_dot": np.abs(fd("q") - q_dot).max(),
        "x_dot": np.abs(triad_fd[:, 0] - xd).max(),
        "y_dot": np.abs(triad_fd[:, 1] - yd).max(),
        "z_dot": np.abs(triad_fd[:, 2] - zd).max(),
        "v_dot": np.abs(fd("v") - s0.vdot).max(),
        "w_dot": np.abs(fd("w") - s0.wdot).max(),
        "triad_rate": np.abs(triad_fd - omega_cross).max(),
        "p_kinematics": np.abs(qmul(s0.p, np.concatenate(([0.0], s0.v))) - s0.p_dot).max(),
    }
    return {k: float(v) for k, v in res.items()}


def velocity_from_quat(p, p_dot):
    """``p^-1 (x) p'`` as a 3-vector."""
    return qmul(conj(p), p_dot)[1:]


def signal_from_dict(d):
    d = dict(d)
    kind = d.pop("kind")
    if kind == "polynomial":
        return PolynomialSignal(**d)
    if kind == "sinusoid":
        return SinusoidSignal(**d)
    if kind == "cubic_spline":
        return CubicSplineSignal(**d)
    raise ValueError(f"unknown signal kind {kind!r}")
