"""Feedback laws for tracking a general desired attitude trajectory.

Two designs are provided. The blended design combines a scalar law ``g`` for
``e_v . w'`` with a vector law ``h`` for ``w'`` through a weight ``r``. The
target-velocity design differentiates a weighted target ``f`` and closes the
loop as ``w' = f' - L (w - f)``, which comes with the Lyapunov function
``V = |w - f|^2 / 2``.

All velocities are half-angular velocities (rad/s) and accelerations their
time derivatives (rad/s^2).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import error_dot
from .errors import DegenerateErrorVector, NonSPDInertia, NonUnitInput
from .quaternion import UNIT_TOL_INTERNAL, as_vec3, cross


@dataclass(frozen=True)
class ControllerConfig:
    """Gains of the tracking controller.

    Attributes:
        k: Positive gain of the scalar law.
        L: Symmetric positive definite 3x3 feedback matrix.
        r: Constraint weight in ``[0, 1]``; ``r = 1`` enforces only the
            velocity-match constraint.
        eps_ev: ``|e_v|`` at or below which the ``e_v / |e_v|`` terms are dropped.
        canonicalize: Negate the error quaternion when ``e0 < 0``.
    """

    k: float = 1.0
    L: np.ndarray = field(default_factory=lambda: np.eye(3))
    r: float = 0.5
    eps_ev: float = 1e-9
    canonicalize: bool = True

    def __post_init__(self):
        L = np.array(self.L, dtype=float)
        if L.shape != (3, 3):
            raise NonSPDInertia(f"L must be 3x3, got {L.shape}")
        if not np.allclose(L, L.T, rtol=1e-12, atol=1e-12):
            raise NonSPDInertia("L is not symmetric")
        if np.linalg.eigvalsh(L).min() <= 0.0:
            raise NonSPDInertia("L is not positive definite")
        if not 0.0 <= self.r <= 1.0:
            raise ValueError(f"r must lie in [0, 1], got {self.r!r}")
        if not self.k > 0.0:
            raise ValueError(f"k must be positive, got {self.k!r}")
        if not self.eps_ev >= 0.0:
            raise ValueError("eps_ev must be non-negative")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "k", float(self.k))
        object.__setattr__(self, "r", float(self.r))

    def to_dict(self):
        return {"k": self.k, "L": self.L.tolist(), "r": self.r, "eps_ev": self.eps_ev,
                "canonicalize": self.canonicalize}


@dataclass(frozen=True)
class ControlState:
    """Controller inputs: error quaternion parts, desired ``v``, ``v'`` and body ``w``."""

    e0: float
    ev: np.ndarray
    v: np.ndarray
    vdot: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e0", float(self.e0))
        for name in ("ev", "v", "vdot", "w"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)).copy())
        norm2 = self.e0 ** 2 + float(self.ev @ self.ev)
        if abs(norm2 - 1.0) > UNIT_TOL_INTERNAL:
            raise NonUnitInput(f"error quaternion has squared norm {norm2!r}")

    @property
    def e(self):
        return np.concatenate(([self.e0], self.ev))

    def canonical(self):
        """Same state with the error quaternion moved to the ``e0 >= 0`` hemisphere."""
        if self.e0 >= 0.0:
            return self
        return ControlState(-self.e0, -self.ev, self.v, self.vdot, self.w)


def _prepare(cs, cfg):
    return cs.canonical() if cfg.canonicalize else cs


def scalar_law_g(cs, k):
    """Bounded scalar law for ``e_v . w'``.

    ``e0 w.((1 - e0) v + e_v x v) - e_v.(v x w) - k e_v.w``
    """
    e0, ev, v, w = cs.e0, cs.ev, cs.v, cs.w
    return float(e0 * (w @ ((1.0 - e0) * v + cross(ev, v)))
                 - ev @ cross(v, w) - k * (ev @ w))


def vector_law_h(cs, L):
    """Vector law driving ``w`` toward ``e0 v - e_v x v``."""
    e0, ev, v, vd, w = cs.e0, cs.ev, cs.v, cs.vdot, cs.w
    L = np.asarray(L, dtype=float)
    return (e0 * vd - cross(ev, vd) - v * (ev @ w) - w * (ev @ v) + e0 * cross(v, w)
            + ev * (v @ (v + w)) - L @ (w - e0 * v + cross(ev, v)))


def blended_accel(cs, cfg):
    """``h + (1 - r)(g - e_v.h) e_v / |e_v|^2``."""
    cs = _prepare(cs, cfg)
    h = vector_law_h(cs, cfg.L)
    if cfg.r == 1.0:
        return h
    s2 = float(cs.ev @ cs.ev)
    if math.sqrt(s2) <= cfg.eps_ev:
        raise DegenerateErrorVector(
            f"|e_v| = {math.sqrt(s2):.3e} <= {cfg.eps_ev:g} with r = {cfg.r} < 1")
    g = scalar_law_g(cs, cfg.k)
    return h + (1.0 - cfg.r) * (g - float(cs.ev @ h)) / s2 * cs.ev


def target_velocity(cs, cfg):
    """Target body half-velocity ``f = e0 v - e_v x v - (1 - r) e0 e_v (e_v.v) / |e_v|``."""
    cs = _prepare(cs, cfg)
    e0, ev, v = cs.e0, cs.ev, cs.v
    f = e0 * v - cross(ev, v)
    s = math.sqrt(float(ev @ ev))
    if s > cfg.eps_ev:
        f = f - (1.0 - cfg.r) * e0 * float(ev @ v) / s * ev
    return f


def target_velocity_squared(cs, cfg):
    """Variant with ``|e_v|^2`` in the denominator; satisfies ``e_v.f = 0`` at ``r = 0``.

    Its derivative blows up as ``|e_v| -> 0``, so it is kept as a cross-check only.
    """
    cs = _prepare(cs, cfg)
    e0, ev, v = cs.e0, cs.ev, cs.v
    f = e0 * v - cross(ev, v)
    s2 = float(ev @ ev)
    if math.sqrt(s2) > cfg.eps_ev:
        f = f - (1.0 - cfg.r) * e0 * float(ev @ v) / s2 * ev
    return f


def accel_law(cs, cfg):
    """Acceleration law ``f' - L (w - f)`` written out analytically.

    ``e0'`` and ``e_v'`` use the actual ``w``. For ``|e_v| <= eps_ev`` all
    terms divided by ``|e_v|`` are dropped.
    """
    cs = _prepare(cs, cfg)
    e0, ev, v, vd, w = cs.e0, cs.ev, cs.v, cs.vdot, cs.w
    edot = error_dot(cs.e, v, w)
    e0d, evd = edot[0], edot[1:]

    out = e0d * v + e0 * vd - cross(evd, v) - cross(ev, vd)
    fb = w - e0 * v + cross(ev, v)
    s = math.sqrt(float(ev @ ev))
    if s > cfg.eps_ev and cfg.r != 1.0:
        m = 1.0 - cfg.r
        evv = float(ev @ v)
        out = out - m * ev * float(ev @ (e0d * v + e0 * vd)) / s
        out = out - m * e0 * (evd * evv + ev * float(evd @ v)) / s
        out = out + m * e0 * float(ev @ evd) * evv * ev / s ** 3
        fb = fb + m * e0 * evv / s * ev
    return out - cfg.L @ fb


def lyapunov(cs, cfg):
    """``(V, V')`` with ``V = |w - f|^2 / 2`` and ``V' = -(w - f).L(w - f)``."""
    d = _prepare(cs, cfg).w - target_velocity(cs, cfg)
    return 0.5 * float(d @ d), -float(d @ cfg.L @ d)


def target_velocity_rate_fd(cs, cfg, h=1e-6):
    """Central-difference ``f'`` along the flow ``e' = error_dot(e, v, w)``, ``v' = vdot``."""
    cs = _prepare(cs, cfg)
    edot = error_dot(cs.e, cs.v, cs.w)

    def f_at(tau):
        e = cs.e + tau * edot
        e = e / np.linalg.norm(e)
        shifted = ControlState(e[0], e[1:], cs.v + tau * cs.vdot, cs.vdot, cs.w)
        return target_velocity(shifted, cfg)

    return (f_at(h) - f_at(-h)) / (2.0 * h)
