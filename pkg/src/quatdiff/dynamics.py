"""Constant quaternion difference relations and the nominal error flow.

Velocities are half-angular velocities throughout: ``v = nu / 2`` for the
desired attitude ``p`` and ``w = omega / 2`` for the body attitude ``q``, so
that ``p' = p (x) v`` and ``q' = q (x) w``.

The nominal flow is written on the reduced state ``(e_v, w)`` with the scalar
part reconstructed as ``e0 = +sqrt(1 - |e_v|^2)``; runs in the ``e0 < 0``
hemisphere go through :func:`full_state_derivative` instead, which carries
``e0`` explicitly.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AntipodalSingularity, NonCompliantState, NonUnitInput
from .quaternion import UNIT_TOL, as_vec3, check_unit, conj, cross, qmul

#: Guard on ``1 + e0`` denominators.
EPS_ANTIPODAL = 1e-6
#: Relative tolerance of the compliance predicate ``|e_v.w| <= eps |e_v||w|``.
EPS_COMPLIANCE = 1e-9


@dataclass(frozen=True)
class ErrorState:
    """Unit error quaternion ``(e0, ev)`` plus body half-angular velocity ``w`` (rad/s)."""

    e0: float
    ev: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e0", float(self.e0))
        object.__setattr__(self, "ev", as_vec3(self.ev).copy())
        object.__setattr__(self, "w", as_vec3(self.w).copy())
        norm = math.sqrt(self.e0 ** 2 + float(self.ev @ self.ev))
        if not abs(norm - 1.0) <= UNIT_TOL:
            raise NonUnitInput(f"error quaternion has norm {norm!r}")

    @classmethod
    def from_reduced(cls, ev, w):
        """Build from ``(e_v, w)`` taking the ``e0 > 0`` root."""
        ev = as_vec3(ev)
        s2 = float(ev @ ev)
        if s2 > 1.0:
            raise NonUnitInput(f"|e_v|^2 = {s2!r} exceeds 1")
        return cls(math.sqrt(1.0 - s2), ev, w)

    @classmethod
    def from_quat(cls, e, w):
        e = np.asarray(e, dtype=float)
        return cls(e[0], e[1:], w)

    @property
    def quat(self):
        return np.concatenate(([self.e0], self.ev))

    @property
    def w_mag(self):
        return math.sqrt(float(self.w @ self.w))

    @property
    def ev_mag(self):
        return math.sqrt(float(self.ev @ self.ev))

    def reduced(self):
        """The 6-vector ``(e_v, w)``."""
        return np.concatenate((self.ev, self.w))


def compliance_violation(ev, w):
    """``|e_v . w|``."""
    return abs(float(np.dot(ev, w)))


def is_compliant(state, eps=EPS_COMPLIANCE):
    return compliance_violation(state.ev, state.w) <= eps * state.ev_mag * state.w_mag


def check_compliant(state, eps=EPS_COMPLIANCE, exc=NonCompliantState):
    if not is_compliant(state, eps):
        raise exc(
            f"|e_v.w| = {compliance_violation(state.ev, state.w):.3e} exceeds "
            f"{eps:g} |e_v||w| = {eps * state.ev_mag * state.w_mag:.3e}"
        )


def _check_antipodal(e0):
    if e0 <= -1.0 + EPS_ANTIPODAL:
        raise AntipodalSingularity(f"e0 = {e0!r} is within {EPS_ANTIPODAL:g} of -1")


def error_quat(p, q):
    """Unit error quaternion ``p^-1 (x) q``."""
    p = check_unit(p, name="p")
    q = check_unit(q, name="q")
    return qmul(conj(p), q)


def e0_from_diff(r):
    """Scalar error part from the difference ``r = q - p`` alone: ``1 - |r|^2 / 2``."""
    r = np.asarray(r, dtype=float)
    return 1.0 - 0.5 * float(r @ r)


def v_from_w(e, w):
    """Desired half-velocity consistent with constant difference: ``e0 w + e_v x w``."""
    e = np.asarray(e, dtype=float)
    w = as_vec3(w)
    return e[0] * w + cross(e[1:], w)


def w_from_v(e, v):
    """Body half-velocity consistent with constant difference: ``e0 v - e_v x v``."""
    e = np.asarray(e, dtype=float)
    v = as_vec3(v)
    return e[0] * v - cross(e[1:], v)


def error_dot(e, v, w):
    """Error quaternion rate for independent desired/body velocities.

    ``[e_v.(v - w) ; e0 (w - v) + e_v x (v + w)]``
    """
    e = np.asarray(e, dtype=float)
    e0, ev = e[0], e[1:]
    v = as_vec3(v)
    w = as_vec3(w)
    return np.concatenate((
        [float(ev @ (v - w))],
        e0 * (w - v) + cross(ev, v + w),
    ))


def error_dot_reduced(e, w):
    """Error quaternion rate after eliminating ``v`` through :func:`v_from_w`."""
    e = np.asarray(e, dtype=float)
    e0, ev = e[0], e[1:]
    w = as_vec3(w)
    evw = float(ev @ w)
    return np.concatenate((
        [(e0 - 1.0) * evw],
        (e0 - 1.0) * w + cross(ev, w) + ev * evw,
    ))


def nominal_wdot(e, w):
    """Minimal-norm nominal body acceleration ``|w|^2 e_v / (1 + e0)``."""
    e = np.asarray(e, dtype=float)
    _check_antipodal(e[0])
    w = as_vec3(w)
    return float(w @ w) / (1.0 + e[0]) * e[1:]


def nominal_vector_field(y):
    """Right-hand side of the reduced nominal flow on the raw 6-vector ``(e_v, w)``.

    No compliance or norm checks: integrator stages and finite differences
    evaluate slightly off the constraint manifold.
    """
    ev = y[:3]
    w = y[3:]
    e0 = math.sqrt(1.0 - float(ev @ ev))
    evw = float(ev @ w)
    return np.concatenate((
        (e0 - 1.0) * w + ev * evw + cross(ev, w),
        (float(w @ w) / (1.0 + e0)) * ev,
    ))


def nominal_state_derivative(state):
    """``d/dt (e_v, w)`` of the nominal flow, with ``e0 = +sqrt(1 - |e_v|^2)``."""
    _check_antipodal(state.e0)
    return nominal_vector_field(state.reduced())


def full_vector_field(y):
    """Nominal flow on the 7-vector ``(e0, e_v, w)`` (any hemisphere)."""
    e0 = y[0]
    ev = y[1:4]
    w = y[4:]
    evw = float(ev @ w)
    return np.concatenate((
        [(e0 - 1.0) * evw],
        (e0 - 1.0) * w + ev * evw + cross(ev, w),
        (float(w @ w) / (1.0 + e0)) * ev,
    ))


def full_state_derivative(state):
    """``d/dt (e0, e_v, w)`` of the nominal flow."""
    _check_antipodal(state.e0)
    return full_vector_field(np.concatenate(([state.e0], state.ev, state.w)))
