"""Quaternion and 3-vector algebra.

Quaternions are stored scalar-first as ``numpy`` arrays ``[q0, q1, q2, q3]``.
3-vectors used as quaternion operands are embedded with a zero scalar part.
No sign canonicalization happens here: ``q`` and ``-q`` are distinct values,
because the stability results downstream depend on the sign of the scalar part.
"""

import math

import numpy as np

from .errors import NonSPDInertia, NonUnitInput

#: Tolerance on | |q| - 1 | for validating caller-supplied unit quaternions.
UNIT_TOL = 1e-6
#: Tolerance used for internal invariants.
UNIT_TOL_INTERNAL = 1e-9

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def cross(a, b):
    """Cross product of two 3-vectors (faster than ``np.cross`` for single vectors)."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def skew(u):
    """Matrix ``[u x]`` with ``skew(u) @ b == cross(u, b)``."""
    return np.array([
        [0.0, -u[2], u[1]],
        [u[2], 0.0, -u[0]],
        [-u[1], u[0], 0.0],
    ])


def as_quat(q):
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ValueError(f"quaternion must have shape (4,), got {q.shape}")
    return q


def as_vec3(u):
    u = np.asarray(u, dtype=float)
    if u.shape != (3,):
        raise ValueError(f"3-vector must have shape (3,), got {u.shape}")
    return u


def is_unit(q, tol=UNIT_TOL):
    return abs(math.sqrt(float(np.dot(q, q))) - 1.0) <= tol


def check_unit(q, tol=UNIT_TOL, name="q"):
    q = as_quat(q)
    norm = math.sqrt(float(np.dot(q, q)))
    if not abs(norm - 1.0) <= tol:
        raise NonUnitInput(f"{name} has norm {norm!r}, expected 1 within {tol:g}")
    return q


def normalize(q):
    q = as_quat(q)
    return q / math.sqrt(float(np.dot(q, q)))


def qmul(p, q):
    """Hamilton product ``p (x) q``.

    ``[p0 q0 - pv.qv ; p0 qv + q0 pv + pv x qv]``
    """
    p0, p1, p2, p3 = p
    q0, q1, q2, q3 = q
    return np.array([
        p0 * q0 - p1 * q1 - p2 * q2 - p3 * q3,
        p0 * q1 + q0 * p1 + p2 * q3 - p3 * q2,
        p0 * q2 + q0 * p2 + p3 * q1 - p1 * q3,
        p0 * q3 + q0 * p3 + p1 * q2 - p2 * q1,
    ])


def qinv(q):
    """Inverse of a unit quaternion (vector part negated)."""
    q = check_unit(q)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def conj(q):
    """Conjugate without the unit check."""
    return np.array([q[0], -q[1], -q[2], -q[3]])


def embed_vec(u):
    """Pure quaternion ``[0, u]``."""
    u = as_vec3(u)
    return np.array([0.0, u[0], u[1], u[2]])


def vec_part(q):
    return np.array([q[1], q[2], q[3]])


def quat_kinematics(q, omega_body):
    """Attitude quaternion rate ``1/2 q (x) omega`` for body angular velocity in rad/s."""
    q = check_unit(q)
    return 0.5 * qmul(q, embed_vec(omega_body))


def from_axis_angle(axis, angle):
    """Unit quaternion rotating by ``angle`` rad about unit ``axis`` (exponential map)."""
    axis = as_vec3(axis)
    n = math.sqrt(float(axis @ axis))
    if n == 0.0:
        if angle == 0.0:
            return IDENTITY.copy()
        raise ValueError("zero rotation axis with nonzero angle")
    half = 0.5 * angle
    return np.concatenate(([math.cos(half)], math.sin(half) * axis / n))


def quat_exp(u):
    """Quaternion exponential of the pure quaternion ``[0, u]``."""
    u = as_vec3(u)
    n = math.sqrt(float(u @ u))
    if n == 0.0:
        return IDENTITY.copy()
    return np.concatenate(([math.cos(n)], math.sin(n) * u / n))


def _check_inertia(J):
    J = np.asarray(J, dtype=float)
    if J.shape != (3, 3):
        raise NonSPDInertia(f"inertia must be 3x3, got {J.shape}")
    if not np.allclose(J, J.T, rtol=1e-12, atol=1e-12 * np.abs(J).max()):
        raise NonSPDInertia("inertia is not symmetric")
    if np.linalg.eigvalsh(J).min() <= 0.0:
        raise NonSPDInertia("inertia is not positive definite")
    return J


def torque_from_accel(J, omega, omega_dot):
    """Euler's equation ``n = omega x J omega + J omega_dot`` (N m)."""
    J = _check_inertia(J)
    omega = as_vec3(omega)
    return cross(omega, J @ omega) + J @ as_vec3(omega_dot)


def accel_from_torque(J, omega, torque):
    """Inverse of :func:`torque_from_accel`."""
    J = _check_inertia(J)
    omega = as_vec3(omega)
    return np.linalg.solve(J, as_vec3(torque) - cross(omega, J @ omega))
