"""Linearized constant-difference dynamics and their closed-form spectrum.

Perturbations ``(de_v, dw)`` of the reduced nominal flow obey ``x' = A x`` with
``A`` assembled from Euclidean vector operations on ``(e0, e_v, w)``. After the
orthogonal change of frame ``C`` (x along ``e_v``, z along ``w``) and a scaling by
``|w|``, the characteristic polynomial collapses to a cubic in
``lambda' = (1 + e0) lambda^2 / |w|^2`` whose coefficients depend on ``e0`` only.
"""

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import EPS_ANTIPODAL, EPS_COMPLIANCE, check_compliant
from .errors import AntipodalSingularity, DegenerateFrame, SingularE0
from .polynomial import csqrt_pair, faddeev_leverrier, solve_cubic
from .quaternion import cross, skew

log = logging.getLogger(__name__)

#: |e0| below this is singular for ``build_A`` (1/e0 entries).
EPS_E0 = 1e-9
#: Guard for the closed-form scalar expressions; only exact poles are rejected.
EPS_CLOSED = 1e-12
#: Default absolute tolerance on the discriminant and Routh-Hurwitz margins.
DEFAULT_TOL = 1e-8
#: Frame construction requires |e_v| and |w| above this.
EPS_FRAME = 1e-6


class StabilityClass(str, enum.Enum):
    MARGINALLY_STABLE = "MarginallyStable"
    UNSTABLE = "Unstable"
    BOUNDARY = "Boundary"

    @property
    def exit_code(self):
        return {"MarginallyStable": 0, "Unstable": 1, "Boundary": 2}[self.value]


def build_A(state, check=True):
    """6x6 state matrix of the linearized nominal flow at a compliant state.

    ``de0`` has been eliminated as ``-e_v . de_v / e0``.
    """
    e0, ev, w = state.e0, state.ev, state.w
    if abs(e0) <= EPS_E0:
        raise SingularE0(f"e0 = {e0!r} is within {EPS_E0:g} of 0")
    if e0 <= -1.0 + EPS_ANTIPODAL:
        raise AntipodalSingularity(f"e0 = {e0!r} is within {EPS_ANTIPODAL:g} of -1")
    if check:
        check_compliant(state)
    eye = np.eye(3)
    ww = float(w @ w)
    eve = np.outer(ev, ev)
    A = np.empty((6, 6))
    A[:3, :3] = np.outer(ev, w) - skew(w) - np.outer(w, ev) / e0
    A[:3, 3:] = (e0 - 1.0) * eye + skew(ev) + eve
    A[3:, :3] = ww * eye / (1.0 + e0) + ww * eve / ((1.0 + e0) ** 2 * e0)
    A[3:, 3:] = 2.0 * np.outer(ev, w) / (1.0 + e0)
    return A


def build_C(state, eps=EPS_COMPLIANCE):
    """Orthogonal frame with columns ``e_v/|e_v|``, ``w x e_v/(|e_v||w|)``, ``w/|w|``."""
    ev, w = state.ev, state.w
    s, wm = state.ev_mag, state.w_mag
    if s <= EPS_FRAME or wm <= EPS_FRAME:
        raise DegenerateFrame(f"|e_v| = {s:.3e}, |w| = {wm:.3e}: frame undefined")
    if abs(float(ev @ w)) > eps * s * wm:
        raise DegenerateFrame("e_v and w are not orthogonal")
    return np.column_stack((ev / s, cross(w, ev) / (s * wm), w / wm))


def transform_identities(state, C=None):
    """Residuals (max abs entry) of the six congruence identities of the aligned frame."""
    if C is None:
        C = build_C(state)
    ev, w = state.ev, state.w
    s, wm = state.ev_mag, state.w_mag
    expected = {
        "CtC": np.eye(3),
        "Ct_evev_C": np.diag([s * s, 0.0, 0.0]),
        "Ct_evw_C": np.array([[0, 0, s * wm], [0, 0, 0], [0, 0, 0]], dtype=float),
        "Ct_wev_C": np.array([[0, 0, 0], [0, 0, 0], [s * wm, 0, 0]], dtype=float),
        "Ct_skew_ev_C": np.array([[0, 0, 0], [0, 0, -s], [0, s, 0]], dtype=float),
        "Ct_skew_w_C": np.array([[0, -wm, 0], [wm, 0, 0], [0, 0, 0]], dtype=float),
    }
    actual = {
        "CtC": C.T @ C,
        "Ct_evev_C": C.T @ np.outer(ev, ev) @ C,
        "Ct_evw_C": C.T @ np.outer(ev, w) @ C,
        "Ct_wev_C": C.T @ np.outer(w, ev) @ C,
        "Ct_skew_ev_C": C.T @ skew(ev) @ C,
        "Ct_skew_w_C": C.T @ skew(w) @ C,
    }
    return {k: float(np.abs(actual[k] - expected[k]).max()) for k in expected}


def reduce_A(A, C, w_mag):
    """Rotate ``A`` into the aligned frame, then non-dimensionalize by ``|w|``.

    Returns ``(A_rot, A_norm)`` with ``A_rot = diag(C^T, C^T) A diag(C, C)`` and
    ``A_norm = diag(I/w, I/w^2) A_rot diag(I, w I)``; ``eig(A_norm) = eig(A_rot) / w``.
    """
    T = np.zeros((6, 6))
    T[:3, :3] = C
    T[3:, 3:] = C
    A_rot = T.T @ A @ T
    left = np.concatenate((np.full(3, 1.0 / w_mag), np.full(3, 1.0 / w_mag ** 2)))
    right = np.concatenate((np.ones(3), np.full(3, w_mag)))
    A_norm = left[:, None] * A_rot * right[None, :]
    return A_rot, A_norm


def rotated_pattern(e0, s, w):
    """Closed-form sparse ``A_rot`` in terms of ``c = e0``, ``s = |e_v|``, ``w = |w|``."""
    c = e0
    M = np.zeros((6, 6))
    M[0, 1] = w
    M[0, 2] = s * w
    M[1, 0] = -w
    M[2, 0] = -s * w / c
    M[0, 3] = c - c * c
    M[1, 4] = c - 1.0
    M[1, 5] = -s
    M[2, 4] = s
    M[2, 5] = c - 1.0
    M[3, 0] = w * w / (c * (1.0 + c))
    M[4, 1] = w * w / (1.0 + c)
    M[5, 2] = w * w / (1.0 + c)
    M[3, 5] = 2.0 * s * w / (1.0 + c)
    return M


def normalized_pattern(e0, s):
    """Closed-form ``A_norm``; free of ``|w|``."""
    return rotated_pattern(e0, s, 1.0)


def _check_e0_closed(e0):
    if abs(e0) < EPS_CLOSED:
        raise SingularE0(f"e0 = {e0!r}: closed form has a pole at 0")
    if 1.0 + e0 < EPS_CLOSED:
        raise AntipodalSingularity(f"e0 = {e0!r}: closed form has a pole at -1")


def cubic_coefficients(e0):
    """``(a, b, c)`` of ``lambda'^3 + a lambda'^2 + b lambda' + c``."""
    _check_e0_closed(e0)
    a = 1.0 / e0 + 3.0 - e0 - e0 * e0
    b = (1.0 - e0) * (3.0 + 3.0 * e0 - 2.0 * e0 * e0)
    c = 2.0 * e0 * (1.0 - e0) ** 2
    return a, b, c


def lambda2_coefficient_alt(e0):
    """Alternate expanded form of the normalized ``lambda^2`` coefficient."""
    return (3.0 - 5.0 * e0 ** 2 + 2.0 * e0 ** 3) / (1.0 + e0) ** 2


@dataclass(frozen=True)
class CharPoly:
    """Closed-form characteristic polynomial at ``(e0, |w|)``.

    ``c4, c2, c0`` are the coefficients of ``(lambda/|w|)^4, (lambda/|w|)^2, 1``
    in ``det(lambda I - A) / |w|^6``; ``a, b, c`` are those of the reduced cubic.
    """

    e0: float
    w_mag: float
    c4: float
    c2: float
    c0: float
    a: float
    b: float
    c: float

    @property
    def normalized(self):
        """Descending coefficients of ``det(lambda I - A) / |w|^6`` in ``lambda / |w|``."""
        return np.array([1.0, 0.0, self.c4, 0.0, self.c2, 0.0, self.c0])

    @property
    def coefficients(self):
        """Descending coefficients of ``det(lambda I - A)`` in ``lambda``."""
        return self.normalized * self.w_mag ** np.arange(7)

    @property
    def cubic(self):
        return self.a, self.b, self.c


def char_poly_closed(e0, w_mag=1.0):
    e0 = float(e0)
    a, b, c = cubic_coefficients(e0)
    c4 = (1.0 + 3.0 * e0 - e0 ** 2 - e0 ** 3) / (e0 * (1.0 + e0))
    c2 = (1.0 - e0) * (3.0 + 3.0 * e0 - 2.0 * e0 ** 2) / (1.0 + e0) ** 2
    c0 = 2.0 * e0 * (1.0 - e0) ** 2 / (1.0 + e0) ** 3
    alt = lambda2_coefficient_alt(e0)
    if abs(alt - c2) > 1e-12 * max(1.0, abs(c2)):
        log.warning("lambda^2 coefficient forms disagree at e0=%r: %r vs %r", e0, c2, alt)
    return CharPoly(e0, float(w_mag), c4, c2, c0, a, b, c)


def char_poly_numeric(A):
    """Coefficients of ``det(lambda I - A)`` (descending) by Faddeev-LeVerrier."""
    return faddeev_leverrier(A)


def discriminant(e0):
    """Sign-determining factor ``1 + 5 e0 - 8 e0^2 + 4 e0^3`` of the cubic's discriminant."""
    return 1.0 + e0 * (5.0 + e0 * (-8.0 + 4.0 * e0))


def discriminant_root(lo=-0.9, hi=0.0, xtol=1e-14):
    """Bisection for the sign change of :func:`discriminant` on ``[lo, hi]``."""
    flo, fhi = discriminant(lo), discriminant(hi)
    if flo * fhi > 0:
        raise ValueError("discriminant does not change sign on the bracket")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = discriminant(mid)
        if fm == 0.0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def cubic_roots(poly):
    """Roots of the reduced cubic; accepts a :class:`CharPoly` or an ``(a, b, c)`` triple."""
    a, b, c = poly.cubic if isinstance(poly, CharPoly) else poly
    return solve_cubic(a, b, c)


def _sort_complex(values):
    return sorted((complex(z) for z in values), key=lambda z: (z.real, z.imag))


def eigenvalues_from_cubic(roots, e0, w_mag):
    """Map cubic roots back through ``lambda^2 = lambda' |w|^2 / (1 + e0)``."""
    scale = w_mag * w_mag / (1.0 + e0)
    out = []
    for root in roots:
        out.extend(csqrt_pair(root * scale))
    return _sort_complex(out)


def eigenvalues(e0, w_mag=1.0):
    """The six eigenvalues of ``A`` at ``(e0, |w|)`` from the closed form."""
    poly = char_poly_closed(e0, w_mag)
    return eigenvalues_from_cubic(cubic_roots(poly), poly.e0, w_mag)


@dataclass(frozen=True)
class StabilityReport:
    e0: float
    w_mag: float
    a: float
    b: float
    c: float
    ab_minus_c: float
    discriminant: float
    cubic_roots: list = field(repr=False)
    eigenvalues: list = field(repr=False)
    max_re_eigenvalue: float
    stability: StabilityClass

    @property
    def error_half_angle_deg(self):
        return math.degrees(math.acos(max(-1.0, min(1.0, self.e0))))

    @property
    def error_angle_deg(self):
        return 2.0 * self.error_half_angle_deg


def classify(e0, w_mag=1.0, tol=DEFAULT_TOL):
    """Stability class of the linearized flow at ``e0``.

    Boundary when ``|Delta| <= tol``; marginally stable when ``Delta > tol`` and
    the cubic passes Routh-Hurwitz in non-strict form (every margin ``>= -tol``),
    i.e. all ``lambda'`` real and non-positive so all ``lambda`` are imaginary;
    unstable otherwise.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    poly = char_poly_closed(e0, w_mag)
    a, b, c = poly.cubic
    delta = discriminant(poly.e0)
    roots = cubic_roots(poly)
    eig = eigenvalues_from_cubic(roots, poly.e0, w_mag)
    routh_ok = min(a, b, c) >= -tol and a * b - c >= -tol
    if abs(delta) <= tol:
        cls = StabilityClass.BOUNDARY
    elif delta > tol and routh_ok:
        cls = StabilityClass.MARGINALLY_STABLE
    else:
        cls = StabilityClass.UNSTABLE
    return StabilityReport(
        e0=poly.e0, w_mag=float(w_mag), a=a, b=b, c=c, ab_minus_c=a * b - c,
        discriminant=delta, cubic_roots=roots, eigenvalues=eig,
        max_re_eigenvalue=max(z.real for z in eig), stability=cls,
    )


def corotating_generator(state):
    """Rotation generator ``K`` with ``f(s0) = K s0`` for the nominal flow at ``state``.

    The nominal flow is rotation-equivariant and its solutions are uniform
    rotations of the initial ``(e_v, w)`` at the constant rate
    ``Omega = C (0, |w||e_v|/(1 + e0), -|w|)``. Returns ``(K, Omega)`` where
    ``K = diag([Omega x], [Omega x])``. The exact first-order propagator along
    the nominal solution is ``exp(K t) exp((A - K) t)``.
    """
    C = build_C(state)
    s, wm = state.ev_mag, state.w_mag
    omega = C @ np.array([0.0, wm * s / (1.0 + state.e0), -wm])
    K = np.zeros((6, 6))
    K[:3, :3] = skew(omega)
    K[3:, 3:] = skew(omega)
    return K, omega
