"""Oracle checks of the linearization, run as the ``selftest`` command.

Each check compares an analytic result against an independent computation:
the Jacobian against central differences of the vector field, the
closed-form characteristic polynomial against Faddeev-LeVerrier, and the
aligned-frame congruences against direct matrix products.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ErrorState, nominal_vector_field
from .polynomial import faddeev_leverrier
from .stability import build_A, build_C, char_poly_closed, reduce_A, rotated_pattern, transform_identities

DEFAULT_SEED = 20240601

JACOBIAN_TOL = 1e-6
CHARPOLY_TOL = 1e-9
TRANSFORM_TOL = 1e-12


def random_unit_vector(rng):
    while True:
        u = rng.normal(size=3)
        n = np.linalg.norm(u)
        if n > 1e-3:
            return u / n


def random_compliant_state(rng, e0_range=(0.02, 0.99), w_range=(0.1, 2.0)):
    """Random state with ``e_v . w = 0``, ``e0`` and ``|w|`` uniform in the given ranges."""
    e0 = rng.uniform(*e0_range)
    s = math.sqrt(1.0 - e0 * e0)
    u = random_unit_vector(rng)
    d = random_unit_vector(rng)
    d = d - (d @ u) * u
    d /= np.linalg.norm(d)
    w = rng.uniform(*w_range) * d
    return ErrorState(e0, s * u, w)


def tangent_basis(state):
    """Orthonormal basis (6x5) of directions tangent to ``e_v . w = 0`` at ``state``."""
    grad = np.concatenate((state.w, state.ev))
    _, _, vt = np.linalg.svd(grad[None, :])
    return vt[1:].T


def directional_derivative(y, d, h=1e-5, order=4):
    """Central-difference derivative of the nominal field at ``y`` along ``d``.

    ``order=4`` uses the five-point stencil; the third derivative of
    ``sqrt(1 - |e_v|^2)`` grows like ``1/e0^5``, which makes the three-point
    stencil's truncation error visible at small ``e0``.
    """
    f = nominal_vector_field
    if order == 2:
        return (f(y + h * d) - f(y - h * d)) / (2.0 * h)
    if order == 4:
        return (8.0 * (f(y + h * d) - f(y - h * d))
                - (f(y + 2 * h * d) - f(y - 2 * h * d))) / (12.0 * h)
    raise ValueError("order must be 2 or 4")


def jacobian_error(state, A=None, h=1e-5, order=4):
    """Worst relative error of ``A d`` against central differences over the tangent basis.

    Errors are scaled by ``||A||_2`` so that directions in the near-null space
    of ``A`` are not divided by zero.
    """
    if A is None:
        A = build_A(state)
    y = state.reduced()
    scale = np.linalg.norm(A, 2)
    worst = 0.0
    for d in tangent_basis(state).T:
        fd = directional_derivative(y, d, h, order)
        worst = max(worst, float(np.linalg.norm(fd - A @ d) / scale))
    return worst


def charpoly_errors(state, A=None):
    """``(even_rel, odd_abs)`` errors of the closed form against Faddeev-LeVerrier.

    Both polynomials are normalized by ``|w|``: the oracle runs on ``A / |w|``.
    """
    if A is None:
        A = build_A(state)
    oracle = faddeev_leverrier(A / state.w_mag)
    closed = char_poly_closed(state.e0, state.w_mag).normalized
    even = [2, 4, 6]
    odd = [1, 3, 5]
    even_rel = max(abs(oracle[k] - closed[k]) / abs(closed[k]) for k in even)
    odd_abs = max(abs(oracle[k]) for k in odd)
    return float(even_rel), float(odd_abs)


def transform_errors(state, A=None):
    """``(identities, pattern)``: worst congruence residual and worst entry of ``A_rot`` off the sparse form."""
    if A is None:
        A = build_A(state)
    C = build_C(state)
    ident = max(transform_identities(state, C).values())
    A_rot, _ = reduce_A(A, C, state.w_mag)
    pattern = rotated_pattern(state.e0, state.ev_mag, state.w_mag)
    return float(ident), float(np.abs(A_rot - pattern).max() / max(1.0, np.abs(pattern).max()))


@dataclass
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def passed(self):
        return bool(self.worst <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<28s} worst={self.worst:.3e}  tol={self.tol:.0e}"


@dataclass
class SelftestReport:
    seed: int
    n_states: int
    results: list = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def lines(self):
        head = f"selftest seed={self.seed} states={self.n_states}"
        tail = "selftest: " + ("PASS" if self.passed else "FAIL")
        return [head] + [r.line() for r in self.results] + [tail]


def run_selftest(seed=DEFAULT_SEED, n_states=200, perturb=None):
    """Run all oracle checks on ``n_states`` seeded random compliant states.

    ``perturb`` optionally maps the analytic ``A`` to a modified matrix before
    it is checked; it exists to confirm that the checks catch errors.
    """
    rng = np.random.default_rng(seed)
    worst = {"jacobian": 0.0, "charpoly_even": 0.0, "charpoly_odd": 0.0,
             "transform_identities": 0.0, "rotated_pattern": 0.0, "trace": 0.0}
    for _ in range(n_states):
        state = random_compliant_state(rng)
        A = build_A(state)
        if perturb is not None:
            A = perturb(np.array(A))
        worst["jacobian"] = max(worst["jacobian"], jacobian_error(state, A))
        ev, od = charpoly_errors(state, A)
        worst["charpoly_even"] = max(worst["charpoly_even"], ev)
        worst["charpoly_odd"] = max(worst["charpoly_odd"], od)
        ident, pat = transform_errors(state, A)
        worst["transform_identities"] = max(worst["transform_identities"], ident)
        worst["rotated_pattern"] = max(worst["rotated_pattern"], pat)
        worst["trace"] = max(worst["trace"], abs(np.trace(A)) / np.linalg.norm(A))
    tols = {"jacobian": JACOBIAN_TOL, "charpoly_even": CHARPOLY_TOL, "charpoly_odd": CHARPOLY_TOL,
            "transform_identities": TRANSFORM_TOL, "rotated_pattern": TRANSFORM_TOL, "trace": 1e-12}
    report = SelftestReport(seed, n_states)
    report.results = [CheckResult(k, worst[k], tols[k]) for k in worst]
    return report
