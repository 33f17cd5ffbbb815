"""Characteristic polynomials and closed-form cubic roots."""

import cmath
import math

import numpy as np


def faddeev_leverrier(A):
    """Coefficients of ``det(lambda I - A)`` in descending powers, leading 1.

    Plain Faddeev-LeVerrier recursion; adequate for the small, well scaled
    matrices used here.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    coeffs = np.zeros(n + 1)
    coeffs[0] = 1.0
    M = np.zeros_like(A)
    eye = np.eye(n)
    for k in range(1, n + 1):
        M = A @ M + coeffs[k - 1] * eye
        coeffs[k] = -np.trace(A @ M) / k
    return coeffs


def poly_from_roots(roots):
    """Monic coefficients (descending) of ``prod (x - r)``."""
    c = np.array([1.0 + 0j])
    for r in roots:
        c = np.convolve(c, [1.0, -r])
    return c


def cubic_value(a, b, c, x):
    return ((x + a) * x + b) * x + c


def _newton_polish(a, b, c, x, iterations=2):
    # Only accepted when it lowers the residual; double roots make Newton crawl.
    for _ in range(iterations):
        f = cubic_value(a, b, c, x)
        df = (3.0 * x + 2.0 * a) * x + b
        if df == 0.0:
            break
        x_new = x - f / df
        if abs(cubic_value(a, b, c, x_new)) < abs(f):
            x = x_new
        else:
            break
    return x


def _quadratic_roots(a, b):
    """Roots of ``x^2 + a x + b``, cancellation-free."""
    disc = a * a - 4.0 * b
    if disc >= 0.0:
        sq = math.sqrt(disc)
        x1 = -0.5 * (a + math.copysign(sq, a)) if a != 0.0 else (sq / 2.0 if sq else 0.0)
        if x1 != 0.0:
            x2 = b / x1
        else:
            x2 = -a - x1
        return [complex(x1), complex(x2)]
    sq = math.sqrt(-disc)
    return [complex(-0.5 * a, -0.5 * sq), complex(-0.5 * a, 0.5 * sq)]


def solve_cubic(a, b, c, rel_tol=1e-12):
    """Roots of the monic cubic ``x^3 + a x^2 + b x + c``.

    Three real roots (including repeated ones) come from the trigonometric
    form; a single real root plus a conjugate pair from Cardano's formula.
    The branch is picked from the sign of the cubic's own discriminant, with
    ``rel_tol`` absorbing rounding around repeated roots. Roots are returned
    as complex numbers sorted by ``(real, imag)``.
    """
    a, b, c = float(a), float(b), float(c)
    if c == 0.0:
        roots = [0j] + _quadratic_roots(a, b)
        return sorted(roots, key=lambda z: (z.real, z.imag))

    shift = a / 3.0
    p = b - a * a / 3.0
    q = 2.0 * a ** 3 / 27.0 - a * b / 3.0 + c
    scale = 4.0 * abs(p) ** 3 + 27.0 * q * q
    disc = -(4.0 * p ** 3 + 27.0 * q * q)

    if scale == 0.0:
        roots = [complex(-shift)] * 3
    elif disc >= -rel_tol * scale and p < 0.0:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        roots = []
        for k in range(3):
            x = m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift
            roots.append(complex(_newton_polish(a, b, c, x)))
    else:
        # one real root; pick the cube-root branch that avoids cancellation
        sq = math.sqrt(max(q * q / 4.0 + p ** 3 / 27.0, 0.0))
        u3 = -q / 2.0 - math.copysign(sq, q) if q != 0.0 else sq
        u = float(np.cbrt(u3))
        v = -p / (3.0 * u) if u != 0.0 else 0.0
        x1 = _newton_polish(a, b, c, u + v - shift)
        # deflate: x^2 + (a + x1) x + (b + x1 (a + x1))
        qa = a + x1
        qb = b + x1 * qa
        roots = [complex(x1)] + _quadratic_roots(qa, qb)
    return sorted(roots, key=lambda z: (z.real, z.imag))


def cubic_discriminant(a, b, c):
    """Discriminant of ``x^3 + a x^2 + b x + c``."""
    return 18.0 * a * b * c - 4.0 * a ** 3 * c + a * a * b * b - 4.0 * b ** 3 - 27.0 * c * c


def csqrt_pair(z):
    """``(+sqrt(z), -sqrt(z))``, exact zero real part for non-positive reals."""
    z = complex(z)
    if z.imag == 0.0:
        if z.real <= 0.0:
            r = complex(0.0, math.sqrt(-z.real))
        else:
            r = complex(math.sqrt(z.real), 0.0)
    else:
        r = cmath.sqrt(z)
    return r, -r
