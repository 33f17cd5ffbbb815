"""Acceptance criteria, one test each.

Every test prints ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
before asserting; run with ``-s`` to see the lines.
"""

import math
import time

import numpy as np
import pytest
from scipy.linalg import expm

from quatdiff.checks import (
    charpoly_errors,
    jacobian_error,
    random_compliant_state,
    tangent_basis,
    transform_errors,
)
from quatdiff.controller import (
    ControllerConfig,
    ControlState,
    accel_law,
    blended_accel,
    scalar_law_g,
    target_velocity,
    target_velocity_rate_fd,
    vector_law_h,
)
from quatdiff.dynamics import ErrorState
from quatdiff.io import load_scenario
from quatdiff.quaternion import embed_vec, qmul, quat_exp
from quatdiff.sim import NOMINAL_FLOW, SimConfig, integrate_step, lyapunov_monotone, run, run_nominal, summarize
from quatdiff.stability import (
    StabilityClass,
    build_A,
    classify,
    corotating_generator,
    discriminant_root,
    eigenvalues,
)
from quatdiff.trajectory import PolynomialSignal, SinusoidSignal, TrajectoryParams, sample, verify_consistency

SEED = 20240601


def verdict(n, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def states_1000():
    rng = np.random.default_rng(SEED)
    return [random_compliant_state(rng) for _ in range(1000)]


def test_criterion_01_closed_form_char_poly(states_1000):
    start = time.perf_counter()
    even = odd = 0.0
    for s in states_1000:
        ev, od = charpoly_errors(s)
        even, odd = max(even, ev), max(odd, od)
    elapsed = time.perf_counter() - start
    ok = even <= 1e-9 and odd <= 1e-9 and elapsed < 5.0
    verdict(1, ok, f"1000 states, even rel {even:.2e}, odd abs {odd:.2e}, {elapsed:.2f} s")


def test_criterion_02_trace_zero(states_1000):
    worst = max(abs(np.trace(A)) / np.linalg.norm(A, "fro") for A in map(build_A, states_1000))
    verdict(2, worst <= 1e-12, f"max |tr A| / ||A||_F = {worst:.2e}")


def test_criterion_03_stability_boundary():
    root = discriminant_root()
    ok = -0.17 < root < -0.15
    verdict(3, ok, f"discriminant root e0 = {root:.6f}; acos(e0) = {math.degrees(math.acos(root)):.2f} deg, "
                   f"acos(-0.16) = {math.degrees(math.acos(-0.16)):.2f} deg "
                   f"(error rotation angle {2 * math.degrees(math.acos(root)):.2f} deg)")


def test_criterion_04_spectral_classification():
    pos = np.linspace(0.02, 1.0, 50)
    neg = np.linspace(-0.9, -0.2, 50)
    worst_re = max(max(abs(z.real) for z in eigenvalues(e0, 1.0)) for e0 in pos)
    min_growth = min(max(z.real for z in eigenvalues(e0, 1.0)) for e0 in neg)
    invariant = True
    for e0 in np.concatenate((pos, neg)):
        classes = {classify(e0, w).stability for w in (0.1, 1.0, 10.0)}
        invariant &= len(classes) == 1
        for w in (0.1, 10.0):
            invariant &= max(abs(z.real) for z in eigenvalues(e0, w)) < 1e-8 * w or e0 < 0
    stable = all(classify(e0).stability is StabilityClass.MARGINALLY_STABLE for e0 in pos)
    ok = worst_re < 1e-8 and min_growth > 0 and invariant and stable
    verdict(4, ok, f"max |Re| on (0,1] = {worst_re:.2e}, min max Re on [-0.9,-0.2] = {min_growth:.3f}, "
                   f"w-invariant = {invariant}")


def test_criterion_05_transform_identities():
    rng = np.random.default_rng(SEED + 5)
    ident = pattern = 0.0
    for _ in range(100):
        i, p = transform_errors(random_compliant_state(rng))
        ident, pattern = max(ident, i), max(pattern, p)
    verdict(5, ident <= 1e-12 and pattern <= 1e-12,
            f"congruence residual {ident:.2e}, sparse-pattern residual {pattern:.2e}")


def test_criterion_06_jacobian():
    rng = np.random.default_rng(SEED + 6)
    worst = max(jacobian_error(random_compliant_state(rng), h=1e-5) for _ in range(100))
    verdict(6, worst <= 1e-6, f"max relative error {worst:.2e} at h = 1e-5 (five-point stencil)")


def test_criterion_07_nominal_conservation():
    cfg = load_scenario("nominal_conservation")
    start = time.perf_counter()
    trace = run_nominal(cfg)
    elapsed = time.perf_counter() - start
    s = summarize(trace)
    ok = (s["e0_drift"] < 1e-8 and s["w_norm_drift"] < 1e-8 and s["max_evTw_violation"] < 1e-8
          and elapsed < 1.0)
    verdict(7, ok, f"e0 drift {s['e0_drift']:.1e}, |w| drift {s['w_norm_drift']:.1e}, "
                   f"max |e_v.w| {s['max_evTw_violation']:.1e}, {elapsed:.2f} s")


def _perturbation_growth(e0, w_mag, seed):
    s = math.sqrt(1 - e0 * e0)
    st = ErrorState(e0, [0.0, 0.0, s], [w_mag, 0.0, 0.0])
    cfg = SimConfig(scenario=NOMINAL_FLOW, t_final=1.0, nominal_initial=st)
    d = tangent_basis(st) @ np.random.default_rng(seed).normal(size=5)
    d *= 1e-4 / np.linalg.norm(d)
    dn = run_nominal(cfg, perturbation=d).final_state - run_nominal(cfg).final_state
    A = build_A(st)
    K, _ = corotating_generator(st)
    frozen = np.linalg.norm(dn - expm(A) @ d) / np.linalg.norm(dn)
    corot = np.linalg.norm(dn - expm(K) @ expm(A - K) @ d) / np.linalg.norm(dn)
    return frozen, corot


def test_criterion_08_linear_nonlinear_consistency():
    # frozen exp(A t) is first-order accurate only while |w| t is small
    frozen = max(_perturbation_growth(e0, 0.05, k)[0] for e0 in (0.3, 0.6, 0.9) for k in range(3))
    corot = max(_perturbation_growth(e0, 1.0, k)[1] for e0 in (0.3, 0.6, 0.9) for k in range(3))
    verdict(8, frozen < 0.05 and corot < 0.05,
            f"frozen exp(A t) at |w| = 0.05: {frozen:.2%}; co-rotating propagator at |w| = 1: {corot:.2e}")


def test_criterion_09_closed_loop_reproduction():
    trace = run(load_scenario("paper_sec5"))
    s = summarize(trace)
    ok = (s["convergence_ratio"] < 0.01 and s["evTw_reduction"] <= 0.01
          and s["w_constraint_reduction"] <= 0.01 and lyapunov_monotone(trace, 1e-9))
    verdict(9, ok, f"final/initial |q-p| {s['convergence_ratio']:.2e}, "
                   f"e_v.w reduction {s['evTw_reduction']:.2e}, "
                   f"w-constraint reduction {s['w_constraint_reduction']:.2e}, "
                   f"V_L monotone {lyapunov_monotone(trace, 1e-9)}")


def test_criterion_10_controller_identity():
    rng = np.random.default_rng(SEED + 10)
    worst_fd = worst_blend = 0.0
    for i in range(100):
        e = rng.normal(size=4)
        e[0] = max(abs(e[0]), 0.1)
        e /= np.linalg.norm(e)
        cs = ControlState(e[0], e[1:], rng.normal(size=3), rng.normal(size=3), rng.normal(size=3))
        M = rng.normal(size=(3, 3))
        L = M @ M.T + 0.5 * np.eye(3)
        cfg = ControllerConfig(L=L, r=(0.0, 0.5, 0.9, 1.0)[i % 4])
        expected = target_velocity_rate_fd(cs, cfg) - L @ (cs.w - target_velocity(cs, cfg))
        err = np.linalg.norm(accel_law(cs, cfg) - expected) / max(1.0, np.linalg.norm(expected))
        worst_fd = max(worst_fd, err)
        one = blended_accel(cs, ControllerConfig(L=L, r=1.0))
        worst_blend = max(worst_blend, np.abs(one - vector_law_h(cs, L)).max())
        g = scalar_law_g(cs, 1.0)
        zero = blended_accel(cs, ControllerConfig(L=L, r=0.0))
        worst_blend = max(worst_blend, abs(cs.ev @ zero - g) / max(1.0, abs(g)))
    verdict(10, worst_fd <= 1e-6 and worst_blend <= 1e-12,
            f"accel_law vs finite differences {worst_fd:.2e}, blended projections {worst_blend:.2e}")


def test_criterion_11_trajectory_identities():
    rng = np.random.default_rng(SEED + 11)
    worst = 0.0
    ratios = []
    for _ in range(100):
        params = TrajectoryParams(
            rng.uniform(-1.4, 1.4),
            SinusoidSignal(rng.uniform(0.2, 1.5), rng.uniform(0.2, 2.0), rng.uniform(0, 6.0), rng.uniform(-1, 1)),
            PolynomialSignal(rng.uniform(-1.0, 1.0, size=3)),
        )
        t = rng.uniform(0.0, 5.0)
        s = sample(params, t)
        ev = s.e[1:]
        worst = max(worst, abs(ev @ s.v), abs(ev @ s.w), abs(np.linalg.norm(s.v) - np.linalg.norm(s.w)))
        coarse = verify_consistency(params, t, h=1e-3)["v_dot"]
        fine = verify_consistency(params, t, h=5e-4)["v_dot"]
        if coarse > 1e-9:
            ratios.append(coarse / fine)
    order = math.log2(float(np.median(ratios)))
    ok = worst <= 1e-12 and abs(order - 2.0) < 0.3 and min(ratios) > 3.0
    verdict(11, ok, f"max identity residual {worst:.2e}; v_dot difference order {order:.2f} "
                    f"(min ratio {min(ratios):.2f}, {len(ratios)} samples)")


def _rk4_quat_error(dt):
    omega = np.array([0.3, -0.2, 2 * math.pi])
    q = np.array([1.0, 0.0, 0.0, 0.0])
    deriv = lambda t, y: 0.5 * qmul(y, embed_vec(omega))  # noqa: E731
    for i in range(int(round(1.0 / dt))):
        q = integrate_step(q, i * dt, dt, deriv)
    return np.linalg.norm(q - quat_exp(0.5 * omega))


def test_criterion_12_rk4_order():
    errs = [_rk4_quat_error(dt) for dt in (0.04, 0.02, 0.01)]
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    verdict(12, all(abs(r - 16) <= 3 for r in ratios),
            "error ratios per halving " + ", ".join(f"{r:.2f}" for r in ratios))

