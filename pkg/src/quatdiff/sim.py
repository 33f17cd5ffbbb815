"""Fixed-step simulation of the nominal flow and of closed-loop tracking."""

import math
from dataclasses import dataclass, field

import numpy as np

from .controller import ControlState, ControllerConfig, accel_law, blended_accel, lyapunov
from .dynamics import (
    EPS_ANTIPODAL,
    ErrorState,
    check_compliant,
    full_vector_field,
    nominal_vector_field,
    v_from_w,
    w_from_v,
)
from .errors import AntipodalSingularity, NonCompliantInitialState, NonFiniteDerivative
from .quaternion import conj, cross, from_axis_angle, qmul
from .trajectory import PolynomialSignal, TrajectoryParams, reference

NOMINAL_FLOW = "NominalFlow"
CLOSED_LOOP = "ClosedLoopTracking"

#: Bound on total drift of e0 and |w| and on |e_v.w| over a nominal run.
CONSERVATION_TOL = 1e-8

TRACE_COLUMNS = (
    "t_s",
    "r_norm",
    "e0",
    "evTw_violation",
    "w_constraint_violation",
    "lyapunov",
    "w_norm_rad_s",
)


def _default_trajectory():
    return TrajectoryParams(
        phi=0.0,
        alpha=PolynomialSignal([0.3, 1.0]),
        beta=PolynomialSignal([0.0, 0.3]),
    )


def _default_nominal():
    return ErrorState(math.cos(0.5), [0.0, 0.0, math.sin(0.5)], [1.0, 0.0, 0.0])


@dataclass(frozen=True)
class SimConfig:
    """Settings for one simulation run.

    ``initial_velocity`` is ``"compliant"`` (``w(0)`` from the velocity-match
    constraint) or ``"reference"`` (``w(0) = v(0)``). ``design`` selects the
    tracking law, ``"accel_law"`` or ``"blended"``. ``nominal_state_form`` is
    ``"reduced"``, ``"full"`` or ``"auto"`` (reduced when ``e0 > 0``).
    """

    dt: float = 1e-3
    t_final: float = 20.0
    scenario: str = CLOSED_LOOP
    trajectory: TrajectoryParams = field(default_factory=_default_trajectory)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    initial_axis: tuple = (1.0 / math.sqrt(3.0),) * 3
    initial_angle: float = 1.0
    renormalize_every: int = 1
    initial_velocity: str = "compliant"
    design: str = "accel_law"
    snapshot_stride: int = 0
    nominal_initial: ErrorState = field(default_factory=_default_nominal)
    nominal_state_form: str = "auto"

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("dt must be positive")
        if not self.t_final >= self.dt:
            raise ValueError("t_final must be at least dt")
        if self.scenario not in (NOMINAL_FLOW, CLOSED_LOOP):
            raise ValueError(f"unknown scenario {self.scenario!r}")
        axis = np.asarray(self.initial_axis, dtype=float)
        if axis.shape != (3,) or abs(np.linalg.norm(axis) - 1.0) > 1e-9:
            raise ValueError("initial_axis must be a unit 3-vector")
        if self.renormalize_every < 0:
            raise ValueError("renormalize_every must be >= 0")
        if self.initial_velocity not in ("compliant", "reference"):
            raise ValueError(f"unknown initial_velocity {self.initial_velocity!r}")
        if self.design not in ("accel_law", "blended"):
            raise ValueError(f"unknown design {self.design!r}")
        if self.nominal_state_form not in ("reduced", "full", "auto"):
            raise ValueError(f"unknown nominal_state_form {self.nominal_state_form!r}")
        object.__setattr__(self, "initial_axis", tuple(float(a) for a in axis))

    @property
    def n_steps(self):
        return int(round(self.t_final / self.dt))

    def to_dict(self):
        n = self.nominal_initial
        return {
            "dt_s": self.dt,
            "t_final_s": self.t_final,
            "scenario": self.scenario,
            "trajectory": self.trajectory.to_dict(),
            "controller": self.controller.to_dict(),
            "initial_error": {"axis": list(self.initial_axis), "angle_rad": self.initial_angle},
            "renormalize_every": self.renormalize_every,
            "initial_velocity": self.initial_velocity,
            "design": self.design,
            "snapshot_stride": self.snapshot_stride,
            "nominal_initial": {"e0": n.e0, "ev": n.ev.tolist(), "w_rad_s": n.w.tolist()},
            "nominal_state_form": self.nominal_state_form,
        }


@dataclass
class SimTrace:
    """Recorded rows (one per step, including ``t = 0``) plus optional state snapshots."""

    columns: tuple
    data: np.ndarray
    snapshots: list = field(default_factory=list)
    final_state: np.ndarray = None
    state_form: str = ""
    config: dict = field(default_factory=dict)

    def column(self, name):
        return self.data[:, self.columns.index(name)]

    def __len__(self):
        return self.data.shape[0]


def integrate_step(y, t, dt, deriv):
    """One classical RK4 step of ``y' = deriv(t, y)``.

    Raises:
        NonFiniteDerivative: if any stage evaluates to NaN or inf.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")

    def stage(tt, yy):
        k = deriv(tt, yy)
        if not np.all(np.isfinite(k)):
            raise NonFiniteDerivative(tt, "non-finite derivative")
        return k

    k1 = stage(t, y)
    k2 = stage(t + 0.5 * dt, y + 0.5 * dt * k1)
    k3 = stage(t + 0.5 * dt, y + 0.5 * dt * k2)
    k4 = stage(t + dt, y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _should_renormalize(cfg, step):
    return cfg.renormalize_every > 0 and step % cfg.renormalize_every == 0


# -- nominal flow ------------------------------------------------------------


def _nominal_row(t, e0, ev, w):
    evw = float(ev @ w)
    v = e0 * w + cross(ev, w)
    w_res = w - (e0 * v - cross(ev, v))
    return (t, math.sqrt(max(0.0, 2.0 * (1.0 - e0))), e0, abs(evw),
            math.sqrt(float(w_res @ w_res)), 0.0, math.sqrt(float(w @ w)))


def run_nominal(cfg, perturbation=None):
    """Integrate the nominal constant-difference flow from ``cfg.nominal_initial``.

    ``perturbation`` (6-vector on ``(e_v, w)``) is added after the initial
    state has been checked for compliance; the perturbed state is integrated
    as is. In the full form the quaternion part is renormalized.
    """
    s0 = cfg.nominal_initial
    if s0.e0 <= -1.0 + EPS_ANTIPODAL:
        raise AntipodalSingularity(f"e0 = {s0.e0!r} is within {EPS_ANTIPODAL:g} of -1")
    check_compliant(s0, exc=NonCompliantInitialState)
    form = cfg.nominal_state_form
    if form == "auto":
        form = "reduced" if s0.e0 > 0.0 else "full"
    if form == "reduced" and s0.e0 <= 0.0:
        raise ValueError("reduced state form requires e0 > 0")

    if form == "reduced":
        y = s0.reduced()
        if perturbation is not None:
            y = y + np.asarray(perturbation, dtype=float)
        deriv = lambda t, yy: nominal_vector_field(yy)  # noqa: E731

        def unpack(yy):
            ev = yy[:3]
            return math.sqrt(1.0 - float(ev @ ev)), ev, yy[3:]
    else:
        y = np.concatenate(([s0.e0], s0.ev, s0.w))
        if perturbation is not None:
            dp = np.asarray(perturbation, dtype=float)
            y = y + np.concatenate(([-float(s0.ev @ dp[:3]) / s0.e0 if s0.e0 else 0.0], dp))
            y[:4] /= np.linalg.norm(y[:4])
        deriv = lambda t, yy: full_vector_field(yy)  # noqa: E731

        def unpack(yy):
            return yy[0], yy[1:4], yy[4:]

    n = cfg.n_steps
    rows = np.empty((n + 1, len(TRACE_COLUMNS)))
    rows[0] = _nominal_row(0.0, *unpack(y))
    snaps = [(0.0, y.copy())] if cfg.snapshot_stride else []
    for i in range(1, n + 1):
        t_prev = (i - 1) * cfg.dt
        y = integrate_step(y, t_prev, cfg.dt, deriv)
        if form == "full" and _should_renormalize(cfg, i):
            y[:4] /= math.sqrt(float(y[:4] @ y[:4]))
        t = i * cfg.dt
        rows[i] = _nominal_row(t, *unpack(y))
        if cfg.snapshot_stride and i % cfg.snapshot_stride == 0:
            snaps.append((t, y.copy()))
    return SimTrace(TRACE_COLUMNS, rows, snaps, y.copy(), form, cfg.to_dict())


# -- closed-loop tracking ----------------------------------------------------


def initial_tracking_state(cfg):
    """``(q(0), w(0))`` with the error applied on the body side."""
    p0, v0, _ = reference(cfg.trajectory, 0.0)
    e_init = from_axis_angle(np.array(cfg.initial_axis), cfg.initial_angle)
    q0 = qmul(p0, e_init)
    if cfg.initial_velocity == "compliant":
        w0 = w_from_v(e_init, v0)
    else:
        w0 = v0.copy()
    return q0, w0


def _control_state(traj, t, q, w):
    p, v, vdot = reference(traj, t)
    e = qmul(conj(p), q)
    e = e / math.sqrt(float(e @ e))
    return p, ControlState(e[0], e[1:], v, vdot, w)


def tracking_derivative(cfg):
    """Right-hand side ``(q', w')`` of the closed loop on the 7-vector ``(q, w)``."""
    law = accel_law if cfg.design == "accel_law" else blended_accel
    traj, ctrl = cfg.trajectory, cfg.controller

    def deriv(t, y):
        q, w = y[:4], y[4:]
        _, cs = _control_state(traj, t, q, w)
        wdot = law(cs, ctrl)
        return np.concatenate((qmul(q, np.array([0.0, w[0], w[1], w[2]])), wdot))

    return deriv


def _tracking_row(cfg, t, y):
    q, w = y[:4], y[4:]
    p, cs = _control_state(cfg.trajectory, t, q, w)
    r = q - p
    v = cs.v
    w_res = w - (cs.e0 * v - cross(cs.ev, v))
    V, _ = lyapunov(cs, cfg.controller)
    return (t, math.sqrt(float(r @ r)), cs.e0, abs(float(cs.ev @ w)),
            math.sqrt(float(w_res @ w_res)), V, math.sqrt(float(w @ w)))


def run_tracking(cfg):
    """Closed-loop tracking of the configured reference trajectory."""
    if cfg.scenario != CLOSED_LOOP:
        raise ValueError("run_tracking needs scenario = ClosedLoopTracking")
    q0, w0 = initial_tracking_state(cfg)
    y = np.concatenate((q0, w0))
    deriv = tracking_derivative(cfg)
    n = cfg.n_steps
    rows = np.empty((n + 1, len(TRACE_COLUMNS)))
    rows[0] = _tracking_row(cfg, 0.0, y)
    snaps = [(0.0, y.copy())] if cfg.snapshot_stride else []
    for i in range(1, n + 1):
        y = integrate_step(y, (i - 1) * cfg.dt, cfg.dt, deriv)
        if _should_renormalize(cfg, i):
            y[:4] /= math.sqrt(float(y[:4] @ y[:4]))
        t = i * cfg.dt
        rows[i] = _tracking_row(cfg, t, y)
        if cfg.snapshot_stride and i % cfg.snapshot_stride == 0:
            snaps.append((t, y.copy()))
    return SimTrace(TRACE_COLUMNS, rows, snaps, y.copy(), "tracking", cfg.to_dict())


def run(cfg, **kwargs):
    """Dispatch on ``cfg.scenario``."""
    if cfg.scenario == NOMINAL_FLOW:
        return run_nominal(cfg, **kwargs)
    return run_tracking(cfg)


# -- trace diagnostics -------------------------------------------------------


def lyapunov_monotone(trace, tol=1e-9):
    """True when ``V_L`` never increases by more than ``tol`` between rows."""
    V = trace.column("lyapunov")
    return bool(np.all(np.diff(V) <= tol))


def settling_time(trace, column="lyapunov", fraction=math.exp(-1.0)):
    """First time the column drops below ``fraction`` of its initial value (linear interpolation)."""
    t = trace.column("t_s")
    x = trace.column(column)
    target = fraction * x[0]
    idx = np.nonzero(x <= target)[0]
    if idx.size == 0:
        return math.inf
    i = int(idx[0])
    if i == 0:
        return 0.0
    return float(t[i - 1] + (t[i] - t[i - 1]) * (x[i - 1] - target) / (x[i - 1] - x[i]))


def summarize(trace):
    """Summary metrics of a trace as an ordered dict."""
    r = trace.column("r_norm")
    c1 = trace.column("evTw_violation")
    c2 = trace.column("w_constraint_violation")
    e0 = trace.column("e0")
    wn = trace.column("w_norm_rad_s")
    t = trace.column("t_s")
    duration = t[-1] - t[0]

    def ratio(x):
        return float(x[-1] / x[0]) if x[0] != 0.0 else (0.0 if x[-1] == 0.0 else math.inf)

    out = {
        "initial_error": float(r[0]),
        "final_error": float(r[-1]),
        "convergence_ratio": ratio(r),
        "max_evTw_violation": float(c1.max()),
        "max_w_constraint_violation": float(c2.max()),
        "evTw_reduction": ratio(c1),
        "w_constraint_reduction": ratio(c2),
        "e0_drift": float(abs(e0[-1] - e0[0])),
        "e0_drift_rate_per_s": float(abs(e0[-1] - e0[0]) / duration) if duration else 0.0,
        "w_norm_drift": float(abs(wn[-1] - wn[0])),
        "lyapunov_monotone": lyapunov_monotone(trace),
        "steps": len(trace) - 1,
    }
    if trace.state_form in ("reduced", "full"):
        out["conservation_e0_pass"] = out["e0_drift"] < CONSERVATION_TOL
        out["conservation_w_norm_pass"] = out["w_norm_drift"] < CONSERVATION_TOL
        out["conservation_constraint_pass"] = out["max_evTw_violation"] < CONSERVATION_TOL
    return out


def nominal_velocity(state):
    """Desired half-velocity paired with a compliant nominal state."""
    return v_from_w(state.quat, state.w)
