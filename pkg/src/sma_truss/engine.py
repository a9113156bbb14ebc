"""Fixed-step RK4 simulation of the truss, open or closed loop.

The plant is integrated at ``plant_rate`` steps per unit of nondimensional
time. The controller runs at the slower ``control_rate``; between control
instants its output is held (zero-order hold). The harmonic excitation is
always applied to the plant and is never seen by the controller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .control import ControllerConfig, Reference, convergence_box, fuzzy_fl_terms, model_residual
from .dynamics import SimState, TrussParams, derivative

DEFAULT_SETPOINT = 0.68
# slack for the box verdict; an exact model gives epsilon_hat = 0
BOX_ATOL = 1e-12


class BlowUpError(RuntimeError):
    """The displacement left the physically meaningful range."""

    def __init__(self, state: SimState, limit: float):
        self.state = state
        self.limit = limit
        super().__init__(f"|x| exceeded {limit:g} at tau={state.tau:.6g} (x={state.x:.6g}, y={state.y:.6g})")


def nominal_plant_rate(Omega: float) -> float:
    """Plant samples per unit tau, ``1000 Omega / pi`` (2000 per forcing period)."""
    return 1000.0 * Omega / math.pi


def nominal_control_rate(Omega: float) -> float:
    """Controller samples per unit tau, ``200 Omega / pi`` (400 per forcing period)."""
    return 200.0 * Omega / math.pi


def constant_reference(x_d: float) -> Callable[[float], Reference]:
    def ref(tau: float) -> Reference:
        return (x_d, 0.0, 0.0)

    return ref


@dataclass(frozen=True)
class Scenario:
    params: TrussParams
    controller: ControllerConfig | None = None
    x0: float = DEFAULT_SETPOINT
    y0: float = 0.0
    duration: float = 1000.0
    plant_rate: float | None = None  # default: nominal_plant_rate(Omega)
    control_rate: float | None = None  # default: nominal_control_rate(Omega)
    transient_fraction: float = 0.5
    setpoint: float = DEFAULT_SETPOINT
    include_forcing: bool = True
    blowup_limit: float = 10.0
    reference: Callable[[float], Reference] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration!r}")
        if not 0.0 <= self.transient_fraction < 1.0:
            raise ValueError(f"transient_fraction must lie in [0, 1), got {self.transient_fraction!r}")
        if self.plant_rate is None or self.control_rate is None:
            if not self.params.Omega > 0:
                raise ValueError("sampling rates must be given explicitly when Omega is zero")
        if not self.resolved_plant_rate > 0 or not self.resolved_control_rate > 0:
            raise ValueError("sampling rates must be positive")
        self.steps_per_control  # validates the ratio

    @property
    def resolved_plant_rate(self) -> float:
        return self.plant_rate if self.plant_rate is not None else nominal_plant_rate(self.params.Omega)

    @property
    def resolved_control_rate(self) -> float:
        return self.control_rate if self.control_rate is not None else nominal_control_rate(self.params.Omega)

    @property
    def plant_step(self) -> float:
        return 1.0 / self.resolved_plant_rate

    @property
    def steps_per_control(self) -> int:
        ratio = self.resolved_plant_rate / self.resolved_control_rate
        m = round(ratio)
        if m < 1 or abs(ratio - m) > 1e-9 * ratio:
            raise ValueError(f"plant_rate / control_rate = {ratio!r} is not a positive integer")
        return m

    def reference_at(self, tau: float) -> Reference:
        if self.reference is not None:
            return self.reference(tau)
        return (self.setpoint, 0.0, 0.0)


@dataclass
class ScenarioResult:
    scenario: Scenario
    tau: np.ndarray
    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    d_hat: np.ndarray
    s: np.ndarray
    xtilde: np.ndarray
    xtilde_dot: np.ndarray
    d_tilde: np.ndarray
    metrics: dict = field(default_factory=dict)
    poincare: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    consequents: np.ndarray | None = None

    SERIES = ("tau", "x", "y", "u", "d_hat", "s", "xtilde", "xtilde_dot", "d_tilde")

    def steady_mask(self) -> np.ndarray:
        return self.tau >= self.scenario.transient_fraction * self.scenario.duration


def rk4_step(
    state: SimState,
    dt: float,
    deriv: Callable[[SimState], tuple[float, float]],
    blowup_limit: float | None = None,
) -> SimState:
    """Advance one classical Runge-Kutta step.

    ``deriv`` maps a state to ``(x', y')``; anything it closes over (such as
    the control input) is frozen for the whole step.
    """
    if not dt > 0:
        raise ValueError(f"step must be positive, got {dt!r}")
    x, y, t = state.x, state.y, state.tau
    h2 = 0.5 * dt
    k1x, k1y = deriv(state)
    k2x, k2y = deriv(SimState(x + h2 * k1x, y + h2 * k1y, t + h2))
    k3x, k3y = deriv(SimState(x + h2 * k2x, y + h2 * k2y, t + h2))
    k4x, k4y = deriv(SimState(x + dt * k3x, y + dt * k3y, t + dt))
    new = SimState(
        x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y),
        t + dt,
    )
    if blowup_limit is not None and not abs(new.x) <= blowup_limit:
        raise BlowUpError(new, blowup_limit)
    return new


def run_scenario(sc: Scenario) -> ScenarioResult:
    """Integrate a scenario and collect its time series and metrics."""
    params = sc.params
    cfg = sc.controller
    fuzzy = cfg.make_compensator() if cfg is not None else None
    dt = sc.plant_step
    every = sc.steps_per_control
    dt_control = every * dt
    n = max(1, int(round(sc.duration * sc.resolved_plant_rate)))

    cols = {name: np.empty(n + 1) for name in ScenarioResult.SERIES}
    state = SimState(sc.x0, sc.y0, 0.0)
    u = s = d_hat = 0.0
    forcing = sc.include_forcing

    def deriv(st: SimState) -> tuple[float, float]:
        return derivative(st, params, u, forcing)

    for i in range(n + 1):
        # plant steps are counted, not accumulated, so tau stays exact
        tau = i * dt
        state = SimState(state.x, state.y, tau)
        ref = sc.reference_at(tau)
        if cfg is not None and i % every == 0:
            u, s, d_hat = fuzzy_fl_terms(state, ref, cfg, fuzzy, dt_control if i < n else 0.0)
        ex, ey = state.x - ref[0], state.y - ref[1]
        if cfg is None:
            s = float("nan")
            d_tilde = float("nan")
        else:
            d = model_residual(state.x, state.y, params, cfg)
            if forcing:
                d += params.gamma * math.sin(params.Omega * tau)
            d_tilde = d_hat - d
        cols["tau"][i] = tau
        cols["x"][i] = state.x
        cols["y"][i] = state.y
        cols["u"][i] = u
        cols["d_hat"][i] = d_hat
        cols["s"][i] = s
        cols["xtilde"][i] = ex
        cols["xtilde_dot"][i] = ey
        cols["d_tilde"][i] = d_tilde
        if i < n:
            state = rk4_step(state, dt, deriv, sc.blowup_limit)

    result = ScenarioResult(scenario=sc, **cols)
    if fuzzy is not None:
        result.consequents = fuzzy.cons.D_hat.copy()
    result.poincare = poincare_section(result, params.Omega)
    result.metrics = compute_metrics(result)
    return result


def poincare_section(result: ScenarioResult, Omega: float) -> np.ndarray:
    """States at ``tau_k = 2 pi k / Omega`` (k >= 1), linearly interpolated."""
    if not Omega > 0:
        return np.empty((0, 2))
    period = 2.0 * math.pi / Omega
    t_end = result.tau[-1]
    k = np.arange(1, int(math.floor(t_end / period * (1 + 1e-12))) + 1)
    times = np.minimum(k * period, t_end)
    if times.size == 0:
        return np.empty((0, 2))
    return np.column_stack([np.interp(times, result.tau, result.x), np.interp(times, result.tau, result.y)])


def count_distinct(points: np.ndarray, tol: float = 1e-3) -> int:
    """Size of a greedily built subset whose points are pairwise more than ``tol`` apart."""
    kept: list[np.ndarray] = []
    for p in points:
        if all(np.hypot(*(p - q)) > tol for q in kept):
            kept.append(p)
    return len(kept)


def snap_through_count(x: np.ndarray) -> int:
    """Number of sign changes of ``x`` between consecutive samples."""
    sign = np.sign(x)
    sign = sign[sign != 0]
    return int(np.count_nonzero(sign[1:] != sign[:-1]))


def compute_metrics(result: ScenarioResult) -> dict:
    sc = result.scenario
    steady = result.steady_mask()
    e = result.xtilde[steady]
    ed = result.xtilde_dot[steady]
    metrics = {
        "controlled": sc.controller is not None,
        "fuzzy": bool(sc.controller is not None and sc.controller.fuzzy_enabled),
        "duration": sc.duration,
        "plant_step": sc.plant_step,
        "steps_per_control": sc.steps_per_control,
        "transient_fraction": sc.transient_fraction,
        "steady_start_tau": sc.transient_fraction * sc.duration,
        "rms_error": float(np.sqrt(np.mean(e * e))),
        "max_abs_error": float(np.max(np.abs(e))),
        "snap_through_count": snap_through_count(result.x[steady]),
        "snap_through_count_total": snap_through_count(result.x),
        "poincare_points": len(result.poincare),
        "poincare_distinct": count_distinct(result.poincare),
    }
    if sc.controller is not None:
        cfg = sc.controller
        eps_hat = float(np.max(np.abs(result.d_tilde[steady])))
        box = convergence_box(cfg.n, cfg.lam, eps_hat)
        inside = (np.abs(result.xtilde) <= box[0] + BOX_ATOL) & (np.abs(result.xtilde_dot) <= box[1] + BOX_ATOL)
        outside = np.flatnonzero(~inside)
        if outside.size == 0:
            entry = 0.0
        elif outside[-1] + 1 < inside.size:
            entry = float(result.tau[outside[-1] + 1])
        else:
            entry = float("nan")
        metrics.update(
            {
                "lambda": cfg.lam,
                "n": cfg.n,
                "epsilon_hat": eps_hat,
                "box_xtilde": float(box[0]),
                "box_xtilde_dot": float(box[1]),
                "margin_xtilde": float(box[0] - np.max(np.abs(e))),
                "margin_xtilde_dot": float(box[1] - np.max(np.abs(ed))),
                "inside_box": bool(np.all(inside[steady])),
                "box_entry_time": entry,
            }
        )
    return metrics
