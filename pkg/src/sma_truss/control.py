"""Feedback linearization with optional fuzzy disturbance compensation.

The truss is written as ``x'' = f(x, y) + u + d`` where ``f`` is the modelled
part (damping and restoring force) and ``d`` lumps parameter errors and the
unmodelled harmonic excitation. The controller cancels an estimate ``f_hat``
and imposes error dynamics with characteristic polynomial ``(p + lambda)^n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import comb
from typing import Sequence

import numpy as np

from .dynamics import SimState, TrussParams, restoring_term
from .fuzzy import DEFAULT_CENTERS, FuzzyCompensator, MembershipPartition, RuleConsequents

# (x_d, x_d', x_d'')
Reference = tuple[float, float, float]


@dataclass(frozen=True)
class ControllerConfig:
    """Gains, model estimates used in ``f_hat`` and fuzzy compensator settings.

    ``theta``, ``xi`` and ``b`` are taken as exactly known; only the two
    material ratios are detuned from the plant.
    """

    theta: float
    xi: float
    b: float
    alpha2_hat: float = 100.0
    alpha3_hat: float = 1.15e4
    lam: float = 0.6
    n: int = 2
    fuzzy_enabled: bool = False
    phi: float = 2.0
    d_max: float = 10.0
    centers: tuple[float, ...] = DEFAULT_CENTERS

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lambda must be positive, got {self.lam!r}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if self.phi < 0:
            raise ValueError(f"phi must be non-negative, got {self.phi!r}")
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))

    @cached_property
    def k(self) -> np.ndarray:
        return gain_vector(self.n, self.lam)

    @cached_property
    def model(self) -> TrussParams:
        """Estimated plant used inside the control law (no forcing)."""
        return TrussParams(
            theta=self.theta,
            xi=self.xi,
            gamma=0.0,
            Omega=0.0,
            alpha2=self.alpha2_hat,
            alpha3=self.alpha3_hat,
            b=self.b,
        )

    def make_compensator(self) -> FuzzyCompensator | None:
        if not self.fuzzy_enabled:
            return None
        part = MembershipPartition(self.centers)
        return FuzzyCompensator(part, RuleConsequents.zeros(len(part), self.d_max), self.phi)


def gain_vector(n: int, lam: float) -> np.ndarray:
    """Gains ``k_i = C(n, i) lam^(n - i)`` so that the error polynomial is ``(p + lam)^n``."""
    if n < 1 or not lam > 0:
        raise ValueError("need n >= 1 and lam > 0")
    return np.array([comb(n, i) * lam ** (n - i) for i in range(n)], dtype=float)


def combined_error(err: Sequence[float], k: Sequence[float]) -> float:
    """``s = sum_i k_i * e^(i)``, the single premise variable of the fuzzy rules."""
    if len(err) != len(k):
        raise ValueError(f"error has {len(err)} components but there are {len(k)} gains")
    return float(sum(ki * ei for ki, ei in zip(k, err)))


def estimated_dynamics(x: float, y: float, cfg: ControllerConfig) -> float:
    """``f_hat(x, y)`` from the controller's parameter estimates."""
    model = cfg.model
    return -model.xi * y + restoring_term(x, model)


def model_residual(x: float, y: float, params: TrussParams, cfg: ControllerConfig) -> float:
    """``f - f_hat`` at a state; the excitation is not included."""
    f = -params.xi * y + restoring_term(x, params)
    return f - estimated_dynamics(x, y, cfg)


def _tracking_error(state: SimState, ref: Reference) -> tuple[float, float]:
    return state.x - ref[0], state.y - ref[1]


def control_fl(state: SimState, ref: Reference, cfg: ControllerConfig) -> float:
    """Conventional feedback linearization ``u = -f_hat + x_d'' - k . e``."""
    if cfg.n != 2:
        raise ValueError(f"the truss is a second-order plant, controller has n={cfg.n}")
    err = _tracking_error(state, ref)
    k0, k1 = cfg.k
    return -estimated_dynamics(state.x, state.y, cfg) + ref[2] - k0 * err[0] - k1 * err[1]


def fuzzy_fl_terms(
    state: SimState,
    ref: Reference,
    cfg: ControllerConfig,
    fuzzy: FuzzyCompensator | None,
    dtau: float = 0.0,
) -> tuple[float, float, float]:
    """Control input together with the premise ``s`` and compensation ``d_hat``.

    The compensator is adapted after ``u`` has been formed, using ``dtau``
    as the step of the update law.
    """
    u = control_fl(state, ref, cfg)
    s = combined_error(_tracking_error(state, ref), cfg.k)
    if fuzzy is None:
        return u, s, 0.0
    d_hat = fuzzy.output(s)
    u = u - d_hat
    if dtau > 0.0:
        fuzzy.update(s, dtau)
    return u, s, d_hat


def control_fuzzy_fl(
    state: SimState,
    ref: Reference,
    cfg: ControllerConfig,
    fuzzy: FuzzyCompensator | None,
    dtau: float = 0.0,
) -> float:
    """Feedback linearization with fuzzy compensation ``u = u_fl - d_hat(s)``."""
    return fuzzy_fl_terms(state, ref, cfg, fuzzy, dtau)[0]


def zeta_coefficients(n: int) -> list[int]:
    """Box coefficients: ``zeta_0 = 1``, ``zeta_i = 1 + sum_{j<i} C(i, j) zeta_j``."""
    if n < 1:
        raise ValueError(f"n must be positive, got {n!r}")
    zeta = [1]
    for i in range(1, n):
        zeta.append(1 + sum(comb(i, j) * zeta[j] for j in range(i)))
    return zeta


def convergence_box(n: int, lam: float, epsilon: float) -> np.ndarray:
    """Half-widths ``zeta_i lam^(i - n) epsilon`` of the region the error settles in."""
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam!r}")
    if epsilon < 0:
        raise ValueError(f"epsilon must be non-negative, got {epsilon!r}")
    zeta = zeta_coefficients(n)
    return np.array([zeta[i] * lam ** (i - n) * epsilon for i in range(n)])
